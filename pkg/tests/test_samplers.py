import math

import numpy as np
import pytest
from scipy import integrate, stats

from ibsim import (
    Configuration,
    bessel_model,
    gaussian_potential,
    ruelle_model,
    sine_model,
    zero_potential,
)
from ibsim.errors import InvalidParameterError, UnsupportedModelError
from ibsim.models import kernel_eval
from ibsim.samplers import (
    discretize_kernel,
    gibbs_energy,
    mh_acceptance,
    sample_dpp,
    sample_gibbs,
    sample_ginibre,
    sample_poisson,
    sample_sine_beta,
)


def test_ginibre_single_entry_is_gaussian():
    cfg = sample_ginibre(1, 0.0, seed=3)
    assert cfg.points.shape == (1, 2)


def test_ginibre_window_precondition():
    with pytest.raises(InvalidParameterError):
        sample_ginibre(100, 9.0, seed=1)  # 9 > 0.8 * 10


def test_ginibre_reproducible():
    a = sample_ginibre(50, 4.0, seed=11)
    b = sample_ginibre(50, 4.0, seed=11)
    assert np.array_equal(a.points, b.points)


def test_ginibre_intensity_quick():
    # light version of the acceptance check: 40 replicas, n = 200
    counts = [len(sample_ginibre(200, 6.0, seed=(100, i))) for i in range(40)]
    area = math.pi * 36
    dens = np.asarray(counts) / area
    se = dens.std(ddof=1) / math.sqrt(len(dens))
    assert abs(dens.mean() - 1 / math.pi) < 3.5 * se


def test_dpp_trace_equals_window_length_for_sine():
    dk = discretize_kernel(sine_model(2), (0.0, 10.0), 160)
    assert dk.trace() == pytest.approx(10.0, abs=1e-6)


def test_dpp_spectrum_in_unit_interval():
    dk = discretize_kernel(sine_model(2), (0.0, 8.0), 140)
    assert dk.eigenvalues.min() >= 0.0
    assert dk.eigenvalues.max() <= 1.0


def test_dpp_mean_count_matches_trace():
    dk = discretize_kernel(sine_model(2), (0.0, 8.0), 140)
    counts = [len(sample_dpp(sine_model(2), None, None, (5, i), discretized=dk)) for i in range(120)]
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(mean - dk.trace()) < 3.5 * se
    # determinantal counts are sums of independent Bernoullis
    assert np.var(counts, ddof=1) <= np.mean(counts)


def test_dpp_points_inside_window_and_reproducible():
    dk = discretize_kernel(sine_model(2), (0.0, 8.0), 140)
    a = sample_dpp(sine_model(2), None, None, (9, 0), discretized=dk)
    b = sample_dpp(sine_model(2), None, None, (9, 0), discretized=dk)
    assert np.array_equal(a.points, b.points)
    assert np.all((a.points >= 0.0) & (a.points <= 8.0))


def test_dpp_bessel_mean_count_matches_quadrature():
    model = bessel_model(1.0)
    length = 12.0
    dk = discretize_kernel(model, (0.0, length), 160)
    target, _ = integrate.quad(
        lambda x: float(np.real(kernel_eval(model, [x], [x]))), 0.0, length, limit=200
    )
    assert dk.trace() == pytest.approx(target, rel=1e-5)
    counts = [len(sample_dpp(model, None, None, (17, i), discretized=dk)) for i in range(100)]
    se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(np.mean(counts) - target) < 3.5 * se


def test_dpp_rejects_planar_model():
    from ibsim import ginibre_model

    with pytest.raises(UnsupportedModelError):
        discretize_kernel(ginibre_model(), (0.0, 4.0), 50)


def test_sine_beta_bulk_routes():
    for beta in (1, 2, 4):
        cfg = sample_sine_beta(beta, 120, 10.0, seed=(beta, 0))
        assert np.all(np.abs(cfg.points) <= 10.0)
        # unit intensity within 25% for a single modest replica
        assert 0.75 < len(cfg) / 20.0 < 1.25
    with pytest.raises(UnsupportedModelError):
        sample_sine_beta(3, 120, 10.0, seed=0)


def test_poisson_counts():
    counts = [len(sample_poisson(2.0, 5.0, 1, (3, i))) for i in range(200)]
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(mean - 20.0) < 3.5 * se


# --- Gibbs sampler --------------------------------------------------------


def test_gibbs_zero_potential_uniform_radial_law():
    model = ruelle_model(zero_potential(), beta=1.0)
    radii = []
    for i in range(60):
        cfg = sample_gibbs(model, 2.0, None, 5, 400, (21, i), dim=2)
        radii.extend(np.linalg.norm(cfg.free_points, axis=1).tolist())
    # radial CDF of the uniform law on a disk of radius R is (rho/R)^2
    stat = stats.kstest(np.asarray(radii) / 2.0, lambda u: u**2)
    assert stat.pvalue > 0.01


def test_gibbs_repulsion_increases_pair_distance():
    strong = ruelle_model(gaussian_potential(8.0, 1.0), beta=2.0)
    free = ruelle_model(zero_potential(), beta=1.0)
    d_strong, d_free = [], []
    for i in range(40):
        a = sample_gibbs(strong, 2.0, None, 2, 600, (31, i), dim=2)
        b = sample_gibbs(free, 2.0, None, 2, 600, (31, i), dim=2)
        d_strong.append(np.linalg.norm(a.free_points[0] - a.free_points[1]))
        d_free.append(np.linalg.norm(b.free_points[0] - b.free_points[1]))
    assert np.mean(d_strong) > np.mean(d_free)


def test_gibbs_respects_frozen_exterior():
    model = ruelle_model(gaussian_potential(3.0, 1.0), beta=1.0)
    exterior = Configuration(np.array([[3.0, 0.0], [0.0, -3.5]]))
    cfg = sample_gibbs(model, 2.0, exterior, 4, 200, seed=5)
    assert len(cfg) == 6
    assert np.count_nonzero(cfg.frozen) == 2
    assert np.array_equal(cfg.frozen_points, exterior.points)
    with pytest.raises(InvalidParameterError):
        sample_gibbs(model, 4.0, exterior, 2, 10, seed=5)


def test_detailed_balance_on_enumerated_chain():
    # three-state toy chain driven by the package's acceptance rule;
    # stationary vector must equal the normalised Boltzmann target
    energies = np.array([0.0, 0.7, 1.9])
    proposal = np.array(
        [
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0],
        ]
    )
    n = len(energies)
    p = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                p[i, j] = proposal[i, j] * mh_acceptance(energies[i], energies[j])
        p[i, i] = 1.0 - p[i].sum()
    target = np.exp(-energies)
    target /= target.sum()
    # stationarity and detailed balance, both to near machine precision
    assert np.max(np.abs(target @ p - target)) < 1e-12
    for i in range(n):
        for j in range(n):
            assert abs(target[i] * p[i, j] - target[j] * p[j, i]) < 1e-12


def test_gibbs_energy_symmetric_in_particle_order():
    model = ruelle_model(gaussian_potential(2.0, 0.8), beta=1.5)
    pts = np.array([[0.1, 0.2], [-0.5, 0.4], [0.3, -0.3]])
    ext = np.array([[2.5, 0.0]])
    e1 = gibbs_energy(model, pts, ext, 10.0)
    e2 = gibbs_energy(model, pts[::-1], ext, 10.0)
    assert e1 == pytest.approx(e2, rel=1e-12)
