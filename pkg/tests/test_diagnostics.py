import math

import numpy as np
import pytest
from scipy import integrate

from ibsim import Configuration, ruelle_model, sine_model, zero_potential
from ibsim.diagnostics import (
    check_a4,
    check_a4_liminf,
    erf_tail,
    invariance_test,
    min_gap,
    moment4_check,
    nbj_index,
    scheme_distance,
)
from ibsim.dynamics import SchemeParams, simulate_lower
from ibsim.errors import ConfigError, InsufficientDataError
from ibsim.estimators import AnalysisWindow
from ibsim.samplers import sample_poisson

FREE = ruelle_model(zero_potential(), beta=1.0)


def test_erf_tail_values():
    assert erf_tail(0.0) == pytest.approx(0.5, abs=1e-15)
    assert erf_tail(40.0) < 1e-300 or erf_tail(40.0) == 0.0
    # oracle: quadrature of the defining integral
    val, _ = integrate.quad(lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi), 1, 50)
    assert erf_tail(1.0) == pytest.approx(val, abs=1e-12)
    assert erf_tail(1.0) == pytest.approx(0.1586553, abs=1e-7)


def test_erf_tail_matches_quadrature_on_grid():
    for t in np.linspace(-5, 5, 21):
        val, _ = integrate.quad(
            lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi), t, 60
        )
        assert erf_tail(t) == pytest.approx(val, abs=1e-10)


def test_check_a4_constant_intensity_d1():
    # identity: 2 * integral_0^inf erf_tail(x) dx = 2 / sqrt(2 pi)
    res = check_a4(1.0, r=0.0, T=1.0, d=1)
    assert res.finite
    assert res.value == pytest.approx(2 / math.sqrt(2 * math.pi), abs=1e-6)


def test_check_a4_zero_intensity():
    res = check_a4(0.0, r=3.0, T=2.0, d=1)
    assert res.finite
    assert res.value == 0.0


def test_check_a4_ginibre_plane_finite():
    res = check_a4(1 / math.pi, r=5.0, T=2.0, d=2)
    assert res.finite
    assert res.value > 0


def test_check_a4_flags_divergence():
    # rho ~ exp(u^2/2) against erf_tail(u) leaves a 1/u tail: not integrable
    res = check_a4(lambda u: math.exp(min(u * u / 2, 650.0)), r=0.0, T=1.0, d=1)
    assert not res.finite


def test_check_a4_liminf_constant():
    report = check_a4_liminf(1.0, R=2.0, T=1.0, d=1)
    assert report.passed()


def _run_free(n_particles, R, t_end, seed, stride=10, dt=1e-2):
    gen = np.random.default_rng(seed)
    init = Configuration(gen.uniform(-R, R, size=(n_particles, 1)), window_radius=R)
    scheme = SchemeParams("lower", R=R, dt=dt, t_end=t_end, record_stride=stride)
    return simulate_lower(init, FREE, scheme, seed=seed)


def test_nbj_index_frozen_case():
    pts = np.array([[0.5], [1.5], [3.0]])
    cfg = Configuration(pts, np.array([True, True, True]))
    scheme = SchemeParams("lower", R=0.1, dt=1e-2, t_end=0.05)
    rec = simulate_lower(cfg, FREE, scheme, seed=2)
    assert nbj_index(rec, r=2.0, T=1.0) == 2  # labels 1, 2 start inside r=2
    assert nbj_index(rec, r=0.6, T=1.0) == 1
    assert nbj_index(rec, r=0.1, T=1.0) == 0


def test_nbj_index_monotone_in_r_and_T():
    rec = _run_free(12, 5.0, 1.0, seed=3)
    vals_r = [nbj_index(rec, r, 1.0) for r in (0.5, 1.0, 2.0, 4.0)]
    assert vals_r == sorted(vals_r)
    vals_t = [nbj_index(rec, 2.0, T) for T in (0.1, 0.5, 1.0)]
    assert vals_t == sorted(vals_t)


def test_min_gap_two_frozen_points():
    cfg = Configuration(np.array([[1.0], [2.0]]), np.array([True, True]))
    scheme = SchemeParams("lower", R=0.5, dt=1e-2, t_end=0.05)
    rec = simulate_lower(cfg, FREE, scheme, seed=4)
    assert min_gap(rec) == pytest.approx(1.0)


def test_min_gap_origin_option():
    cfg = Configuration(np.array([[0.3], [2.0]]), np.array([True, True]))
    scheme = SchemeParams("lower", R=0.1, dt=1e-2, t_end=0.05)
    rec = simulate_lower(cfg, FREE, scheme, seed=5)
    assert min_gap(rec, include_origin=True) == pytest.approx(0.3)


def test_invariance_free_dynamics_passes():
    paths = []
    for i in range(24):
        init = sample_poisson(1.0, 6.0, 1, (91, i))
        scheme = SchemeParams("lower", R=6.0, dt=1e-2, t_end=1.0, record_stride=20)
        paths.append(simulate_lower(init, FREE, scheme, (92, i)))
    report = invariance_test(
        paths, [1.0], AnalysisWindow(radius=4.0), np.linspace(0.25, 1.75, 5),
        sample_radius=6.0,
    )
    assert report.passed(), report.to_json()


def test_invariance_wrong_init_fails():
    # uniform start under the sine drift develops short-range repulsion
    paths = []
    for i in range(24):
        gen = np.random.default_rng(1000 + i)
        init = Configuration(gen.uniform(-8, 8, size=(16, 1)), window_radius=8.0)
        scheme = SchemeParams("lower", R=8.0, dt=2e-3, t_end=0.5, record_stride=50)
        paths.append(simulate_lower(init, sine_model(2), scheme, (93, i)))
    report = invariance_test(
        paths, [0.5], AnalysisWindow(radius=5.0), np.array([0.0, 0.35, 0.7]),
        sample_radius=8.0,
    )
    assert not report.passed()
    assert not report.verdicts["paircorr@0.5"]


def test_moment4_pure_brownian_slope_and_constant():
    paths = [_run_free(8, 1e6, 2.0, seed=200 + i, stride=5) for i in range(60)]
    report = moment4_check(paths, lags=[0.05, 0.1, 0.2, 0.4])
    assert report.passed(), report.to_json()
    # Gaussian oracle in d=1: E|dX|^4 = 3 lag^2
    m = report.stats["moment4@0.2"]
    assert abs(m.value - 3 * 0.2**2) < 4 * m.se


def test_moment4_needs_three_lags():
    paths = [_run_free(1, 1e6, 0.5, seed=300 + i) for i in range(12)]
    with pytest.raises(ConfigError):
        moment4_check(paths, lags=[0.1, 0.2])


def test_scheme_distance_self_is_zero():
    paths = [_run_free(6, 4.0, 0.5, seed=400 + i) for i in range(12)]
    dist = scheme_distance(paths, paths, AnalysisWindow(radius=3.0), t=0.5)
    assert dist.wasserstein == 0.0
    assert dist.intensity_dev == 0.0
    assert dist.wasserstein_se >= 0.0


def test_scheme_distance_symmetric():
    a = [_run_free(6, 4.0, 0.5, seed=500 + i) for i in range(10)]
    b = [_run_free(6, 4.0, 0.5, seed=600 + i) for i in range(10)]
    d1 = scheme_distance(a, b, AnalysisWindow(radius=3.0), t=0.5)
    d2 = scheme_distance(b, a, AnalysisWindow(radius=3.0), t=0.5)
    assert d1.wasserstein == pytest.approx(d2.wasserstein, rel=1e-12)
    assert d1.intensity_dev == pytest.approx(d2.intensity_dev, rel=1e-12)


def test_scheme_distance_model_mismatch():
    a = [_run_free(6, 4.0, 0.5, seed=700 + i) for i in range(4)]
    init = Configuration(np.array([[0.1], [1.0], [-1.0], [2.0]]))
    scheme = SchemeParams("lower", R=4.0, dt=1e-2, t_end=0.5)
    b = [simulate_lower(init, sine_model(2), scheme, (71, i)) for i in range(4)]
    with pytest.raises(ConfigError):
        scheme_distance(a, b, AnalysisWindow(radius=3.0), t=0.5)


def test_insufficient_replicas_raise():
    paths = [_run_free(4, 4.0, 0.2, seed=800)]
    with pytest.raises(InsufficientDataError):
        invariance_test(paths, [0.2], AnalysisWindow(radius=2.0), [0.2, 0.6])
    with pytest.raises(InsufficientDataError):
        moment4_check(paths, lags=[0.05, 0.1, 0.2])


def test_report_serialisation_roundtrip():
    report = check_a4_liminf(1.0, R=2.0, T=1.0, d=1)
    text = report.to_json()
    import json

    data = json.loads(text)
    assert data["name"] == "a4-liminf"
    assert "sequence" in data["stats"]
    md = report.to_markdown()
    assert "Diagnostics" in md and "PASS" in md
