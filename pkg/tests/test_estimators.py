import math

import numpy as np
import pytest

from ibsim.configuration import Configuration
from ibsim.errors import InsufficientDataError, InvalidParameterError
from ibsim.estimators import AnalysisWindow, estimate_correlations
from ibsim.samplers import sample_ginibre, sample_poisson


def test_poisson_pair_correlation_is_flat():
    samples = [sample_poisson(1.5, 6.0, 1, (41, i)) for i in range(150)]
    est = estimate_correlations(
        samples, AnalysisWindow(radius=4.0), np.linspace(0.25, 2.0, 8)
    )
    assert abs(est.intensity - 1.5) < 3 * est.intensity_se
    for g, se in zip(est.g, est.g_se):
        assert abs(g - 1.0) < 3 * se


def test_ginibre_pair_correlation_light():
    samples = [sample_ginibre(200, 6.0, (43, i)) for i in range(80)]
    est = estimate_correlations(
        samples, AnalysisWindow(radius=4.5), [0.875, 1.125]
    )
    val, se = est.g_at(1.0)
    assert abs(val - (1 - math.exp(-1.0))) < 3.5 * se
    assert abs(est.intensity - 1 / math.pi) < 3.5 * est.intensity_se


def test_duplicate_replicas_have_zero_se():
    cfg = sample_poisson(2.0, 5.0, 2, seed=7)
    est = estimate_correlations(
        [cfg, cfg], AnalysisWindow(radius=3.0), np.linspace(0.2, 1.6, 5)
    )
    assert est.intensity_se == 0.0
    assert np.all(est.g_se == 0.0)
    single = estimate_correlations(
        [cfg, cfg, cfg], AnalysisWindow(radius=3.0), np.linspace(0.2, 1.6, 5)
    )
    assert np.array_equal(est.g, single.g)
    assert est.intensity == single.intensity


def test_requires_two_replicas():
    cfg = sample_poisson(2.0, 5.0, 1, seed=9)
    with pytest.raises(InsufficientDataError):
        estimate_correlations([cfg], AnalysisWindow(radius=3.0), [0.5, 1.0])


def test_edge_buffer_enforced():
    samples = [sample_poisson(1.0, 5.0, 1, (45, i)) for i in range(4)]
    with pytest.raises(InvalidParameterError):
        estimate_correlations(samples, AnalysisWindow(radius=4.5), [0.5, 1.0])


def test_interval_window_bounds():
    pts = np.linspace(0.5, 9.5, 10).reshape(-1, 1)
    cfgs = [Configuration(pts), Configuration(pts + 0.01)]
    est = estimate_correlations(
        cfgs, AnalysisWindow(bounds=(2.0, 8.0)), [0.5, 1.5]
    )
    assert est.intensity == pytest.approx(1.0, rel=0.2)
