import io

import numpy as np
import pytest

from ibsim import (
    Configuration,
    label_by_modulus,
    read_configuration_csv,
    restrict,
    write_configuration_csv,
)
from ibsim.errors import InvalidParameterError


def as_multiset(points):
    return sorted(map(tuple, np.atleast_2d(points).tolist()))


def test_label_orders_by_modulus():
    cfg = Configuration(np.array([[1.0], [-2.0]]))
    lab = label_by_modulus(cfg)
    assert lab.points.ravel().tolist() == [1.0, -2.0]
    assert lab.labels.tolist() == [1, 2]


def test_label_tie_broken_lexicographically():
    cfg = Configuration(np.array([[0.0, 3.0], [0.0, -3.0]]))
    lab = label_by_modulus(cfg)
    assert lab.points.tolist() == [[0.0, -3.0], [0.0, 3.0]]


def test_label_tie_break_uses_first_coordinate_first():
    cfg = Configuration(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]))
    lab = label_by_modulus(cfg)
    assert lab.points.tolist() == [[-1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]


def test_label_unlabel_roundtrip_multiset():
    rng = np.random.default_rng(7)
    for _ in range(20):
        pts = rng.normal(size=(rng.integers(0, 12), 2))
        cfg = Configuration(pts)
        lab = label_by_modulus(cfg)
        assert as_multiset(lab.unlabel().points) == as_multiset(pts)


def test_label_idempotent_order():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(15, 1))
    first = label_by_modulus(Configuration(pts))
    second = label_by_modulus(first.unlabel())
    assert np.array_equal(first.points, second.points)


def test_empty_configuration_labels_to_empty():
    lab = label_by_modulus(Configuration(np.empty((0, 1))))
    assert len(lab) == 0


def test_restrict_basic():
    cfg = Configuration(np.array([[0.5], [2.0]]))
    inner = restrict(cfg, 1.0)
    outer = restrict(cfg, 1.0, complement=True)
    assert inner.points.ravel().tolist() == [0.5]
    assert outer.points.ravel().tolist() == [2.0]


def test_restrict_partitions_randomly():
    rng = np.random.default_rng(3)
    for _ in range(25):
        pts = rng.normal(scale=3.0, size=(rng.integers(1, 30), 2))
        cfg = Configuration(pts)
        r = float(rng.uniform(0.5, 4.0))
        inner = restrict(cfg, r)
        outer = restrict(cfg, r, complement=True)
        merged = np.vstack([inner.points, outer.points]) if len(cfg) else cfg.points
        assert as_multiset(merged) == as_multiset(pts)


def test_restrict_requires_positive_radius():
    with pytest.raises(InvalidParameterError):
        restrict(Configuration(np.array([[1.0]])), 0.0)


def test_configuration_rejects_nonfinite():
    with pytest.raises(InvalidParameterError):
        Configuration(np.array([[np.nan]]))
    with pytest.raises(InvalidParameterError):
        Configuration(np.array([[np.inf, 0.0]]))


def test_configuration_window_invariant():
    # frozen points may sit outside the window, free points may not
    Configuration(np.array([[0.5], [3.0]]), np.array([False, True]), window_radius=1.0)
    with pytest.raises(InvalidParameterError):
        Configuration(np.array([[0.5], [3.0]]), np.array([False, False]), window_radius=1.0)


def test_csv_roundtrip():
    cfg = Configuration(
        np.array([[0.25, -1.5], [2.0, 0.125]]), np.array([False, True]), window_radius=3.0
    )
    buf = io.StringIO()
    write_configuration_csv(cfg, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "label,frozen,x1,x2"
    back = read_configuration_csv(io.StringIO(text), window_radius=3.0)
    assert np.array_equal(back.points, cfg.points)
    assert np.array_equal(back.frozen, cfg.frozen)


def test_csv_requires_header():
    with pytest.raises(InvalidParameterError):
        read_configuration_csv(io.StringIO("1,0,0.5\n"))
