"""Monte Carlo estimation of intensity and pair correlation from samples.

Estimates are replica-averaged with standard errors taken across replicas.
The analysis window must sit inside the sampling window by at least the
largest pair distance requested, so no edge correction is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .configuration import Configuration
from .errors import InsufficientDataError, InvalidParameterError

__all__ = [
    "CorrelationEstimate",
    "estimate_correlations",
    "replica_statistics",
    "AnalysisWindow",
]


@dataclass(frozen=True)
class AnalysisWindow:
    """Centred analysis region: a ball (d=2) or symmetric interval (d=1)...

    ``bounds`` may instead give an explicit 1-d interval (lo, hi) for
    samples living on an interval rather than a centred ball.
    """

    radius: float = 0.0
    bounds: tuple[float, float] | None = None

    def contains(self, pts: np.ndarray) -> np.ndarray:
        if self.bounds is not None:
            x = pts[:, 0]
            return (x >= self.bounds[0]) & (x <= self.bounds[1])
        return np.linalg.norm(pts, axis=1) <= self.radius

    def volume(self, dim: int) -> float:
        if self.bounds is not None:
            return self.bounds[1] - self.bounds[0]
        return 2 * self.radius if dim == 1 else math.pi * self.radius**2


@dataclass(frozen=True)
class CorrelationEstimate:
    """Binned intensity and pair-correlation estimates with replica SEs."""

    intensity: float
    intensity_se: float
    bin_edges: np.ndarray
    g: np.ndarray
    g_se: np.ndarray
    n_replicas: int

    def g_at(self, r: float) -> tuple[float, float]:
        """(value, SE) of the bin containing distance ``r``."""
        idx = int(np.searchsorted(self.bin_edges, r, side="right") - 1)
        if idx < 0 or idx >= len(self.g):
            raise InvalidParameterError(f"distance {r} outside the binned range")
        return float(self.g[idx]), float(self.g_se[idx])


def _shell_measure(edges: np.ndarray, dim: int) -> np.ndarray:
    lo, hi = edges[:-1], edges[1:]
    if dim == 1:
        return 2.0 * (hi - lo)
    return math.pi * (hi**2 - lo**2)


def estimate_correlations(
    samples: list[Configuration],
    window: AnalysisWindow,
    bin_edges,
    *,
    sample_window: AnalysisWindow | None = None,
) -> CorrelationEstimate:
    """Replica-averaged intensity and pair correlation g(r).

    Pairs are counted with the first point in the analysis window and the
    partner anywhere in the sample, so the analysis window must keep a
    buffer of at least ``max(bin_edges)`` to the sampling window boundary
    (validated against ``sample_window`` or each sample's own window
    radius).  Needs at least two replicas for standard errors.
    """
    if len(samples) < 2:
        raise InsufficientDataError("need at least two replicas")
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise InvalidParameterError("bin_edges must be increasing with >= 2 entries")
    r_max = float(edges[-1])
    dim = next((s.dim for s in samples if len(s)), 1)

    outer_radius = None
    if sample_window is not None:
        outer_radius = sample_window.radius if sample_window.bounds is None else None
    elif samples[0].window_radius > 0:
        outer_radius = samples[0].window_radius
    if outer_radius is not None and window.bounds is None:
        if window.radius + r_max > outer_radius * (1 + 1e-12):
            raise InvalidParameterError(
                "analysis window plus the largest bin distance must fit inside "
                "the sampling window"
            )

    dens, g_reps = replica_statistics(samples, window, edges, dim)
    intensity = float(np.mean(dens))
    intensity_se = float(np.std(dens, ddof=1) / math.sqrt(len(samples)))
    if intensity <= 0:
        raise InsufficientDataError("no points fell in the analysis window")
    g = g_reps.mean(axis=0)
    g_se = g_reps.std(axis=0, ddof=1) / math.sqrt(len(samples))
    return CorrelationEstimate(intensity, intensity_se, edges, g, g_se, len(samples))


def replica_statistics(
    samples: list[Configuration],
    window: AnalysisWindow,
    edges: np.ndarray,
    dim: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-replica windowed density and pair-correlation rows.

    The pair rows are normalised by the pooled intensity, so their mean is
    the g estimate and their spread gives the replica SE.
    """
    edges = np.asarray(edges, dtype=float)
    if dim is None:
        dim = next((s.dim for s in samples if len(s)), 1)
    vol = window.volume(dim)
    counts = np.zeros(len(samples))
    pair_hists = np.zeros((len(samples), len(edges) - 1))
    for k, cfg in enumerate(samples):
        pts = cfg.points
        if not len(pts):
            continue
        inside = window.contains(pts)
        counts[k] = np.count_nonzero(inside)
        src = pts[inside]
        if not len(src):
            continue
        diffs = src[:, None, :] - pts[None, :, :]
        dist = np.linalg.norm(diffs, axis=2).ravel()
        dist = dist[dist > 0]  # drop self-pairs
        pair_hists[k] = np.histogram(dist, bins=edges)[0]

    dens = counts / vol
    pooled = float(np.mean(dens))
    shell = _shell_measure(edges, dim)
    if pooled > 0:
        g_reps = pair_hists / (vol * pooled * pooled * shell)[None, :]
    else:
        g_reps = np.zeros_like(pair_hists)
    return dens, g_reps
