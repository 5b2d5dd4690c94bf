"""Interaction drift fields and their cut-off versions.

Each equilibrium model carries a drift  b = (1/2) * (logarithmic derivative
of the field):

* sine_beta (d=1):  b(x, y) = (beta/2) sum_{0 < |x - y_i| < r} 1 / (x - y_i)
* bessel   (d=1):  b(x, y) = alpha / (2x) + sum_{|x - y_i| < r} 1 / (x - y_i)
* ginibre  (d=2):  two equivalent representations --
  ``centered``:  sum over |x - y_j| < r of (x - y_j) / |x - y_j|^2
  ``confined``:  -x + sum over |y_j| < r of (x - y_j) / |x - y_j|^2
* ruelle_pair:     b(x, y) = -(beta/2) (sum grad_psi(x - y_i) - rho_s)

The truncated sums are conditionally convergent; the truncation radius is an
explicit argument everywhere.  The smooth variants replace the sharp radius
with the ball/core cut-off profiles, and :func:`cutoff_drift` multiplies in
the spatial and occupancy cut-offs, producing a bounded continuous field.

Exact particle coincidences raise :class:`CollisionError`; integrators catch
it and retry the offending step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .configuration import Configuration
from .cutoffs import CutoffParams, ball_cutoff, core_cutoff, occupancy_cutoff, shell_caps_plus
from .errors import CollisionError, InvalidParameterError, UnsupportedModelError
from .models import ModelSpec, PairPotential

__all__ = [
    "DriftField",
    "drift_sine",
    "drift_bessel",
    "drift_ginibre",
    "drift_pair",
    "model_drift",
    "drift_all",
    "smooth_pair_drift",
    "cutoff_drift",
    "drift_residual",
]


def _as_neighbors(neighbors, dim: int) -> np.ndarray:
    if isinstance(neighbors, Configuration):
        pts = neighbors.points
    else:
        pts = np.asarray(neighbors, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
    if pts.size and pts.shape[1] != dim:
        raise InvalidParameterError(f"neighbors must have dimension {dim}")
    return pts.reshape(-1, dim)


def _check_collisions(dist: np.ndarray):
    if dist.size and np.any(dist == 0.0):
        raise CollisionError("exact particle coincidence in a pair drift sum")


def interaction_singular_at_origin(model: ModelSpec) -> bool:
    """Whether coincident particles make the drift singular.

    True for the Coulomb/log families; for pair potentials it follows the
    smoothness tag (an even potential smooth at 0 has gradient 0 there, so
    coincidences contribute nothing).
    """
    if model.kind == "ruelle_pair":
        return model.pair_potential.smoothness == "smooth-off-origin"
    return True


def drift_sine(beta: float, x, neighbors, r: float) -> np.ndarray:
    """Truncated sine_beta drift at ``x`` (d=1)."""
    pts = _as_neighbors(neighbors, 1)
    xv = float(np.ravel(x)[0])
    diff = xv - pts[:, 0]
    dist = np.abs(diff)
    _check_collisions(dist)
    sel = dist < r
    return np.array([0.5 * beta * float(np.sum(1.0 / diff[sel]))])


def drift_bessel(alpha: float, x, neighbors, r: float) -> np.ndarray:
    """Bessel drift alpha/(2x) + truncated pair sum; domain x > 0."""
    xv = float(np.ravel(x)[0])
    if xv <= 0:
        raise InvalidParameterError("bessel drift requires x > 0")
    pts = _as_neighbors(neighbors, 1)
    diff = xv - pts[:, 0]
    dist = np.abs(diff)
    _check_collisions(dist)
    sel = dist < r
    return np.array([alpha / (2 * xv) + float(np.sum(1.0 / diff[sel]))])


def drift_ginibre(x, neighbors, r: float, variant: str = "centered") -> np.ndarray:
    """Planar Coulomb drift in either of its two representations (d=2).

    ``centered`` truncates pairs at |x - y_j| < r; ``confined`` adds the -x
    confinement and truncates at |y_j| < r instead.
    """
    xv = np.ravel(np.asarray(x, dtype=float))
    if xv.size != 2:
        raise InvalidParameterError("ginibre drift takes points in R^2")
    pts = _as_neighbors(neighbors, 2)
    diff = xv[None, :] - pts
    dist = np.linalg.norm(diff, axis=1)
    _check_collisions(dist)
    if variant == "centered":
        sel = dist < r
    elif variant == "confined":
        sel = np.linalg.norm(pts, axis=1) < r
    else:
        raise InvalidParameterError("variant must be 'centered' or 'confined'")
    contrib = diff[sel] / (dist[sel] ** 2)[:, None]
    total = contrib.sum(axis=0) if len(contrib) else np.zeros(2)
    if variant == "confined":
        total = total - xv
    return total


def drift_pair(
    potential: PairPotential,
    beta: float,
    x,
    neighbors,
    s: float,
    p: float,
    rho_s: float = 0.0,
) -> np.ndarray:
    """Smoothly truncated pair-potential drift -(beta/2)(sum w grad_psi - rho_s).

    The weight w(u) = ball_cutoff(s, u) * core_cutoff(p, u) vanishes for
    |u| <= 1/p, so the origin singularity of the potential is never touched.
    """
    xv = np.ravel(np.asarray(x, dtype=float))
    dim = xv.size
    pts = _as_neighbors(neighbors, dim)
    total = np.zeros(dim)
    if len(pts):
        diff = xv[None, :] - pts
        dist = np.linalg.norm(diff, axis=1)
        weights = np.where(
            dist >= s,
            0.0,
            np.asarray(ball_cutoff(s, diff)) * np.asarray(core_cutoff(p, diff)),
        )
        for w, u in zip(weights, diff):
            if w > 0.0:
                total += w * np.asarray(potential.grad_psi(u), dtype=float)
    return -0.5 * beta * (total - rho_s)


def model_drift(model: ModelSpec, x, neighbors, r: float, variant: str = "centered") -> np.ndarray:
    """The model's sharply truncated drift at one point."""
    if model.kind == "sine_beta":
        return drift_sine(model.beta, x, neighbors, r)
    if model.kind == "bessel":
        return drift_bessel(model.alpha, x, neighbors, r)
    if model.kind == "ginibre":
        return drift_ginibre(x, neighbors, r, variant)
    if model.kind == "ruelle_pair":
        xv = np.ravel(np.asarray(x, dtype=float))
        pts = _as_neighbors(neighbors, xv.size)
        total = np.zeros(xv.size)
        if len(pts):
            diff = xv[None, :] - pts
            dist = np.linalg.norm(diff, axis=1)
            _check_collisions(dist)
            for d, u in zip(dist, diff):
                if d < r:
                    total += np.asarray(model.pair_potential.grad_psi(u), dtype=float)
        return -0.5 * model.beta * total
    raise UnsupportedModelError(model.kind)


def drift_all(
    model: ModelSpec,
    points: np.ndarray,
    moving: np.ndarray,
    r: float,
    variant: str = "centered",
) -> np.ndarray:
    """Vectorised drift for every moving particle against the full set.

    ``points`` is the (n, d) array of all particles (moving and frozen);
    ``moving`` is a boolean mask or index array of the targets.  Exactly one
    zero distance (the self pair) is allowed per target.
    """
    pts = np.asarray(points, dtype=float)
    idx = np.flatnonzero(moving) if np.asarray(moving).dtype == bool else np.asarray(moving)
    m = len(idx)
    d = pts.shape[1]
    if m == 0:
        return np.zeros((0, d))
    if model.kind == "ruelle_pair" and model.pair_potential.name == "zero":
        return np.zeros((m, d))
    targets = pts[idx]
    diff = targets[:, None, :] - pts[None, :, :]  # (m, n, d)
    dist = np.linalg.norm(diff, axis=2)
    zero_rows = dist == 0.0
    if int(zero_rows.sum()) != m and interaction_singular_at_origin(model):
        raise CollisionError("coincident particles in the configuration")

    if model.kind == "ruelle_pair":
        pot = model.pair_potential
        sel = (dist < r) & ~zero_rows
        rows, cols = np.nonzero(sel)
        out = np.zeros((m, d))
        if len(rows):
            us = diff[rows, cols]
            if pot.grad_psi_batch is not None:
                grads = np.asarray(pot.grad_psi_batch(us), dtype=float)
            else:
                grads = np.asarray([pot.grad_psi(u) for u in us], dtype=float)
            np.add.at(out, rows, grads)
        return -0.5 * model.beta * out

    with np.errstate(divide="ignore", invalid="ignore"):
        inv_sq = 1.0 / (dist * dist)
    inv_sq[zero_rows] = 0.0

    if model.kind == "sine_beta":
        sel = (dist < r) & ~zero_rows
        vals = np.where(sel, diff[:, :, 0] * inv_sq, 0.0)
        return (0.5 * model.beta * vals.sum(axis=1)).reshape(-1, 1)
    if model.kind == "bessel":
        x = targets[:, 0]
        if np.any(x <= 0):
            raise InvalidParameterError("bessel drift requires positive positions")
        sel = (dist < r) & ~zero_rows
        vals = np.where(sel, diff[:, :, 0] * inv_sq, 0.0)
        return (model.alpha / (2 * x) + vals.sum(axis=1)).reshape(-1, 1)
    if model.kind == "ginibre":
        if variant == "centered":
            sel = (dist < r) & ~zero_rows
        else:
            sel = (np.linalg.norm(pts, axis=1)[None, :] < r) & ~zero_rows
        weights = np.where(sel, inv_sq, 0.0)
        out = np.einsum("mn,mnd->md", weights, diff)
        if variant == "confined":
            out = out - targets
        return out
    raise UnsupportedModelError(model.kind)


def smooth_pair_drift(
    model: ModelSpec,
    x,
    neighbors,
    s: float,
    p: float,
    rho_s: float = 0.0,
    variant: str = "centered",
) -> np.ndarray:
    """The model drift with the sharp radius replaced by smooth cut-offs.

    Pair terms carry the weight ball_cutoff(s, u) * core_cutoff(p, u); the
    one-body terms (bessel confinement, ginibre ``confined`` -x) keep their
    origin regularisation through core_cutoff where needed.
    """
    xv = np.ravel(np.asarray(x, dtype=float))
    dim = xv.size
    pts = _as_neighbors(neighbors, dim)

    def weighted_coulomb() -> np.ndarray:
        if not len(pts):
            return np.zeros(dim)
        diff = xv[None, :] - pts
        dist = np.linalg.norm(diff, axis=1)
        if variant == "confined" and model.kind == "ginibre":
            w = np.asarray(ball_cutoff(s, pts)) * np.asarray(core_cutoff(p, diff))
        else:
            w = np.asarray(ball_cutoff(s, diff)) * np.asarray(core_cutoff(p, diff))
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_sq = np.where(dist > 0, 1.0 / (dist * dist), 0.0)
        return ((w * inv_sq)[:, None] * diff).sum(axis=0)

    if model.kind == "sine_beta":
        return 0.5 * model.beta * weighted_coulomb() - 0.5 * model.beta * rho_s
    if model.kind == "bessel":
        xpos = xv[0]
        confinement = 0.0
        if xpos > 0:
            confinement = core_cutoff(p, xv) * model.alpha / (2 * xpos)
        return np.asarray([confinement]) + weighted_coulomb() - rho_s
    if model.kind == "ginibre":
        out = weighted_coulomb()
        if variant == "confined":
            out = out - xv
        return out - rho_s
    if model.kind == "ruelle_pair":
        return drift_pair(model.pair_potential, model.beta, xv, pts, s, p, rho_s)
    raise UnsupportedModelError(model.kind)


@dataclass(frozen=True)
class DriftField:
    """A model drift bundled with its cut-off parameters."""

    model: ModelSpec
    cutoff: CutoffParams
    variant: str = "centered"

    def full(self, x, neighbors) -> np.ndarray:
        return smooth_pair_drift(
            self.model, x, neighbors, self.cutoff.s, self.cutoff.p, self.cutoff.rho_s, self.variant
        )

    def bounded(self, x, neighbors) -> np.ndarray:
        return cutoff_drift(self.cutoff, self.model, x, neighbors, self.variant)


def cutoff_drift(
    params: CutoffParams,
    model: ModelSpec,
    x,
    config,
    variant: str = "centered",
) -> np.ndarray:
    """Bounded continuous drift: spatial and occupancy cut-offs times b_{s,p}.

    ``config`` is the neighbour configuration (the tagged point excluded).
    The spatial factor vanishes for |x| >= r and the occupancy factor
    vanishes off the relaxed shell-cap class, so the product is globally
    bounded.
    """
    if params.shell_caps is None:
        raise InvalidParameterError("cutoff_drift needs shell_caps in CutoffParams")
    xv = np.ravel(np.asarray(x, dtype=float))
    spatial = ball_cutoff(params.r, xv)
    if spatial == 0.0:
        return np.zeros(xv.size)
    occupancy = occupancy_cutoff(
        config if not isinstance(config, Configuration) else config.points,
        shell_caps_plus(params.shell_caps),
    )
    if occupancy == 0.0:
        return np.zeros(xv.size)
    core = smooth_pair_drift(model, xv, config, params.s, params.p, params.rho_s, variant)
    return spatial * occupancy * core


def drift_residual(
    model: ModelSpec,
    params: CutoffParams,
    params_big: CutoffParams,
    samples: list[Configuration],
    window_radius: float,
    variant: str = "centered",
) -> tuple[float, float]:
    """Monte Carlo distance between a cut-off drift and a larger-cut-off one.

    For each sample, sums |b_small(x_i, rest) - b_big(x_i, rest)| over the
    points x_i inside the window; returns the replica mean and its standard
    error.  Zero when the two parameter sets coincide.
    """
    if len(samples) < 2:
        from .errors import InsufficientDataError

        raise InsufficientDataError("need at least two samples")
    vals = []
    for cfg in samples:
        pts = cfg.points
        moduli = np.linalg.norm(pts, axis=1)
        total = 0.0
        for i in np.flatnonzero(moduli <= window_radius):
            rest = np.delete(pts, i, axis=0)
            small = cutoff_drift(params, model, pts[i], rest, variant)
            big = cutoff_drift(params_big, model, pts[i], rest, variant)
            total += float(np.linalg.norm(small - big))
        vals.append(total)
    arr = np.asarray(vals)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))
