"""Samplers for the equilibrium point fields.

* :func:`sample_ginibre` -- eigenvalues of a complex Gaussian matrix.
* :func:`sample_dpp` -- determinantal sampling on an interval via a
  quadrature (Nystrom) discretisation of the kernel, Bernoulli selection of
  eigenfunctions and sequential projection sampling with rejection; yields
  continuous point locations.
* :func:`sample_sine_beta` -- bulk eigenvalues of the Gaussian orthogonal /
  unitary / symplectic ensembles rescaled to unit intensity; the only route
  supported for beta in {1, 4} (approximate in the matrix size).
* :func:`sample_gibbs` -- Metropolis-Hastings for a pair-potential field in
  a ball conditioned on a frozen exterior.

Every sampler takes an explicit seed and is bit-reproducible given
(parameters, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import solve_triangular

from . import rng as rngmod
from .configuration import Configuration
from .errors import (
    InvalidParameterError,
    KernelDiscretizationError,
    NumericError,
    UnsupportedModelError,
)
from .models import ModelSpec, kernel_row

__all__ = [
    "sample_ginibre",
    "sample_dpp",
    "sample_sine_beta",
    "sample_poisson",
    "sample_gibbs",
    "DiscretizedKernel",
    "discretize_kernel",
    "mh_acceptance",
    "gibbs_energy",
]


# --------------------------------------------------------------------------
# Ginibre ensemble
# --------------------------------------------------------------------------

def sample_ginibre(n: int, window_radius: float, seed) -> Configuration:
    """Eigenvalues of an n x n standard complex Gaussian matrix inside a window.

    Entries have unit complex variance, so the spectrum fills the disk of
    radius ~ sqrt(n) with intensity 1/pi.  ``window_radius`` must stay in the
    bulk (<= 0.8 sqrt(n)); pass ``window_radius <= 0`` for the whole spectrum.
    """
    if n < 1:
        raise InvalidParameterError("matrix size must be >= 1")
    if window_radius > 0.8 * math.sqrt(n):
        raise InvalidParameterError(
            f"window_radius {window_radius} leaves the bulk of sqrt({n})"
        )
    gen = rngmod.generator(seed)
    mat = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / math.sqrt(2)
    try:
        eigs = np.linalg.eigvals(mat)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigvals rarely fails
        raise NumericError(f"eigensolver failed: {exc}", seed=repr(seed))
    pts = np.column_stack([eigs.real, eigs.imag])
    if window_radius > 0:
        keep = np.linalg.norm(pts, axis=1) <= window_radius
        return Configuration(pts[keep], window_radius=window_radius)
    return Configuration(pts)


# --------------------------------------------------------------------------
# Determinantal sampling on an interval (Nystrom + sequential projection)
# --------------------------------------------------------------------------

EIG_CLAMP_TOL = 1e-8


@dataclass(frozen=True)
class DiscretizedKernel:
    """Spectral data of a kernel restricted to an interval.

    Eigenpairs of the integral operator from Gauss-Legendre quadrature.
    ``funcs`` maps a kernel row K(x, nodes) to eigenfunction values at x
    (Nystrom extension); ``fine_grid`` / ``fine_phis`` tabulate the
    eigenfunctions on a refined grid for rejection envelopes.
    """

    model: ModelSpec
    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray  # clamped to [0, 1], descending
    funcs: np.ndarray  # (grid, n_eig)
    fine_grid: np.ndarray
    fine_phis: np.ndarray  # (fine, n_eig)

    def eigenfunctions_at(self, x: float) -> np.ndarray:
        return kernel_row(self.model, float(x), self.nodes) @ self.funcs

    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))


def discretize_kernel(model: ModelSpec, window, grid_size: int) -> DiscretizedKernel:
    """Gauss-Legendre discretisation of a real symmetric kernel on ``window``.

    Raises :class:`KernelDiscretizationError` when the discrete spectrum
    leaves [0, 1] by more than ``EIG_CLAMP_TOL`` (grid too coarse).
    """
    if not model.determinantal:
        raise UnsupportedModelError(f"{model.kind} is not determinantal")
    if model.dim != 1:
        raise UnsupportedModelError(
            "interval discretisation applies to one-dimensional kernels; "
            "use sample_ginibre for the planar field"
        )
    a, b = float(window[0]), float(window[1])
    if not b > a:
        raise InvalidParameterError("window must be a nondegenerate interval")
    if model.kind == "bessel" and a < 0:
        raise InvalidParameterError("bessel window must lie in [0, inf)")
    grid_size = int(grid_size)
    x, w = leggauss(grid_size)
    nodes = 0.5 * (b - a) * x + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w
    kmat = np.empty((grid_size, grid_size))
    for i in range(grid_size):
        kmat[i] = kernel_row(model, nodes[i], nodes)
    kmat = 0.5 * (kmat + kmat.T)
    sq = np.sqrt(weights)
    sym = kmat * sq[:, None] * sq[None, :]
    evals, evecs = np.linalg.eigh(sym)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    if evals.max(initial=0.0) > 1.0 + EIG_CLAMP_TOL or evals.min(initial=0.0) < -EIG_CLAMP_TOL:
        raise KernelDiscretizationError(
            f"kernel eigenvalues in [{evals.min():.3e}, {evals.max():.3e}] "
            f"leave [0,1] beyond tol {EIG_CLAMP_TOL}; refine the grid"
        )
    evals = np.clip(evals, 0.0, 1.0)
    keep = evals > 1e-12
    evals = evals[keep]
    evecs = evecs[:, keep]
    # Nystrom extension phi_k(x) = (1/lambda_k) sum_j sqrt(w_j) K(x, x_j) v_jk
    funcs = evecs * sq[:, None] / evals[None, :]
    fine_grid = np.linspace(a, b, 4 * grid_size)
    fine_rows = np.empty((len(fine_grid), grid_size))
    for i, fx in enumerate(fine_grid):
        fine_rows[i] = kernel_row(model, fx, nodes)
    fine_phis = fine_rows @ funcs
    return DiscretizedKernel(
        model, a, b, nodes, weights, evals, funcs, fine_grid, fine_phis
    )


def sample_dpp(
    model: ModelSpec,
    window,
    grid_size: int,
    seed,
    *,
    discretized: DiscretizedKernel | None = None,
    max_rejects: int = 200_000,
) -> Configuration:
    """Draw one determinantal sample on an interval window.

    The number of points is the Bernoulli draw over kernel eigenvalues, so
    its mean equals the trace of the windowed kernel.  Pass a precomputed
    ``discretized`` kernel to amortise the factorisation across replicas.
    """
    dk = discretized if discretized is not None else discretize_kernel(model, window, grid_size)
    gen = rngmod.generator(seed)
    selected = np.flatnonzero(gen.random(len(dk.eigenvalues)) < dk.eigenvalues)
    n_pts = len(selected)
    if n_pts == 0:
        return Configuration(np.empty((0, 1)))

    # envelope for the conditional intensities: the selected projection
    # diagonal dominates every Schur complement of itself
    sel_fine = dk.fine_phis[:, selected]
    envelope = 1.05 * float(np.max(np.sum(sel_fine * sel_fine, axis=1)))

    chosen: list[float] = []
    phis_at_chosen: list[np.ndarray] = []
    chol: np.ndarray | None = None  # lower Cholesky factor of the Gram matrix
    rejects = 0
    while len(chosen) < n_pts:
        x = dk.a + (dk.b - dk.a) * gen.random()
        phis = dk.eigenfunctions_at(x)[selected]
        diag = float(phis @ phis)
        if chosen:
            cross = np.array([phis @ q for q in phis_at_chosen])
            z = solve_triangular(chol, cross, lower=True)
            resid = max(diag - float(z @ z), 0.0)
        else:
            z = None
            resid = max(diag, 0.0)
        if gen.random() * envelope < resid:
            d = math.sqrt(max(resid, 1e-300))
            if chosen:
                grown = np.zeros((len(chosen) + 1, len(chosen) + 1))
                grown[:-1, :-1] = chol
                grown[-1, :-1] = z
                grown[-1, -1] = d
                chol = grown
            else:
                chol = np.array([[d]])
            phis_at_chosen.append(phis)
            chosen.append(x)
        else:
            rejects += 1
            if rejects > max_rejects:
                raise NumericError(
                    "projection sampling exceeded the rejection budget", seed=repr(seed)
                )
    pts = np.sort(np.asarray(chosen)).reshape(-1, 1)
    return Configuration(pts)


# --------------------------------------------------------------------------
# Gaussian-ensemble bulk route for sine_beta
# --------------------------------------------------------------------------

def sample_sine_beta(beta: int, n: int, window_radius: float, seed) -> Configuration:
    """Bulk eigenvalues of GOE/GUE/GSE rescaled to unit intensity.

    Approximate in ``n``: positions are rescaled by the empirical mean
    spacing over the central quarter of the spectrum, so the returned window
    has intensity ~ 1.  Supported for beta in {1, 2, 4}.
    """
    if beta not in (1, 2, 4):
        raise UnsupportedModelError("sine_beta sampling supports beta in {1, 2, 4}")
    if n < 8:
        raise InvalidParameterError("matrix size too small for a bulk window")
    gen = rngmod.generator(seed)
    if beta == 1:
        a = gen.standard_normal((n, n))
        h = (a + a.T) / math.sqrt(2)
        eigs = np.linalg.eigvalsh(h)
    elif beta == 2:
        a = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
        h = (a + a.conj().T) / 2
        eigs = np.linalg.eigvalsh(h)
    else:
        x = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
        y = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
        m = np.block([[x, y], [-y.conj(), x.conj()]])
        h = (m + m.conj().T) / 2
        eigs = np.linalg.eigvalsh(h)[::2]  # Kramers doubling
    eigs = np.sort(eigs)
    k = max(len(eigs) // 4, 4)
    mid = len(eigs) // 2
    central = eigs[mid - k // 2 : mid + k // 2]
    spacing = (central[-1] - central[0]) / (len(central) - 1)
    rescaled = (eigs - np.median(eigs)) / spacing
    if window_radius > 0:
        if window_radius > 0.25 * n:
            raise InvalidParameterError("window too wide for the bulk approximation")
        keep = np.abs(rescaled) <= window_radius
        return Configuration(rescaled[keep].reshape(-1, 1), window_radius=window_radius)
    return Configuration(rescaled.reshape(-1, 1))


# --------------------------------------------------------------------------
# Poisson reference field
# --------------------------------------------------------------------------

def sample_poisson(intensity: float, window_radius: float, dim: int, seed) -> Configuration:
    """Homogeneous Poisson field in a ball (the non-interacting reference)."""
    if intensity < 0 or window_radius <= 0:
        raise InvalidParameterError("need intensity >= 0 and window_radius > 0")
    if dim not in (1, 2):
        raise InvalidParameterError("only dimensions 1 and 2 are supported")
    gen = rngmod.generator(seed)
    vol = 2 * window_radius if dim == 1 else math.pi * window_radius**2
    n = int(gen.poisson(intensity * vol))
    pts = _uniform_ball(gen, n, window_radius, dim)
    return Configuration(pts, window_radius=window_radius)


def _uniform_ball(gen: np.random.Generator, n: int, radius: float, dim: int) -> np.ndarray:
    if dim == 1:
        return gen.uniform(-radius, radius, size=(n, 1))
    r = radius * np.sqrt(gen.random(n))
    th = gen.uniform(0, 2 * math.pi, size=n)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


# --------------------------------------------------------------------------
# Gibbs sampler with frozen exterior (pair-potential fields)
# --------------------------------------------------------------------------

def mh_acceptance(energy_old: float, energy_new: float) -> float:
    """Metropolis acceptance probability min(1, exp(-(E_new - E_old)))."""
    if not math.isfinite(energy_new):
        return 0.0
    if energy_new <= energy_old:
        return 1.0
    return math.exp(energy_old - energy_new)


def gibbs_energy(
    model: ModelSpec,
    points: np.ndarray,
    exterior: np.ndarray,
    interaction_range: float,
) -> float:
    """beta * (pair energy inside + interactions with the frozen exterior).

    Exterior terms beyond ``interaction_range`` are dropped; the pair
    potential's decreasing regular envelope makes the dropped tail summable.
    """
    pot = model.pair_potential
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    total = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            total += pot.psi(pts[i] - pts[j])
        total += _exterior_energy(pot, pts[i], exterior, interaction_range)
    return model.beta * total


def _exterior_energy(pot, pos, exterior, interaction_range) -> float:
    if not len(exterior):
        return 0.0
    diffs = pos - exterior
    dist = np.linalg.norm(diffs, axis=1)
    total = 0.0
    for d, u in zip(dist, diffs):
        if d <= interaction_range:
            total += pot.psi(u)
    return total


def _single_site_energy(model, pts, idx, pos, exterior, interaction_range) -> float:
    pot = model.pair_potential
    total = 0.0
    for j in range(len(pts)):
        if j != idx:
            total += pot.psi(pos - pts[j])
    total += _exterior_energy(pot, pos, exterior, interaction_range)
    return model.beta * total


def sample_gibbs(
    model: ModelSpec,
    region_radius: float,
    frozen_exterior: Configuration | None,
    n_particles: int,
    mcmc_steps: int,
    seed,
    *,
    proposal_scale: float | None = None,
    dim: int | None = None,
    init_retries: int = 5,
) -> Configuration:
    """Metropolis-Hastings for the conditional pair-potential density.

    Targets the canonical n-particle density in the ball of
    ``region_radius`` given the frozen exterior: single-site Gaussian
    random-walk proposals, proposals leaving the ball rejected.  Returns the
    final state with the frozen exterior attached.
    """
    if model.kind != "ruelle_pair":
        raise UnsupportedModelError("sample_gibbs applies to ruelle_pair models")
    if n_particles < 0:
        raise InvalidParameterError("n_particles must be >= 0")
    if frozen_exterior is not None and len(frozen_exterior):
        exterior = frozen_exterior.points
        d = exterior.shape[1]
        if np.linalg.norm(exterior, axis=1).min() <= region_radius:
            raise InvalidParameterError("frozen exterior must lie outside the region")
    else:
        d = dim if dim is not None else 2
        exterior = np.empty((0, d))
    pot = model.pair_potential
    interaction_range = region_radius + pot.r0 + pot.tail_range(1e-10)
    gen = rngmod.generator(seed)

    pts = None
    for _ in range(init_retries):
        cand = _uniform_ball(gen, n_particles, region_radius, d)
        if math.isfinite(gibbs_energy(model, cand, exterior, interaction_range)):
            pts = cand
            break
    if pts is None:
        raise NumericError("could not initialise at finite energy", seed=repr(seed))

    scale = proposal_scale if proposal_scale is not None else 0.25 * region_radius
    for _ in range(int(mcmc_steps)):
        if n_particles == 0:
            break
        idx = int(gen.integers(n_particles))
        prop = pts[idx] + scale * gen.standard_normal(d)
        if np.linalg.norm(prop) > region_radius:
            continue  # zero target density outside the ball
        e_old = _single_site_energy(model, pts, idx, pts[idx], exterior, interaction_range)
        e_new = _single_site_energy(model, pts, idx, prop, exterior, interaction_range)
        if gen.random() < mh_acceptance(e_old, e_new):
            pts[idx] = prop

    all_pts = np.vstack([pts, exterior]) if len(exterior) else pts
    frozen = np.concatenate(
        [np.zeros(n_particles, dtype=bool), np.ones(len(exterior), dtype=bool)]
    )
    return Configuration(all_pts, frozen, window_radius=region_radius)
