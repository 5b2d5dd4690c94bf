"""Equilibrium point-field models: kernels, intensities, pair potentials.

Four families are supported:

* ``sine_beta`` (d=1, beta in {1, 2, 4}); beta = 2 is determinantal with the
  sinc kernel, unit intensity.
* ``bessel`` (d=1 on the half line, alpha >= 1); determinantal with the
  hard-edge Bessel kernel.
* ``ginibre`` (d=2, beta = 2); determinantal with the complex Gaussian
  kernel, intensity 1/pi.
* ``ruelle_pair`` -- a (quasi-)Gibbs field for a user-supplied pair
  potential; not determinantal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from .errors import DegenerateIntensityError, InvalidParameterError, UnsupportedModelError

__all__ = [
    "PairPotential",
    "ModelSpec",
    "KernelSpec",
    "sine_model",
    "bessel_model",
    "ginibre_model",
    "ruelle_model",
    "kernel_eval",
    "pair_correlation",
    "intensity",
    "zero_potential",
    "gaussian_potential",
    "bump_potential",
    "POTENTIAL_REGISTRY",
]


@dataclass(frozen=True)
class PairPotential:
    """Symmetric pair potential with gradient and Ruelle regularity data.

    ``psi`` maps displacement vectors to energies (may return +inf at 0);
    ``grad_psi`` is its gradient away from the origin.  ``regular_bound`` is
    a decreasing radial envelope dominating ``|psi|`` beyond ``r0``; it sets
    the range at which frozen-exterior interactions may be dropped.
    ``grad_psi_batch``, when provided, evaluates the gradient on an (n, d)
    array of displacements at once (integrator hot path).
    """

    psi: Callable[[np.ndarray], float]
    grad_psi: Callable[[np.ndarray], np.ndarray]
    regular_bound: Callable[[float], float]
    r0: float = 0.0
    smoothness: str = "smooth-off-origin"
    name: str = "custom"
    grad_psi_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def tail_range(self, tol: float = 1e-10, max_range: float = 1e6) -> float:
        """Radius beyond which the regular envelope drops below ``tol``."""
        lo, hi = self.r0, max(self.r0 + 1.0, 1.0)
        while self.regular_bound(hi) > tol:
            lo, hi = hi, hi * 2.0
            if hi > max_range:
                return max_range
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self.regular_bound(mid) > tol:
                lo = mid
            else:
                hi = mid
        return hi


def zero_potential() -> PairPotential:
    """The non-interacting (ideal gas) potential."""
    return PairPotential(
        psi=lambda u: 0.0,
        grad_psi=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
        regular_bound=lambda t: 0.0,
        r0=0.0,
        smoothness="smooth",
        name="zero",
        grad_psi_batch=lambda us: np.zeros_like(np.asarray(us, dtype=float)),
    )


def gaussian_potential(amplitude: float = 1.0, width: float = 1.0) -> PairPotential:
    """Smooth repulsive core  A exp(-|u|^2 / 2w^2)."""
    a, w2 = float(amplitude), float(width) ** 2

    def psi(u):
        u = np.asarray(u, dtype=float)
        return a * math.exp(-float(u @ u) / (2 * w2))

    def grad(u):
        u = np.asarray(u, dtype=float)
        return -(a / w2) * math.exp(-float(u @ u) / (2 * w2)) * u

    def grad_batch(us):
        us = np.asarray(us, dtype=float)
        sq = np.sum(us * us, axis=1)
        return -(a / w2) * np.exp(-sq / (2 * w2))[:, None] * us

    return PairPotential(
        psi=psi,
        grad_psi=grad,
        regular_bound=lambda t: a * math.exp(-t * t / (2 * w2)),
        r0=0.0,
        smoothness="smooth",
        name="gaussian",
        grad_psi_batch=grad_batch,
    )


def bump_potential(amplitude: float = 1.0, radius: float = 1.0) -> PairPotential:
    """Compactly supported C^3 bump  A (1 - (|u|/R)^2)^4 on |u| < R."""
    a, rad = float(amplitude), float(radius)

    def psi(u):
        u = np.asarray(u, dtype=float)
        q = float(u @ u) / (rad * rad)
        return a * (1.0 - q) ** 4 if q < 1.0 else 0.0

    def grad(u):
        u = np.asarray(u, dtype=float)
        q = float(u @ u) / (rad * rad)
        if q >= 1.0:
            return np.zeros_like(u)
        return -8.0 * a * (1.0 - q) ** 3 / (rad * rad) * u

    def grad_batch(us):
        us = np.asarray(us, dtype=float)
        q = np.sum(us * us, axis=1) / (rad * rad)
        coef = np.where(q < 1.0, -8.0 * a * np.maximum(1.0 - q, 0.0) ** 3 / (rad * rad), 0.0)
        return coef[:, None] * us

    return PairPotential(
        psi=psi,
        grad_psi=grad,
        regular_bound=lambda t: a if t < rad else 0.0,
        r0=rad,
        smoothness="C3-compact",
        name="bump",
        grad_psi_batch=grad_batch,
    )


POTENTIAL_REGISTRY: dict[str, Callable[..., PairPotential]] = {
    "zero": zero_potential,
    "gaussian": gaussian_potential,
    "bump": bump_potential,
}


@dataclass(frozen=True)
class ModelSpec:
    """Which equilibrium field, plus its parameters."""

    kind: str  # sine_beta | bessel | ginibre | ruelle_pair
    beta: float = 2.0
    alpha: float = 1.0
    pair_potential: Optional[PairPotential] = None

    def __post_init__(self):
        if self.kind == "sine_beta":
            if self.beta not in (1, 2, 4):
                raise InvalidParameterError(
                    f"sine_beta supports beta in {{1, 2, 4}}, got {self.beta}"
                )
        elif self.kind == "bessel":
            if self.alpha < 1:
                raise InvalidParameterError("bessel requires alpha >= 1")
        elif self.kind == "ginibre":
            if self.beta != 2:
                raise InvalidParameterError("ginibre fixes beta = 2")
        elif self.kind == "ruelle_pair":
            if self.pair_potential is None:
                raise InvalidParameterError("ruelle_pair requires a pair potential")
        else:
            raise UnsupportedModelError(f"unknown model kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return 2 if self.kind == "ginibre" else 1

    @property
    def determinantal(self) -> bool:
        return self.kind in ("bessel", "ginibre") or (
            self.kind == "sine_beta" and self.beta == 2
        )

    def describe(self) -> dict:
        out = {"kind": self.kind, "beta": self.beta}
        if self.kind == "bessel":
            out["alpha"] = self.alpha
        if self.kind == "ruelle_pair" and self.pair_potential is not None:
            out["potential"] = self.pair_potential.name
        return out


def sine_model(beta: float = 2.0) -> ModelSpec:
    return ModelSpec(kind="sine_beta", beta=beta)


def bessel_model(alpha: float = 1.0) -> ModelSpec:
    return ModelSpec(kind="bessel", beta=2.0, alpha=alpha)


def ginibre_model() -> ModelSpec:
    return ModelSpec(kind="ginibre", beta=2.0)


def ruelle_model(potential: PairPotential, beta: float = 1.0) -> ModelSpec:
    return ModelSpec(kind="ruelle_pair", beta=beta, pair_potential=potential)


@dataclass(frozen=True)
class KernelSpec:
    """A correlation kernel; Hermitian with real nonnegative diagonal."""

    eval: Callable[[np.ndarray, np.ndarray], complex]
    name: str = "kernel"


_DIAG_EPS = 1e-9


def _sine_kernel(x: float, y: float) -> float:
    u = math.pi * (x - y)
    if abs(u) < 1e-8:
        # series of sin(u)/u around 0
        return 1.0 - u * u / 6.0
    return math.sin(u) / u


def _bessel_kernel(alpha: float, x: float, y: float) -> float:
    if x < 0 or y < 0:
        raise InvalidParameterError("bessel kernel lives on the half line")
    if abs(x - y) < _DIAG_EPS * max(1.0, abs(x), abs(y)):
        return _bessel_diag(alpha, 0.5 * (x + y))
    sx, sy = math.sqrt(x), math.sqrt(y)
    jx, jy = special.jv(alpha, sx), special.jv(alpha, sy)
    jpx, jpy = special.jvp(alpha, sx), special.jvp(alpha, sy)
    return (jx * sy * jpy - sx * jpx * jy) / (2.0 * (x - y))


def _bessel_diag(alpha: float, x: float) -> float:
    # x -> y limit of the quotient form
    if x <= 0:
        return 0.0
    u = math.sqrt(x)
    j = special.jv(alpha, u)
    jp = special.jvp(alpha, u)
    return 0.25 * (jp * jp + (1.0 - alpha * alpha / x) * j * j)


def _ginibre_kernel(x: np.ndarray, y: np.ndarray) -> complex:
    zx = complex(x[0], x[1])
    zy = complex(y[0], y[1])
    return (
        math.exp(-0.5 * (abs(zx) ** 2 + abs(zy) ** 2))
        * np.exp(zx * zy.conjugate())
        / math.pi
    )


def kernel_eval(model: ModelSpec, x, y):
    """Correlation kernel K(x, y) of a determinantal model.

    Diagonal values come from the analytic limit.  Raises for models with
    no (scalar) determinantal kernel: ruelle_pair and sine_beta with
    beta != 2.
    """
    if not model.determinantal:
        raise UnsupportedModelError(
            f"{model.kind} (beta={model.beta}) has no scalar determinantal kernel"
        )
    if model.kind == "sine_beta":
        return _sine_kernel(float(np.ravel(x)[0]), float(np.ravel(y)[0]))
    if model.kind == "bessel":
        return _bessel_kernel(model.alpha, float(np.ravel(x)[0]), float(np.ravel(y)[0]))
    xv = np.ravel(np.asarray(x, dtype=float))
    yv = np.ravel(np.asarray(y, dtype=float))
    if xv.size != 2 or yv.size != 2:
        raise InvalidParameterError("ginibre kernel takes points in R^2")
    return _ginibre_kernel(xv, yv)


def kernel_row(model: ModelSpec, x: float, ys: np.ndarray) -> np.ndarray:
    """Vectorised K(x, y_i) for a one-dimensional kernel and many y values."""
    if model.dim != 1 or not model.determinantal:
        raise UnsupportedModelError("kernel_row applies to 1-d determinantal kernels")
    ys = np.asarray(ys, dtype=float).ravel()
    if model.kind == "sine_beta":
        return np.sinc(x - ys)
    alpha = model.alpha
    near = np.abs(x - ys) < _DIAG_EPS * np.maximum(1.0, np.maximum(abs(x), np.abs(ys)))
    sx = math.sqrt(max(x, 0.0))
    jx, jpx = special.jv(alpha, sx), special.jvp(alpha, sx)
    sy = np.sqrt(np.maximum(ys, 0.0))
    jy, jpy = special.jv(alpha, sy), special.jvp(alpha, sy)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = (jx * sy * jpy - sx * jpx * jy) / (2.0 * (x - ys))
    if np.any(near):
        mids = 0.5 * (x + ys[near])
        vals[near] = [_bessel_diag(alpha, m) for m in mids]
    return vals


def intensity(model: ModelSpec, x) -> float:
    """One-point correlation function K(x, x)."""
    return float(np.real(kernel_eval(model, x, x)))


def pair_correlation(model: ModelSpec, x, y) -> float:
    """g(x, y) = 1 - |K(x,y)|^2 / (K(x,x) K(y,y)) for determinantal models."""
    kxx = intensity(model, x)
    kyy = intensity(model, y)
    if kxx <= 0.0 or kyy <= 0.0:
        raise DegenerateIntensityError("zero intensity at one of the points")
    kxy = kernel_eval(model, x, y)
    return 1.0 - (abs(kxy) ** 2) / (kxx * kyy)


def kernel_spec(model: ModelSpec) -> KernelSpec:
    return KernelSpec(eval=lambda x, y: kernel_eval(model, x, y), name=model.kind)
