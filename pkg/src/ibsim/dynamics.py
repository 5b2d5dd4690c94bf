"""Time integrators for the finite-volume particle schemes.

Three schemes share an Euler-Maruyama core (step  x <- x + b dt + sqrt(dt) xi)
and differ in their boundary handling on the ball of radius R:

* ``lower``     -- radial-projection reflection with local-time bookkeeping;
  the frozen exterior never moves and the moving count is conserved.
* ``upper``     -- particles crossing the boundary are absorbed (death
  events) and new particles enter through a boundary shell at the
  equilibrium flux rate, thinned by a Metropolis ratio against the
  conditional interaction energy; the count varies.
* ``reference`` -- a large-domain surrogate for the infinite system: no
  reflection, particles leaving the domain freeze in place.

Particles are labelled 1..n by increasing initial modulus; labels persist
along the path, and particles born in the upper scheme extend the label
range.  Runs are bit-reproducible from (model, scheme, seed) and can be
resumed from a checkpoint without changing the realised path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from . import rng as rngmod
from .configuration import Configuration, modulus_order
from .cutoffs import CutoffParams
from .driftfields import drift_all, interaction_singular_at_origin
from .errors import CollisionError, InvalidParameterError, NumericError
from .models import ModelSpec

__all__ = [
    "SchemeParams",
    "PathRecord",
    "reflect_project",
    "simulate_lower",
    "simulate_upper",
    "simulate_reference",
    "simulate",
    "resume",
]

MAX_STEP_HALVINGS = 6
# hard cap on a single-substep displacement: ~30 noise standard deviations
# at the default step, only reachable through a drift overshoot
MAX_STEP_JUMP = 1.0


@dataclass(frozen=True)
class SchemeParams:
    """Parameters of one finite-volume run.

    ``trunc`` is the sharp truncation radius of the interaction drift
    (defaults to R).  ``cutoff`` is optional bounded-drift metadata; when
    present the run is validated against the compatibility constraint
    r + s + 1 <= R.  ``birth_shell`` bounds the entry depth of the upper
    scheme (defaults to 6 sqrt(dt)).
    """

    scheme: str
    R: float
    dt: float
    t_end: float
    trunc: Optional[float] = None
    cutoff: Optional[CutoffParams] = None
    reflect_eps: Optional[float] = None
    birth_shell: Optional[float] = None
    boundary_intensity: Optional[float] = None
    record_stride: int = 1
    variant: str = "centered"

    def __post_init__(self):
        if self.scheme not in ("lower", "upper", "reference"):
            raise InvalidParameterError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0 or self.R <= 0 or self.t_end <= 0:
            raise InvalidParameterError("R, dt and t_end must be positive")
        if self.record_stride < 1:
            raise InvalidParameterError("record_stride must be >= 1")
        if self.cutoff is not None and self.cutoff.r + self.cutoff.s + 1 > self.R:
            raise InvalidParameterError(
                "bounded-drift runs require cutoff.r + cutoff.s + 1 <= R"
            )

    @property
    def truncation(self) -> float:
        return self.trunc if self.trunc is not None else self.R

    @property
    def eps(self) -> float:
        return self.reflect_eps if self.reflect_eps is not None else self.R * 1e-6

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))

    def describe(self) -> dict:
        out = {
            "scheme": self.scheme,
            "R": self.R,
            "dt": self.dt,
            "t_end": self.t_end,
            "trunc": self.truncation,
            "reflect_eps": self.eps,
            "record_stride": self.record_stride,
            "variant": self.variant,
        }
        if self.birth_shell is not None:
            out["birth_shell"] = self.birth_shell
        if self.boundary_intensity is not None:
            out["boundary_intensity"] = self.boundary_intensity
        if self.cutoff is not None:
            out["cutoff"] = {"r": self.cutoff.r, "s": self.cutoff.s, "p": self.cutoff.p}
        return out


@dataclass
class PathRecord:
    """Recorded trajectory of one run.

    Frames hold parallel arrays (labels, points, frozen flags, cumulative
    local time).  ``events`` lists (time, kind, label) with kind in
    {birth, death, freeze}.
    """

    times: np.ndarray
    labels: list
    points: list
    frozen: list
    local_time: list
    events: list
    meta: dict = field(default_factory=dict)
    final_state: dict | None = None

    @property
    def n_frames(self) -> int:
        return len(self.times)

    @property
    def dim(self) -> int:
        return self.points[0].shape[1]

    def counts(self, free_only: bool = True) -> np.ndarray:
        if free_only:
            return np.array([int((~f).sum()) for f in self.frozen])
        return np.array([len(p) for p in self.points])

    def trajectory(self, label: int) -> tuple[np.ndarray, np.ndarray]:
        """(times, positions) of one label over the frames containing it."""
        ts, xs = [], []
        for t, lab, pts in zip(self.times, self.labels, self.points):
            hit = np.flatnonzero(lab == label)
            if len(hit):
                ts.append(t)
                xs.append(pts[hit[0]])
        return np.asarray(ts), np.asarray(xs)

    def local_time_of(self, label: int) -> np.ndarray:
        vals = []
        for lab, lt in zip(self.labels, self.local_time):
            hit = np.flatnonzero(lab == label)
            if len(hit):
                vals.append(lt[hit[0]])
        return np.asarray(vals)

    def frame_configuration(self, i: int, window_radius: float = 0.0) -> Configuration:
        return Configuration(self.points[i], self.frozen[i], window_radius)


def reflect_project(x, R: float) -> tuple[np.ndarray, float]:
    """Radial projection onto the closed ball with the pushed distance.

    Interior and boundary points are returned unchanged with increment 0;
    an exterior point x maps to x R/|x| with increment |x| - R.
    """
    if R <= 0:
        raise InvalidParameterError("R must be positive")
    xv = np.ravel(np.asarray(x, dtype=float)).copy()
    r = float(np.linalg.norm(xv))
    if r <= R:
        return xv, 0.0
    return xv * (R / r), r - R


def _reflect_all(pts: np.ndarray, R: float) -> tuple[np.ndarray, np.ndarray]:
    radii = np.linalg.norm(pts, axis=1)
    outside = radii > R
    inc = np.zeros(len(pts))
    if np.any(outside):
        inc[outside] = radii[outside] - R
        pts = pts.copy()
        pts[outside] *= (R / radii[outside])[:, None]
    return pts, inc


def _has_duplicates(pts: np.ndarray) -> bool:
    if len(pts) < 2:
        return False
    view = np.ascontiguousarray(pts).view([("", pts.dtype)] * pts.shape[1])
    return len(np.unique(view)) != len(pts)


def _restore_order_1d(current: np.ndarray, proposal: np.ndarray, movers: np.ndarray) -> None:
    """Assign sorted mover proposals to movers in their current spatial order.

    The exact 1-d dynamics with a repulsive pair singularity never lets
    particles cross, so the post-step configuration is the order statistics
    of the proposals; sorting realises the reflection at coincidence while
    keeping labels attached to ranks.  Frozen particles are untouched (a
    residual mover-frozen crossing is left for the rejection guard).
    """
    idx = np.flatnonzero(movers)
    if len(idx) < 2:
        return
    rank_order = idx[np.argsort(current[idx], kind="stable")]
    proposal[rank_order] = np.sort(proposal[idx])


def _insertion_energy(model: ModelSpec, x: np.ndarray, others: np.ndarray, trunc: float) -> float:
    """Energy cost of inserting a particle (the Boltzmann proxy for births)."""
    if model.kind == "ruelle_pair":
        pot = model.pair_potential
        total = 0.0
        if len(others):
            diffs = x[None, :] - others
            dist = np.linalg.norm(diffs, axis=1)
            for dv, u in zip(dist, diffs):
                if dv < trunc:
                    total += pot.psi(u)
        return model.beta * total
    dist = np.linalg.norm(x[None, :] - others, axis=1) if len(others) else np.empty(0)
    near = dist[dist < trunc]
    if np.any(near == 0.0):
        return math.inf
    pair = -model.beta * float(np.sum(np.log(near))) if len(near) else 0.0
    if model.kind == "bessel":
        if x[0] <= 0:
            return math.inf
        return pair - model.alpha * math.log(x[0])
    if model.kind == "ginibre":
        return pair + float(x @ x)
    return pair  # sine_beta


def _gaussian_upper_tail(w: np.ndarray) -> np.ndarray:
    return special.ndtr(-w)


def _sample_entry_depth(gen: np.random.Generator, dt: float, shell: float) -> float | None:
    """Entry depth of a boundary crossing in one step; None if none accepted.

    Density proportional to the upper-tail Gaussian probability
    P(sqrt(dt) xi > v) on [0, shell]; drawn by rejection against the uniform
    proposal (the density peaks at v = 0 with value 1/2).
    """
    sqdt = math.sqrt(dt)
    for _ in range(200):
        v = shell * gen.random()
        if gen.random() * 0.5 <= float(_gaussian_upper_tail(np.array([v / sqdt]))[0]):
            return v
    return None


def _sphere_direction(gen: np.random.Generator, dim: int) -> np.ndarray:
    if dim == 1:
        return np.array([1.0 if gen.random() < 0.5 else -1.0])
    theta = 2 * math.pi * gen.random()
    return np.array([math.cos(theta), math.sin(theta)])


class _RunState:
    """Mutable integrator state (positions, labels, accumulators)."""

    def __init__(self, points, frozen, labels, local_time, next_label, t, n_init=None):
        self.points = points
        self.frozen = frozen
        self.labels = labels
        self.local_time = local_time
        self.next_label = next_label
        self.t = t
        self.n_init = n_init if n_init is not None else len(points)

    @classmethod
    def from_init(cls, init: Configuration, scheme: SchemeParams) -> "_RunState":
        order = modulus_order(init.points)
        pts = init.points[order].copy()
        # everything outside the domain is environment, whatever the scheme
        frozen = init.frozen[order] | (np.linalg.norm(pts, axis=1) > scheme.R)
        labels = np.arange(1, len(pts) + 1)
        return cls(pts, frozen, labels, np.zeros(len(pts)), len(pts) + 1, 0.0, len(pts))

    def snapshot(self) -> dict:
        return {
            "points": self.points.copy(),
            "frozen": self.frozen.copy(),
            "labels": self.labels.copy(),
            "local_time": self.local_time.copy(),
            "next_label": self.next_label,
            "t": self.t,
            "n_init": self.n_init,
        }


def _diffuse(state, model, scheme, gen, gen_extra, dt, depth=0):
    """One Euler-Maruyama substep with reflection/absorption per scheme.

    Noise is indexed by particle label: the initial cohort always consumes
    one (n_init, d) block of the diffusion stream per substep, so runs that
    share an initial configuration and seed stay coupled across schemes and
    domain radii; particles born later draw from ``gen_extra``.  Collisions
    and domain violations reject the attempt and retry on two half steps,
    up to MAX_STEP_HALVINGS levels.
    """
    moving = ~state.frozen
    try:
        drift = drift_all(model, state.points, moving, scheme.truncation, scheme.variant)
        base = gen.standard_normal((state.n_init, state.points.shape[1]))
        noise = np.empty_like(state.points)
        original = state.labels <= state.n_init
        noise[original] = base[state.labels[original] - 1]
        n_born = int(np.count_nonzero(~original))
        if n_born:
            noise[~original] = gen_extra.standard_normal((n_born, state.points.shape[1]))
        proposal = state.points.copy()
        proposal[moving] += drift * dt + math.sqrt(dt) * noise[moving]
        singular = interaction_singular_at_origin(model)
        if singular and proposal.shape[1] == 1:
            _restore_order_1d(state.points[:, 0], proposal[:, 0], moving)
        increments = np.zeros(len(proposal))
        deaths = np.zeros(len(proposal), dtype=bool)
        if scheme.scheme == "lower":
            # the radial projection is monotone, so the restored order survives
            moved, inc = _reflect_all(proposal[moving], scheme.R)
            proposal[moving] = moved
            increments[moving] = inc
        elif scheme.scheme == "upper":
            radii = np.linalg.norm(proposal, axis=1)
            deaths = moving & (radii > scheme.R)
        # reference: leavers keep diffusing here and freeze in the run loop
        if model.kind == "bessel" and np.any(proposal[moving][:, 0] <= 0):
            raise CollisionError("bessel particle crossed the hard edge at 0")
        if singular:
            moved = np.abs(proposal[moving] - state.points[moving])
            if moved.size and moved.max() > MAX_STEP_JUMP:
                raise CollisionError("drift overshoot: single-step jump too large")
            if proposal.shape[1] == 1 and len(proposal) > 1:
                # only mover-frozen crossings can remain after the reordering
                before = np.argsort(state.points[:, 0], kind="stable")
                after = np.argsort(proposal[:, 0], kind="stable")
                if not np.array_equal(before, after):
                    raise CollisionError("particle crossed a frozen position")
            if _has_duplicates(proposal):
                raise CollisionError("diffusion step produced coincident particles")
    except CollisionError:
        if depth >= MAX_STEP_HALVINGS:
            raise
        d1 = _diffuse(state, model, scheme, gen, gen_extra, dt / 2, depth + 1)
        d2 = _diffuse(state, model, scheme, gen, gen_extra, dt / 2, depth + 1)
        return d1 | d2
    state.points = proposal
    state.local_time = state.local_time + increments
    return deaths


def _apply_deaths(state, deaths, events):
    if not np.any(deaths):
        return
    for lab in state.labels[deaths]:
        events.append((state.t, "death", int(lab)))
    keep = ~deaths
    state.points = state.points[keep]
    state.frozen = state.frozen[keep]
    state.labels = state.labels[keep]
    state.local_time = state.local_time[keep]


def _spawn_births(state, model, scheme, gen, events):
    rho = scheme.boundary_intensity
    if rho is None or rho <= 0:
        return
    dim = state.points.shape[1]
    surface = 2.0 if dim == 1 else 2 * math.pi * scheme.R
    dt = scheme.dt
    mean_entries = rho * surface * math.sqrt(dt / (2 * math.pi))
    n_births = int(gen.poisson(mean_entries))
    shell = scheme.birth_shell if scheme.birth_shell is not None else 6 * math.sqrt(dt)
    for _ in range(n_births):
        depth = _sample_entry_depth(gen, dt, shell)
        if depth is None:
            continue
        direction = _sphere_direction(gen, dim)
        pos = (scheme.R - depth) * direction
        if model.kind == "bessel" and pos[0] <= 0:
            continue
        energy = _insertion_energy(model, pos, state.points, scheme.truncation)
        if not math.isfinite(energy):
            continue
        if energy > 0 and gen.random() >= math.exp(-energy):
            continue
        state.points = np.vstack([state.points, pos[None, :]])
        state.frozen = np.append(state.frozen, False)
        state.labels = np.append(state.labels, state.next_label)
        state.local_time = np.append(state.local_time, 0.0)
        events.append((state.t, "birth", int(state.next_label)))
        state.next_label += 1


def simulate(init: Configuration, model: ModelSpec, scheme: SchemeParams, seed) -> PathRecord:
    """Run one scheme from an initial configuration; see the module docstring.

    An empty initial configuration is allowed (the upper scheme can
    repopulate an empty window through births).
    """
    state = _RunState.from_init(init, scheme)
    streams = rngmod.split(seed, 2)
    gen_diffusion = rngmod.generator(streams[0])
    gen_boundary = rngmod.generator(streams[1])
    return _run_loop(state, model, scheme, gen_diffusion, gen_boundary, seed_repr=repr(seed))


def _run_loop(state, model, scheme, gen_diffusion, gen_boundary, seed_repr, times=None,
              frames=None, events=None, start_step=0):
    if times is None:
        times, frames, events = [], [], []
        times.append(state.t)
        frames.append(state.snapshot())
    n_steps = scheme.n_steps
    for step in range(start_step, n_steps):
        try:
            deaths = _diffuse(state, model, scheme, gen_diffusion, gen_boundary, scheme.dt)
        except CollisionError as exc:
            raise NumericError(
                f"step {step} failed after {MAX_STEP_HALVINGS} halvings: {exc}",
                seed=seed_repr,
            )
        state.t = (step + 1) * scheme.dt
        if scheme.scheme == "upper":
            if len(deaths):
                _apply_deaths(state, deaths, events)
            _spawn_births(state, model, scheme, gen_boundary, events)
        elif scheme.scheme == "reference":
            # freeze any particle that strayed outside the domain
            moduli = np.linalg.norm(state.points, axis=1)
            newly = (~state.frozen) & (moduli > scheme.R)
            if np.any(newly):
                for lab in state.labels[newly]:
                    events.append((state.t, "freeze", int(lab)))
                state.frozen = state.frozen | newly
        if (step + 1) % scheme.record_stride == 0 or step + 1 == n_steps:
            times.append(state.t)
            frames.append(state.snapshot())
    record = PathRecord(
        times=np.asarray(times),
        labels=[f["labels"] for f in frames],
        points=[f["points"] for f in frames],
        frozen=[f["frozen"] for f in frames],
        local_time=[f["local_time"] for f in frames],
        events=list(events),
        meta={
            "scheme": scheme.describe(),
            "model": model.describe(),
            "seed": seed_repr,
            "steps": n_steps,
        },
        final_state={
            **{k: v for k, v in state.snapshot().items()},
            "step": n_steps,
            "rng_diffusion": rngmod.state_to_jsonable(gen_diffusion),
            "rng_boundary": rngmod.state_to_jsonable(gen_boundary),
        },
    )
    return record


def resume(record: PathRecord, model: ModelSpec, scheme: SchemeParams) -> PathRecord:
    """Continue a finished run to a longer horizon, bit-exactly.

    ``scheme`` must match the recorded run except for ``t_end``; the
    combined record equals the record of an uninterrupted run.
    """
    if record.final_state is None:
        raise InvalidParameterError("record carries no final state to resume from")
    fs = record.final_state
    done_steps = int(fs["step"])
    if scheme.n_steps <= done_steps:
        raise InvalidParameterError("resume horizon must exceed the recorded horizon")
    state = _RunState(
        fs["points"].copy(),
        fs["frozen"].copy(),
        fs["labels"].copy(),
        fs["local_time"].copy(),
        fs["next_label"],
        fs["t"],
        fs.get("n_init"),
    )
    gen_diffusion = rngmod.generator_from_state(fs["rng_diffusion"])
    gen_boundary = rngmod.generator_from_state(fs["rng_boundary"])
    times = list(record.times)
    frames = [
        {
            "points": p,
            "frozen": f,
            "labels": l,
            "local_time": lt,
        }
        for p, f, l, lt in zip(record.points, record.frozen, record.labels, record.local_time)
    ]
    events = list(record.events)
    return _run_loop(
        state,
        model,
        scheme,
        gen_diffusion,
        gen_boundary,
        seed_repr=record.meta.get("seed", "resumed"),
        times=times,
        frames=frames,
        events=events,
        start_step=done_steps,
    )


def simulate_lower(init, model, scheme: SchemeParams, seed) -> PathRecord:
    if scheme.scheme != "lower":
        raise InvalidParameterError("scheme.scheme must be 'lower'")
    return simulate(init, model, scheme, seed)


def simulate_upper(init, model, scheme: SchemeParams, seed) -> PathRecord:
    if scheme.scheme != "upper":
        raise InvalidParameterError("scheme.scheme must be 'upper'")
    if scheme.boundary_intensity is None:
        raise InvalidParameterError("upper scheme needs boundary_intensity")
    return simulate(init, model, scheme, seed)


def simulate_reference(init, model, scheme: SchemeParams, seed) -> PathRecord:
    if scheme.scheme != "reference":
        raise InvalidParameterError("scheme.scheme must be 'reference'")
    return simulate(init, model, scheme, seed)
