"""Statistical and analytic checks on runs and samples.

Each check maps an almost-sure or functional-analytic property of the
infinite system to its strongest empirically decidable surrogate:

* :func:`erf_tail` / :func:`check_a4`  -- Gaussian tail integrals of the
  intensity (finiteness is the pass criterion).
* :func:`nbj_index`                    -- the largest initial label whose
  particle visits a ball before a horizon (stability across halo sizes is
  the no-big-jump surrogate).
* :func:`min_gap`                      -- collision margin monitoring.
* :func:`invariance_test`              -- windowed intensity and pair
  correlation at later checkpoints against time 0 (stationarity as the
  surrogate for reversibility).
* :func:`moment4_check`                -- log-log slope of the tagged
  fourth displacement moment against the quadratic bound.
* :func:`scheme_distance`              -- Wasserstein distance of tagged
  displacement laws plus windowed intensity deviation between two replica
  sets (the scheme-convergence metric).

Equality-type verdicts use a 3 SE band and monotonicity-type verdicts a
2 SE band by default; every statistic carries its SE and replica count, and
verdicts are deterministic functions of the raw replica data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from .configuration import Configuration
from .dynamics import PathRecord
from .errors import ConfigError, InsufficientDataError, InvalidParameterError
from .estimators import AnalysisWindow, replica_statistics

__all__ = [
    "Stat",
    "DiagnosticsReport",
    "erf_tail",
    "A4Result",
    "check_a4",
    "check_a4_liminf",
    "nbj_index",
    "min_gap",
    "invariance_test",
    "moment4_check",
    "scheme_distance",
    "SchemeDistance",
]

EQUALITY_SE_FACTOR = 3.0
MONOTONE_SE_FACTOR = 2.0


@dataclass(frozen=True)
class Stat:
    """One named statistic; ``se`` is None for deterministic quantities."""

    value: float
    se: float | None = None
    n: int = 1
    detail: dict = field(default_factory=dict)

    def jsonable(self) -> dict:
        out = {"value": self.value, "n": self.n}
        out["se"] = self.se if self.se is not None else "deterministic"
        if self.detail:
            out["detail"] = {
                k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.detail.items()
            }
        return out


@dataclass
class DiagnosticsReport:
    """Named statistics with SEs, pass/fail verdicts and provenance."""

    name: str
    stats: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def passed(self) -> bool:
        return all(self.verdicts.values())

    def jsonable(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed(),
            "stats": {k: s.jsonable() for k, s in self.stats.items()},
            "verdicts": dict(self.verdicts),
            "tolerances": dict(self.tolerances),
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.jsonable(), indent=2, sort_keys=True)

    def to_markdown(self) -> str:
        lines = [f"# Diagnostics: {self.name}", ""]
        lines.append(f"Overall: {'PASS' if self.passed() else 'FAIL'}")
        lines.append("")
        lines.append("| statistic | value | SE | n | verdict |")
        lines.append("|---|---|---|---|---|")
        for key, s in sorted(self.stats.items()):
            se = "deterministic" if s.se is None else f"{s.se:.4g}"
            verdict = ""
            if key in self.verdicts:
                verdict = "pass" if self.verdicts[key] else "FAIL"
            lines.append(f"| {key} | {s.value:.6g} | {se} | {s.n} | {verdict} |")
        if self.tolerances:
            lines.append("")
            lines.append("Tolerances:")
            for k, v in sorted(self.tolerances.items()):
                lines.append(f"- {k}: {v}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Tail integrals
# --------------------------------------------------------------------------

def erf_tail(t: float) -> float:
    """Upper tail of the standard normal: integral of the density over [t, inf)."""
    return float(special.ndtr(-t))


@dataclass(frozen=True)
class A4Result:
    value: float
    finite: bool
    shells: tuple

    def __bool__(self) -> bool:  # pass/fail shorthand
        return self.finite


def check_a4(
    intensity,
    r: float,
    T: float,
    d: int,
    *,
    support: str = "auto",
    rel_tol: float = 1e-8,
) -> A4Result:
    """Gaussian-tail intensity integral; finite value means pass.

    Integrates erf_tail((|x| - r)/T) * rho1(x) over the model space by
    adaptive quadrature on doubling shells.  The Gaussian factor vanishes
    (in double precision) beyond |x| ~ r + 40 T, so any intensity whose
    shell sums have not become Cauchy by there is declared divergent.
    ``intensity`` is a constant or a radial function of |x|; ``support`` is
    "line", "halfline" or "plane" ("auto" picks line for d=1, plane for
    d=2).
    """
    if d not in (1, 2):
        raise InvalidParameterError("d must be 1 or 2")
    if support == "auto":
        support = "line" if d == 1 else "plane"
    rho = intensity if callable(intensity) else (lambda _x, c=float(intensity): c)

    if support == "line":
        integrand = lambda u: erf_tail((u - r) / T) * rho(u) * 2.0
    elif support == "halfline":
        integrand = lambda u: erf_tail((u - r) / T) * rho(u)
    elif support == "plane":
        integrand = lambda u: erf_tail((u - r) / T) * rho(u) * 2.0 * math.pi * u
    else:
        raise InvalidParameterError(f"unknown support {support!r}")

    total = 0.0
    increments = []
    lo = 0.0
    hi = max(2.0 * (abs(r) + T), 2.0)
    u_max = abs(r) + 45.0 * T  # erf_tail underflows to exactly 0 past here
    while True:
        inc, _err = integrate.quad(integrand, lo, hi, limit=200)
        increments.append(inc)
        if not math.isfinite(inc):
            return A4Result(math.inf, False, tuple(increments))
        total += inc
        if abs(inc) <= rel_tol * max(abs(total), 1.0):
            return A4Result(total, True, tuple(increments))
        lo, hi = hi, hi * 2.0
        if lo > u_max:
            # not Cauchy anywhere the Gaussian factor is resolvable
            return A4Result(total, False, tuple(increments))


def check_a4_liminf(
    intensity_const: float, R: float, T: float, d: int, r_values=(4, 8, 16, 32, 64)
) -> DiagnosticsReport:
    """Vanishing boundary-mass sequence for constant intensity.

    Evaluates erf_tail(r / sqrt((r + R) T)) * rho * vol(r + R) along an
    increasing radius ladder; the verdict needs the sequence to be
    decreasing at the tail and small at the last radius.
    """
    vol = (lambda u: 2 * u) if d == 1 else (lambda u: math.pi * u * u)
    seq = [
        erf_tail(rv / math.sqrt((rv + R) * T)) * intensity_const * vol(rv + R)
        for rv in r_values
    ]
    decreasing = all(a >= b for a, b in zip(seq[-3:], seq[-2:]))
    small = seq[-1] < max(seq[0], 1e-12) * 1e-2 or seq[-1] < 1e-9
    report = DiagnosticsReport(name="a4-liminf")
    report.stats["sequence"] = Stat(seq[-1], None, len(seq), {"values": np.asarray(seq)})
    report.verdicts["vanishing"] = bool(decreasing and small)
    report.tolerances["vanishing"] = "tail decreasing and last value < 1e-2 of first"
    return report


# --------------------------------------------------------------------------
# Path functionals
# --------------------------------------------------------------------------

def nbj_index(path: PathRecord, r: float, T: float) -> int:
    """Largest label whose particle enters the ball of radius r by time T."""
    best = 0
    for t, labels, pts in zip(path.times, path.labels, path.points):
        if t > T:
            break
        inside = np.linalg.norm(pts, axis=1) <= r
        if np.any(inside):
            best = max(best, int(labels[inside].max()))
    return best


def min_gap(path: PathRecord, include_origin: bool = False) -> float:
    """Smallest pairwise distance over all recorded frames.

    With ``include_origin`` the distance of each particle to 0 is included
    (hard-edge models).  Returns inf for single-particle frames.
    """
    best = math.inf
    for pts in path.points:
        if len(pts) >= 2:
            diffs = pts[:, None, :] - pts[None, :, :]
            dist = np.linalg.norm(diffs, axis=2)
            dist = dist[np.triu_indices(len(pts), k=1)]
            if len(dist):
                best = min(best, float(dist.min()))
        if include_origin and len(pts):
            best = min(best, float(np.linalg.norm(pts, axis=1).min()))
    return best


# --------------------------------------------------------------------------
# Invariance (stationarity surrogate)
# --------------------------------------------------------------------------

def _frame_at(path: PathRecord, t: float) -> int:
    idx = int(np.argmin(np.abs(path.times - t)))
    return idx


def invariance_test(
    paths: list[PathRecord],
    t_checkpoints,
    window: AnalysisWindow,
    bin_edges,
    *,
    se_factor: float = EQUALITY_SE_FACTOR,
    sample_radius: float = 0.0,
) -> DiagnosticsReport:
    """Windowed intensity and pair correlation at checkpoints vs time 0.

    Differences are paired per replica; each bin must stay within
    ``se_factor`` standard errors of zero.  Requires at least 8 replicas.
    """
    if len(paths) < 8:
        raise InsufficientDataError("invariance test needs >= 8 replicas")
    edges = np.asarray(bin_edges, dtype=float)
    report = DiagnosticsReport(name="invariance")
    report.tolerances["all"] = f"|mean difference| <= {se_factor} SE per statistic"
    report.provenance["n_replicas"] = len(paths)
    report.provenance["checkpoints"] = list(map(float, t_checkpoints))

    def stats_at(t: float):
        cfgs = [p.frame_configuration(_frame_at(p, t), sample_radius) for p in paths]
        return replica_statistics(cfgs, window, edges)

    dens0, g0 = stats_at(0.0)
    report.stats["intensity@0"] = Stat(
        float(dens0.mean()), float(dens0.std(ddof=1) / math.sqrt(len(dens0))), len(dens0)
    )
    for t in t_checkpoints:
        dens_t, g_t = stats_at(float(t))
        d_diff = dens_t - dens0
        se_d = float(d_diff.std(ddof=1) / math.sqrt(len(d_diff)))
        mean_d = float(d_diff.mean())
        report.stats[f"intensity@{t:g}"] = Stat(
            float(dens_t.mean()),
            float(dens_t.std(ddof=1) / math.sqrt(len(dens_t))),
            len(dens_t),
        )
        report.stats[f"intensity-drift@{t:g}"] = Stat(mean_d, se_d, len(d_diff))
        report.verdicts[f"intensity@{t:g}"] = bool(
            abs(mean_d) <= se_factor * max(se_d, 1e-300)
        )
        g_diff = g_t - g0
        mean_g = g_diff.mean(axis=0)
        se_g = g_diff.std(axis=0, ddof=1) / math.sqrt(len(paths))
        worst = np.max(np.abs(mean_g) - se_factor * np.maximum(se_g, 1e-300))
        report.stats[f"paircorr-maxdev@{t:g}"] = Stat(
            float(np.max(np.abs(mean_g))),
            float(se_g[np.argmax(np.abs(mean_g))]),
            len(paths),
            {"per_bin_diff": mean_g, "per_bin_se": se_g},
        )
        report.verdicts[f"paircorr@{t:g}"] = bool(worst <= 0)
    return report


# --------------------------------------------------------------------------
# Moment bound (quadratic growth of the fourth displacement moment)
# --------------------------------------------------------------------------

def _tagged_labels(path: PathRecord, m: int = 1) -> np.ndarray:
    labels = path.labels[0]
    frozen = path.frozen[0]
    free = np.sort(labels[~frozen])
    if not len(free):
        raise InsufficientDataError("no moving particle to tag")
    return free[: max(1, m)]


def _tagged_index(path: PathRecord) -> int:
    return int(_tagged_labels(path, 1)[0])


def moment4_check(
    paths: list[PathRecord],
    lags,
    *,
    slope_range=(1.8, 2.2),
    n_tagged: int = 8,
) -> DiagnosticsReport:
    """Log-log regression of E|X_{t+l} - X_t|^4 on the lag l.

    Averages the fourth displacement moment over the ``n_tagged`` most
    central moving particles of each replica and over all recorded start
    times (the bound sums over the leading particles, so averaging them is
    faithful and cuts the heavy-tailed estimator noise).  The verdict is
    that the fitted slope falls in ``slope_range`` (bound exponent 2).
    """
    lags = [float(v) for v in lags]
    if len(lags) < 3:
        raise ConfigError("need at least three lags for a slope fit")
    if len(paths) < 10:
        raise InsufficientDataError("moment check needs >= 10 replicas")
    moments = []
    for lag in lags:
        vals = []
        for p in paths:
            per_particle = []
            for label in _tagged_labels(p, n_tagged):
                ts, xs = p.trajectory(int(label))
                if len(ts) < 2:
                    continue
                dt_rec = ts[1] - ts[0]
                k = int(round(lag / dt_rec))
                if k < 1 or k >= len(ts):
                    raise ConfigError(
                        f"lag {lag} not resolvable by the recording stride {dt_rec}"
                    )
                disp = xs[k:] - xs[:-k]
                per_particle.append(np.mean(np.sum(disp * disp, axis=1) ** 2))
            if per_particle:
                vals.append(float(np.mean(per_particle)))
        moments.append(np.asarray(vals))
    mean_m = np.array([v.mean() for v in moments])
    log_l = np.log(np.asarray(lags))
    log_m = np.log(mean_m)
    res = stats.linregress(log_l, log_m)
    slope, stderr = float(res.slope), float(res.stderr)
    ci = (slope - 1.96 * stderr, slope + 1.96 * stderr)
    report = DiagnosticsReport(name="moment4")
    report.stats["slope"] = Stat(slope, stderr, len(paths), {"ci": list(ci)})
    for lag, m in zip(lags, moments):
        report.stats[f"moment4@{lag:g}"] = Stat(
            float(m.mean()), float(m.std(ddof=1) / math.sqrt(len(m))), len(m)
        )
    lo, hi = slope_range
    report.verdicts["slope-in-range"] = bool(lo <= slope <= hi)
    report.tolerances["slope-in-range"] = f"fitted slope in [{lo}, {hi}]"
    report.provenance["lags"] = lags
    return report


# --------------------------------------------------------------------------
# Scheme distance (convergence metric between two replica sets)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeDistance:
    wasserstein: float
    wasserstein_se: float
    intensity_dev: float
    intensity_dev_se: float
    n_a: int
    n_b: int

    def jsonable(self) -> dict:
        return {
            "wasserstein": self.wasserstein,
            "wasserstein_se": self.wasserstein_se,
            "intensity_dev": self.intensity_dev,
            "intensity_dev_se": self.intensity_dev_se,
            "n_a": self.n_a,
            "n_b": self.n_b,
        }


def _tagged_displacements(paths: list[PathRecord], t: float) -> np.ndarray:
    out = []
    for p in paths:
        label = _tagged_index(p)
        ts, xs = p.trajectory(label)
        idx = int(np.argmin(np.abs(ts - t)))
        disp = xs[idx] - xs[0]
        out.append(disp[0] if len(disp) == 1 else float(np.linalg.norm(disp)))
    return np.asarray(out)


def _intensity_profile(paths, window: AnalysisWindow, t, bins) -> np.ndarray:
    prof = []
    for p in paths:
        pts = p.points[_frame_at(p, t)]
        if window.bounds is not None:
            lo, hi = window.bounds
        else:
            lo, hi = -window.radius, window.radius
        coords = pts[:, 0] if pts.shape[1] == 1 else np.linalg.norm(pts, axis=1)
        hist, _ = np.histogram(coords, bins=bins, range=(lo, hi))
        prof.append(hist)
    return np.asarray(prof, dtype=float)


def scheme_distance(
    paths_a: list[PathRecord],
    paths_b: list[PathRecord],
    window: AnalysisWindow,
    t: float,
    *,
    bins: int = 8,
    n_bootstrap: int = 200,
    bootstrap_seed: int = 0,
) -> SchemeDistance:
    """Distance between the laws of two replica sets at time ``t``.

    Combines the 1-Wasserstein distance between the tagged central
    particle's displacement samples with the maximal deviation of windowed
    intensity profiles; both carry bootstrap SEs (paired resampling when
    the replica counts match, e.g. for coupled runs).
    """
    if not paths_a or not paths_b:
        raise InsufficientDataError("need non-empty replica sets")
    ma = paths_a[0].meta.get("model")
    mb = paths_b[0].meta.get("model")
    if ma is not None and mb is not None and ma != mb:
        raise ConfigError(f"replica sets use different models: {ma} vs {mb}")
    disp_a = _tagged_displacements(paths_a, t)
    disp_b = _tagged_displacements(paths_b, t)
    w1 = float(stats.wasserstein_distance(disp_a, disp_b))
    prof_a = _intensity_profile(paths_a, window, t, bins)
    prof_b = _intensity_profile(paths_b, window, t, bins)
    dev = float(np.max(np.abs(prof_a.mean(axis=0) - prof_b.mean(axis=0))))

    gen = np.random.default_rng(bootstrap_seed)
    paired = len(paths_a) == len(paths_b)
    w1_bs, dev_bs = [], []
    for _ in range(n_bootstrap):
        ia = gen.integers(len(disp_a), size=len(disp_a))
        ib = ia if paired else gen.integers(len(disp_b), size=len(disp_b))
        w1_bs.append(stats.wasserstein_distance(disp_a[ia], disp_b[ib]))
        dev_bs.append(
            np.max(np.abs(prof_a[ia].mean(axis=0) - prof_b[ib].mean(axis=0)))
        )
    return SchemeDistance(
        wasserstein=w1,
        wasserstein_se=float(np.std(w1_bs, ddof=1)),
        intensity_dev=dev,
        intensity_dev_se=float(np.std(dev_bs, ddof=1)),
        n_a=len(paths_a),
        n_b=len(paths_b),
    )
