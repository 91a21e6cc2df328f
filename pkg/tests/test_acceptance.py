"""Acceptance criteria at the stated tolerances; each test prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (about a minute on a laptop).
"""

import math
import time

import numpy as np
import pytest

from nlpredprey.bounds import construct, delta_cap, kink_jumps, verify, with_delta
from nlpredprey.dispersion import ModelParams, minimal_speed, speed_objective
from nlpredprey.kernels import Kernel, mgf, mgf_by_quadrature, mgf_d1, mgf_d2
from nlpredprey.simulate import (
    SimState,
    drift_report,
    invasion_state,
    run,
    spreading_speed,
    step,
    wave_state,
)
from nlpredprey.wave import WaveProfile, in_sandwich, residual, shift_parameter, solve, tail_check

P = ModelParams(5.0, 1.0, 0.5)
K = Kernel.uniform(1.0)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def test_criterion_1_dispersion(report):
    t0 = time.perf_counter()
    rep = minimal_speed(P, K)
    elapsed = time.perf_counter() - t0
    lam = np.linspace(1e-4, 30.0, 1_000_000)
    grid_min = float(np.min(speed_objective(P, K, lam)))
    gap = abs(grid_min - rep.s_star)
    identity = abs(P.d * mgf_d1(K, rep.lambda_star) - rep.s_star)
    ok = gap <= 1e-8 and identity <= 1e-8 and elapsed < 5.0
    report(1, ok, f"s*={rep.s_star:.15g} |grid-s*|={gap:.2e} |dI'-s*|={identity:.2e} t={elapsed:.2f}s")


def test_criterion_2_supercritical_bundle(report):
    t0 = time.perf_counter()
    speed = minimal_speed(P, K)
    bundle = construct(P, K, K, 1.2 * speed.s_star, speed=speed)
    rep = verify(bundle, K, K, grid_span=50.0, grid_n=20000, kink_radius=1e-3, tol=1e-9)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and elapsed < 60.0
    report(
        2, ok,
        f"maxU1={rep.max_U1:.2e} maxU2={rep.max_U2:.2e} minL1={rep.min_L1:.2e} minL2={rep.min_L2:.2e} t={elapsed:.2f}s",
    )


def test_criterion_3_critical_bundle(report):
    t0 = time.perf_counter()
    bundle = construct(P, K, K, None)
    rep = verify(bundle, K, K, grid_span=50.0, grid_n=20000, kink_radius=1e-3, tol=1e-9)
    elapsed = time.perf_counter() - t0
    jumps = kink_jumps(bundle)
    width = bundle.z2 - bundle.z1
    ok = rep.passed and width > bundle.S and max(jumps.values()) <= 1e-12 and elapsed < 60.0
    report(
        3, ok,
        f"verify={rep.passed} z2-z1={width:.4f}>S={bundle.S} max kink jump={max(jumps.values()):.1e} t={elapsed:.2f}s",
    )


def test_criterion_4_existence(report):
    speed = minimal_speed(P, K)
    lines, ok = [], True
    for label, s, tol in (("1.2s*", 1.2 * speed.s_star, 1e-6), ("s*", None, 1e-5)):
        bundle = construct(P, K, K, s, speed=speed)
        prof = solve(P, K, K, bundle, L=80.0, n=8000, tol=tol)
        res = max(residual(prof, K, K))
        tail = tail_check(prof)
        sand = in_sandwich(prof, bundle)
        good = res < tol and sand and tail.ordering and tail.left_gap < 1e-2 and tail.right_gap < 1e-3
        if s is not None:
            wide = solve(P, K, K, bundle, L=160.0, n=16000, tol=tol)
            g2 = tail_check(wide).left_gap
            # the gap already sits at roundoff for L = 80: compare with a relative slack of 1e-6
            good = good and g2 <= tail.left_gap * (1 + 1e-6) + 1e-15
            lines.append(f"left gap L=80 {tail.left_gap:.1e} L=160 {g2:.1e}")
        ok = ok and good
        lines.append(
            f"{label}: res={res:.1e} sandwich={sand} ordering={tail.ordering} "
            f"left={tail.left_gap:.1e} right={tail.right_gap:.1e}"
        )
    report(4, ok, "; ".join(lines))


def test_criterion_5_drift(report):
    speed = minimal_speed(P, K)
    bundle = construct(P, K, K, 1.2 * speed.s_star, speed=speed)
    T, margin = 10.0, 16.0
    drifts = []
    for n, dt, tol in ((2000, 0.03, 1e-5), (4000, 0.015, 1e-6), (8000, 0.0075, 1e-7)):
        prof = solve(P, K, K, bundle, L=80.0, n=n, tol=tol)
        traj = run(P, K, K, wave_state(prof), T, dt)
        drifts.append(drift_report(prof, traj, margin).discrepancy)
    ratios = [a / b for a, b in zip(drifts[:-1], drifts[1:])]
    ok = drifts[0] < 0.02 and all(d < 0.02 for d in drifts) and all(r >= 2 for r in ratios)
    report(5, ok, "drift " + ", ".join(f"{d:.2e}" for d in drifts) + "  ratios " + ", ".join(f"{r:.2f}" for r in ratios))


def test_criterion_6_invasion_speed(report):
    s_star = minimal_speed(P, K).s_star
    levels = tuple(f * P.a_star for f in (0.1, 0.5, 0.9))
    t0 = time.perf_counter()
    traj = run(P, K, K, invasion_state(400.0, 0.05), 100.0, levels=levels, sample_every=0.5)
    elapsed = time.perf_counter() - t0
    speeds = [spreading_speed(traj.fronts[lv]) for lv in levels]
    ok = all(c >= 0.95 * s_star and abs(c - s_star) <= 0.05 * s_star for c in speeds) and elapsed < 600
    report(
        6, ok,
        "speed/s* " + ", ".join(f"{c / s_star:.4f}" for c in speeds) + f"  guard hits {traj.guard_hits} t={elapsed:.1f}s",
    )


def test_criterion_7_steady_states(report):
    x = 0.05 * np.arange(2001)
    worst_step, worst_res = 0.0, 0.0
    for U, V in ((1.0, 0.0), (P.a_star, P.a_star)):
        st = SimState(x, np.full(x.size, U), np.full(x.size, V))
        nxt = step(st, 0.02, P, K, K)
        worst_step = max(worst_step, float(np.max(np.abs(nxt.U - U))), float(np.max(np.abs(nxt.V - V))))
        z = np.linspace(-40, 40, 4001)
        prof = WaveProfile(0.8, P, z, np.full(z.size, U), np.full(z.size, V), shift_parameter(P), (0.0, 0.0), 0)
        worst_res = max(worst_res, *residual(prof, K, K))
    ok = worst_step <= 4 * np.finfo(float).eps and worst_res <= 1e-10
    report(7, ok, f"max step change {worst_step:.1e}  max residual {worst_res:.1e}")


def test_criterion_8_kernel_analytics(report):
    worst_q, worst_fd = 0.0, 0.0
    for k in (Kernel.uniform(1.0), Kernel.laplace(2.0), Kernel.gaussian(0.7)):
        # infinite abscissa: sample up to 8 kernel scales
        top = 0.9 * k.lambda_hat if math.isfinite(k.lambda_hat) else 8.0 / k.scale
        for lam in np.linspace(top / 50, top, 50):
            for order, fn in enumerate((mgf, mgf_d1, mgf_d2)):
                q = mgf_by_quadrature(k, lam, order)
                worst_q = max(worst_q, abs(fn(k, lam) - q) / max(1.0, abs(q)))
            e = 1e-3 * min(1.0, k.scale)
            f = [mgf(k, lam + j * e) for j in (-2, -1, 0, 1, 2)]
            fd1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * e)
            fd2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * e * e)
            worst_fd = max(worst_fd, abs(fd1 / mgf_d1(k, lam) - 1), abs(fd2 / mgf_d2(k, lam) - 1))
    ok = worst_q <= 1e-8 and worst_fd <= 1e-6
    report(8, ok, f"closed form vs quadrature {worst_q:.1e}  derivatives vs differences {worst_fd:.1e}")


def test_criterion_9_negative_controls(report):
    speed = minimal_speed(P, K)
    bundle = construct(P, K, K, 1.2 * speed.s_star, speed=speed)
    bad_delta = 3 * 0.5 * (1 - P.d / P.b)
    bad = verify(with_delta(bundle, bad_delta), K, K)
    extent = bad.violations["L2"]
    others = [bad.violations[key] for key in ("U1", "U2", "L1")]
    localized = extent is not None and all(v is None for v in others) and extent[1] <= bundle.z1 + 1e-2
    prof = solve(P, K, K, bundle, L=80.0, n=4000, tol=1e-6)
    traj = run(P, K, K, wave_state(prof), 10.0, 0.015)
    matched = drift_report(prof, traj, 16.0).discrepancy
    wrong = drift_report(prof, traj, 16.0, shift_factor=0.5).discrepancy
    ok = (not bad.passed) and localized and wrong >= 5 * matched
    report(
        9, ok,
        f"delta={bad_delta} (cap {delta_cap(bundle):.2e}) L2 violated on [{extent[0]:.2f}, {extent[1]:.2f}] "
        f"min={bad.min_L2:.3f}; drift matched {matched:.1e} wrong {wrong:.1e} ({wrong / matched:.0f}x)",
    )
