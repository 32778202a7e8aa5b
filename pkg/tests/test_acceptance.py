"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np
import pytest

from tmsv_repeater.attempts import all_segments_pdf, expected_attempts, sample_attempts, solve_p_for_attempts
from tmsv_repeater.experiments import configure, run_experiment
from tmsv_repeater.experiments.definitions import optimal_theta_R, register_negativity, symmetric_optimum
from tmsv_repeater.experiments.pipeline import first_crossing
from tmsv_repeater.fock import ErrorModelParams, FockSystem, detector_response, measure_pnr, simulate_segment
from tmsv_repeater.linalg import DensityMatrix, audit_states
from tmsv_repeater.metrics import (
    TSIRELSON,
    chsh_value,
    devetak_winter_key,
    di_key_rate,
    negativity,
    tmsv_negativity,
)
from tmsv_repeater.register import RegisterScenario, TmsvParams, build_register_density
from tmsv_repeater.single_qubit import MONOTONE_THETA_LIMIT, optimized_success_probability, solve_theta_R
from tmsv_repeater.single_qubit import swapped_state_analytic
from tmsv_repeater.swap import BellOutcome, run_chain

from conftest import bell_phi_plus, random_density

CONFIGS = Path(__file__).parent / "configs"
Q = math.pi / 4


@pytest.fixture
def report(capsys):
    """Print one verdict line per criterion, outside pytest's capture."""
    lines: list[str] = []
    t0 = time.perf_counter()

    def emit(number: int, ok: bool, detail: str) -> bool:
        lines.append(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f} s) {detail}")
        return ok

    yield emit
    with capsys.disabled():
        for line in lines:
            print("\n" + line, end="")


def _lossy_closed_form(eta: float) -> np.ndarray:
    # theta_L = theta_R = pi/4, <n> = 0.5: |c0|^2 = 2/3, |c1|^2 = 2/9, c1 c0* = -2/(3 sqrt3)
    rho = np.zeros((4, 4))
    rho[0, 0] = (2 / 9) * eta / 16
    rho[1, 1] = (2 / 9) * (1 - eta) / 16
    rho[3, 3] = (2 / 3) / 16
    rho[0, 3] = rho[3, 0] = -2 / (3 * math.sqrt(3)) * math.sqrt(eta) / 16
    return rho


ETAS = (0.3, 0.5, 0.8)


def test_criterion_01_register_matches_closed_form(report):
    diff = 0.0
    for eta in ETAS:
        sc = RegisterScenario(1, Q, Q, TmsvParams(0.5), 1.0, eta)
        diff = max(diff, float(np.max(np.abs(build_register_density(sc).data - _lossy_closed_form(eta)))))
    assert report(1, diff < 1e-12, f"max |diff| {diff:.2e} over eta_R in {ETAS}")


def test_criterion_02_fock_simulator_matches_closed_form(report):
    diff = 0.0
    for eta in ETAS:
        sc = RegisterScenario(1, Q, Q, TmsvParams(0.5), 1.0, eta)
        sim = simulate_segment(sc, ErrorModelParams(), cutoff=12, tail_tol=1e-6)
        # the simulator sums all four accepted click patterns
        diff = max(diff, float(np.max(np.abs(sim.data - 4 * _lossy_closed_form(eta)))))
    assert report(2, diff < 1e-6, f"max |diff| {diff:.2e} at cutoff 12")


def test_criterion_03_quartic_solver(report):
    worst, th_max = 0.0, 0.0
    for p in (1e-4, 1e-2, 0.05):
        for eta in (0.3, 0.6, 0.9):
            th = solve_theta_R(p, eta)
            worst = max(worst, abs(optimized_success_probability(th, eta) - p))
            th_max = max(th_max, th)
    ok = worst < 1e-10 and th_max < MONOTONE_THETA_LIMIT
    assert report(3, ok, f"max residual {worst:.2e}, max theta_R {th_max:.4f} rad")


def test_criterion_04_swap_recursion(report):
    theta_R, eta = 0.25, 0.5
    seg = swapped_state_analytic(0, theta_R, eta)
    x1 = seg.data[1, 1].real / seg.data[0, 0].real
    diff, scale = 0.0, 0.0
    for s in range(1, 9):
        got = run_chain(seg, s + 1, force=BellOutcome.PHI_PLUS).rho.data
        diff = max(diff, float(np.max(np.abs(got - swapped_state_analytic(s, theta_R, eta).data))))
        scale = max(scale, abs(got[1, 1].real / got[0, 0].real / ((s + 1) * x1) - 1))
    ok = diff < 1e-12 and scale < 1e-12
    assert report(4, ok, f"max |diff| {diff:.2e}, loss-entry scaling error {scale:.2e}")


def test_criterion_05_attempt_statistics(report):
    rng = np.random.default_rng(20240601)
    trials = 10**6
    worst_z, bins = 0.0, 0
    for p, M in ((0.3, 3), (0.1, 10)):
        draws = sample_attempts(p, M, trials, rng)
        counts = np.bincount(draws)[1:]
        n = np.arange(1, counts.size + 1)
        pdf = all_segments_pdf(n, p, M)
        se = np.sqrt(trials * pdf * (1 - pdf))
        live = se > 0
        z = np.abs(counts[live] - trials * pdf[live]) / se[live]
        worst_z = max(worst_z, float(z.max()))
        bins += int(live.sum())
    rt = 0.0
    for A in (2.0, 10.0, 100.0, 1000.0, 1e5):
        for M in (1, 2, 10, 50):
            rt = max(rt, abs(expected_attempts(solve_p_for_attempts(A, M), M) / A - 1))
    ok = worst_z < 3 and rt < 1e-9
    assert report(5, ok, f"max |z| {worst_z:.2f} over {bins} bins, round-trip rel error {rt:.1e}")


def test_criterion_06_metric_anchors(report):
    phi = bell_phi_plus()
    errs = [
        abs(negativity(phi) - 0.5),
        abs(chsh_value(phi) - TSIRELSON),
        abs(di_key_rate(0.0, TSIRELSON) - 1.0),
        abs(devetak_winter_key(phi).key_bits_per_success - 1.0),
    ]
    rng = np.random.default_rng(7)
    # half of the draws are pure, which reach well past the classical bound
    worst = max(
        abs(chsh_value(DensityMatrix(random_density(rng, 4, 1 + 3 * (i % 2)), (2, 2), normalized=True)))
        for i in range(1000)
    )
    ok = max(errs) < 1e-10 and worst <= TSIRELSON + 1e-9
    assert report(6, ok, f"anchor error {max(errs):.1e}, max |S| over 1000 random states {worst:.4f}")


def test_criterion_07_headline_crossing(report):
    cfg = configure("keyrate")
    assert cfg.get("plan", "segment_km") == 10.0 and cfg.repetitions == 15
    res = run_experiment(cfg)
    found = {}
    for A in cfg.get("plan", "attempts"):
        sub = [r for r in res.rows if r[2] == A]
        c = first_crossing([r[0] for r in sub], [r[4] for r in sub], [r[7] for r in sub])
        if c is not None:
            found[A] = c
    hits = {A: c for A, c in found.items() if 100.0 <= c <= 170.0}
    detail = ", ".join(f"A={A:g} at {c:.1f} km" for A, c in found.items()) or "no crossing"
    assert report(7, bool(hits), detail)


def test_criterion_08_register_versus_tmsv(report):
    theta_L = symmetric_optimum(1, 0.5)
    vals = {}
    for eta in (0.95, 0.2):
        th = optimal_theta_R(1, theta_L, 0.5, eta)
        vals[eta] = (register_negativity(1, theta_L, th, 0.5, eta)[0], tmsv_negativity(0.5, 1.0, eta))
    ok = vals[0.95][0] < vals[0.95][1] and vals[0.2][0] > vals[0.2][1]
    detail = "; ".join(f"eta_R={e}: register {r:.4f} vs TMSV {t:.4f}" for e, (r, t) in vals.items())
    assert report(8, ok, detail)


def test_criterion_09_error_trends(report):
    cfg = configure("error-sweep")
    assert cfg.get("plan", "segment_km") == 60.0 and cfg.get("plan", "attempts") == (500.0,)
    res = run_experiment(cfg)
    mono = all(c.passed for c in res.checks if c.name.startswith("key rate non-increasing in dark")) and all(
        c.passed for c in res.checks if c.name.startswith("key rate non-increasing in coupling")
    )
    crossing = {}
    for v in (0.01, 0.05):
        sub = [r for r in res.rows if r[0] == "coupling" and r[1] == v]
        crossing[v] = first_crossing([r[3] for r in sub], [r[5] for r in sub], [r[8] for r in sub])
    ok = mono and crossing[0.01] is not None and crossing[0.05] is None
    c1 = "none" if crossing[0.01] is None else f"{crossing[0.01]:.1f} km"
    c5 = "none" if crossing[0.05] is None else f"{crossing[0.05]:.1f} km"
    assert report(9, ok, f"monotone {mono}; crossing at 1% coupling loss {c1}, at 5% {c5}")


def test_criterion_10_invariants(report):
    names = ("neg-theta", "theta-eta", "neg-eta", "keyrate", "chsh-di", "error-sweep", "opt-params")
    with audit_states() as log:
        for name in names:
            run_experiment(configure(name, CONFIGS / f"{name}.ini"), threads=1)
    bad = 0
    for rho in log:
        try:
            rho.check()
        except Exception:
            bad += 1
    sym = 0.0
    for rho in log:
        if len(rho.dims) == 2 and not rho.operator and rho.trace > 1e-12:
            n = rho.normalize()
            sym = max(sym, abs(negativity(n, 0) - negativity(n, 1)))
    povm = 0.0
    for dim in (2, 13, 26):
        for eta_d in (1.0, 0.995, 0.95):
            for dark in (0.0, 1e-5, 1e-3):
                povm = max(povm, float(np.max(np.abs(detector_response(dim, eta_d, dark).sum(axis=0) - 1))))
                # summing the conditioned states over outcomes restores the input
                rng = np.random.default_rng(dim)
                state = FockSystem(("a",), (dim,), random_density(rng, dim), False)
                err = ErrorModelParams(eta_detector=eta_d, p_dark=dark)
                total = sum(measure_pnr(state, "a", k, err).data for k in range(dim + 1))
                povm = max(povm, float(np.max(np.abs(np.diag(total) - np.diag(state.data)))))
    ok = len(log) > 0 and bad == 0 and sym < 1e-10 and povm < 1e-10
    detail = f"{len(log)} matrices audited, {bad} invalid; party asymmetry {sym:.1e}; POVM defect {povm:.1e}"
    assert report(10, ok, detail)
