"""The seven experiments: schemas, sweep kernels and built-in checks.

Each experiment maps a resolved :class:`ExperimentConfig` to an
:class:`ExperimentResult`.  Sweep points are independent tasks run through
:func:`parallel_map`; randomness comes only from :func:`point_rng`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from ..attempts import RepeaterPlan, rate_factor
from ..fock import ErrorModelParams, simulate_segment
from ..linalg import DensityMatrix
from ..metrics import negativity, schmidt_negativity, tmsv_negativity
from ..register import RegisterScenario, TmsvParams, build_register_density, lossless_state
from ..single_qubit import optimal_mean_n
from .config import (
    RUN_SECTION,
    ConfigError,
    ExperimentConfig,
    Field,
    Schema,
    choice,
    int_list,
    nonnegative_int,
    positive_int,
    real,
    real_list,
)
from .output import Check, ExperimentResult, PlotSpec, is_nondecreasing, is_nonincreasing
from .pipeline import (
    ChainSummary,
    chain_summary,
    design_segment,
    first_crossing,
    first_zero,
    level_crossing,
    plob_at,
)
from .runner import parallel_map, point_rng

HALF_PI = math.pi / 2
THETA_XTOL = 1e-6
EXACT_MAX_SEGMENTS = 12
NAN = float("nan")


class NumericalError(ArithmeticError):
    """An optimizer failed to converge or a bracket could not be found."""


# ---------------------------------------------------------------- registers


def register_negativity(N: int, theta_L: float, theta_R: float, mean_n: float, eta_R: float) -> tuple[float, float]:
    """(negativity, success probability) of the register pair, lossless left channel."""
    rho = build_register_density(RegisterScenario(N, theta_L, theta_R, TmsvParams(mean_n), 1.0, eta_R))
    tr = rho.trace
    normed = DensityMatrix(rho.data / tr, rho.dims, normalized=True)
    return negativity(normed), 4.0**N * tr


def golden_peak(f: Callable[[float], float], lo: float, hi: float, grid: int = 64) -> float:
    """Interior maximiser of a unimodal ``f`` on ``[lo, hi]``.

    A coarse grid locates a bracket; golden-section search refines it to
    ``THETA_XTOL``.
    """
    xs = np.linspace(lo, hi, grid)
    vals = np.array([f(x) for x in xs])
    k = int(np.argmax(vals))
    if k == 0 or k == grid - 1:
        raise NumericalError(f"maximum on the boundary of [{lo}, {hi}]")
    res = minimize_scalar(lambda x: -f(x), bracket=(xs[k - 1], xs[k], xs[k + 1]), method="golden", tol=1e-9)
    if not res.success or not xs[k - 1] <= res.x <= xs[k + 1]:
        raise NumericalError(f"golden-section search failed: {res.message}")
    return float(res.x)


def symmetric_optimum(N: int, mean_n: float) -> float:
    """Angle maximising the lossless negativity with ``theta_L = theta_R``."""
    return golden_peak(lambda th: register_negativity(N, th, th, mean_n, 1.0)[0], 1e-3, HALF_PI - 1e-3)


def optimal_theta_R(N: int, theta_L: float, mean_n: float, eta_R: float) -> float:
    """Right angle maximising the negativity at fixed left angle."""
    return golden_peak(lambda th: register_negativity(N, theta_L, th, mean_n, eta_R)[0], 1e-4, HALF_PI - 1e-4)


def _eta_grid(cfg: ExperimentConfig) -> np.ndarray:
    lo, hi, n = cfg.get("sweep", "eta_start"), cfg.get("sweep", "eta_stop"), cfg.get("sweep", "steps")
    if not 0.0 < lo < hi <= 1.0:
        raise ConfigError("need 0 < eta_start < eta_stop <= 1")
    return np.linspace(lo, hi, n)


def _unimodal(values: list[float], tol: float = 1e-13) -> bool:
    k = int(np.argmax(values))
    if k == 0 or k == len(values) - 1:
        return False
    return is_nondecreasing(values[: k + 1], tol) and is_nonincreasing(values[k:], tol)


REGISTER_SECTION: Mapping[str, Field] = {
    "qubits": Field(int_list, (1, 2, 3, 4), "qubits per register"),
    "mean_n": Field(real, 0.5, "mean photon number of the source"),
}
ETA_SWEEP: Mapping[str, Field] = {
    "eta_start": Field(real, 0.05, "first right-channel transmission"),
    "eta_stop": Field(real, 1.0, "last right-channel transmission"),
    "steps": Field(positive_int, 20, "grid points"),
}


def _neg_theta_point(N: int, theta: float, mean_n: float) -> tuple[float, float]:
    return register_negativity(N, theta, theta, mean_n, 1.0)


def run_neg_theta(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    mean_n = cfg.get("register", "mean_n")
    qubits = cfg.get("register", "qubits")
    thetas = np.linspace(0.0, HALF_PI, cfg.get("sweep", "steps"))
    tasks = [(N, float(th), mean_n) for N in qubits for th in thetas]
    vals = parallel_map(_neg_theta_point, tasks, threads)
    rows = [(N, th, neg, prob) for (N, th, _), (neg, prob) in zip(tasks, vals)]
    res = ExperimentResult(("N", "theta", "negativity", "success_prob"), rows)
    res.plot = PlotSpec("theta", ("negativity",), group="N", xlabel="theta (rad)")
    for N in qubits:
        negs = [r[2] for r in rows if r[0] == N]
        peak = symmetric_optimum(N, mean_n)
        peak_neg = register_negativity(N, peak, peak, mean_n, 1.0)[0]
        res.summary.append(f"N={N}: peak negativity {peak_neg:.10f} at theta={peak:.8f} rad")
        res.checks.append(Check(f"unique interior maximum N={N}", _unimodal(negs)))
        ends = max(abs(negs[0]), abs(negs[-1]))
        res.checks.append(Check(f"separable endpoints N={N}", ends < 1e-12, f"max endpoint negativity {ends:.2e}"))
        if N == 1:
            dense = np.linspace(0.0, HALF_PI, 20001)[1:-1]
            oracle = max(
                schmidt_negativity(lossless_state(RegisterScenario(1, t, t, TmsvParams(mean_n)))) for t in dense
            )
            diff = abs(oracle - peak_neg)
            res.checks.append(Check("N=1 peak matches pure-state oracle", diff < 1e-6, f"|diff|={diff:.2e}"))
    return res


def _theta_eta_point(N: int, theta_L: float, mean_n: float, eta: float) -> tuple[float, float, float]:
    th = optimal_theta_R(N, theta_L, mean_n, eta)
    neg, prob = register_negativity(N, theta_L, th, mean_n, eta)
    return th, neg, prob


def _theta_eta_table(cfg: ExperimentConfig, threads: int) -> tuple[list[tuple], dict[int, float]]:
    mean_n = cfg.get("register", "mean_n")
    qubits = cfg.get("register", "qubits")
    etas = _eta_grid(cfg)
    sym = {N: symmetric_optimum(N, mean_n) for N in qubits}
    tasks = [(N, sym[N], mean_n, float(eta)) for N in qubits for eta in etas]
    vals = parallel_map(_theta_eta_point, tasks, threads)
    rows = [(N, eta, th, neg, prob) for (N, _, _, eta), (th, neg, prob) in zip(tasks, vals)]
    return rows, sym


def run_theta_eta(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    mean_n = cfg.get("register", "mean_n")
    qubits = cfg.get("register", "qubits")
    rows, sym = _theta_eta_table(cfg, threads)
    res = ExperimentResult(("N", "eta_R", "theta_R_opt", "success_prob"), [(N, e, t, p) for N, e, t, _, p in rows])
    res.plot = PlotSpec("eta_R", ("theta_R_opt",), group="N", xlabel="eta_R", ylabel="theta_R (rad)")
    for N in qubits:
        ths = [r[2] for r in rows if r[0] == N]
        at_one = _theta_eta_point(N, sym[N], mean_n, 1.0)[0]
        d = abs(at_one - sym[N])
        res.checks.append(Check(f"theta_R(eta=1) is the symmetric optimum N={N}", d < 1e-5, f"|diff|={d:.2e} rad"))
        res.checks.append(Check(f"theta_R_opt increases with eta N={N}", is_nondecreasing(ths, 1e-6)))
        res.summary.append(f"N={N}: symmetric optimum {sym[N]:.8f} rad")
    etas = sorted({r[1] for r in rows})
    by_eta = all(
        is_nonincreasing([r[4] for N in sorted(qubits) for r in rows if r[0] == N and r[1] == e]) for e in etas
    )
    res.checks.append(Check("success probability decreases with qubit count", by_eta))
    if 1 in qubits and 2 in qubits:
        p1 = _theta_eta_point(1, sym[1], mean_n, 0.5)[2]
        p2 = _theta_eta_point(2, sym[2], mean_n, 0.5)[2]
        res.checks.append(Check("P(N=2) < P(N=1) at eta_R=0.5", p2 < p1, f"{p2:.6g} vs {p1:.6g}"))
    return res


def run_neg_eta(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    mean_n = cfg.get("register", "mean_n")
    qubits = cfg.get("register", "qubits")
    rows, sym = _theta_eta_table(cfg, threads)
    out = [(N, e, t, neg, tmsv_negativity(mean_n, 1.0, e)) for N, e, t, neg, _ in rows]
    res = ExperimentResult(("N", "eta_R", "theta_R_opt", "register_negativity", "tmsv_negativity"), out)
    res.plot = PlotSpec("eta_R", ("register_negativity", "tmsv_negativity"), group="N", xlabel="eta_R")
    for N in qubits:
        pts = [(e, rn - tn) for n, e, _, rn, tn in out if n == N]
        signs = [d > 0 for _, d in pts]
        changes = sum(a != b for a, b in zip(signs, signs[1:]))
        cross = None
        for (e0, d0), (e1, d1) in zip(pts, pts[1:]):
            if d0 > 0 >= d1:
                cross = e0 + (e1 - e0) * d0 / (d0 - d1)
                break
        desc = "none" if cross is None else f"{cross:.4f}"
        res.summary.append(f"N={N}: register falls below the TMSV at eta_R ~ {desc}")
        if N in (1, 2):
            ok = changes == 1 and signs[0] and not signs[-1]
            res.checks.append(Check(f"single crossing, register above TMSV at low eta N={N}", ok, f"eta_R ~ {desc}"))
    return res


# ---------------------------------------------------------------- repeater


PLAN_FIELDS: Mapping[str, Field] = {
    "segment_km": Field(real, 10.0, "length of one repeater segment"),
    "loss_db_per_km": Field(real, 0.2, "fibre attenuation"),
    "attempts": Field(real_list, (10.0, 50.0, 100.0, 500.0), "allowed attempts A"),
    "max_segments": Field(positive_int, 25, "longest chain"),
}


def _plan_section(**overrides) -> dict[str, Field]:
    out = dict(PLAN_FIELDS)
    for k, v in overrides.items():
        out[k] = Field(out[k].parse, v, out[k].doc)
    return out


def _check_plan(cfg: ExperimentConfig) -> None:
    if not cfg.get("plan", "segment_km") > 0:
        raise ConfigError("segment_km must be > 0")
    if cfg.get("plan", "loss_db_per_km") < 0:
        raise ConfigError("loss_db_per_km must be >= 0")
    if any(not a > 1 for a in cfg.get("plan", "attempts")):
        raise ConfigError("every attempts value must exceed 1")
    if cfg.get("run", "averaging") == "exact" and cfg.get("plan", "max_segments") > EXACT_MAX_SEGMENTS:
        raise ConfigError(f"exact averaging supports at most {EXACT_MAX_SEGMENTS} segments")


@dataclass(frozen=True)
class ChainPoint:
    A: float
    M: int
    distance_km: float
    p: float
    summary: ChainSummary | None
    theta_R: float = NAN
    theta_L: float = NAN
    mean_n: float = NAN

    @property
    def keyrate(self) -> tuple[float, float]:
        return (0.0, 0.0) if self.summary is None else self.summary.keyrate


def chain_point(
    A: float, M: int, segment_km: float, loss: float, averaging: str, reps: int, seed: int, index: tuple[int, ...]
) -> ChainPoint:
    """Design the segment for budget ``A`` and average ``M``-segment chains."""
    sd = design_segment(RepeaterPlan(M, segment_km, loss, A))
    dist = M * segment_km
    if sd.design is None:
        return ChainPoint(A, M, dist, sd.p, None)
    d = sd.design
    s = chain_summary(d.density(), M, sd.p, averaging, reps, point_rng(seed, *index))
    return ChainPoint(A, M, dist, sd.p, s, d.theta_R, d.theta_L, d.mean_n)


def _plan_args(cfg: ExperimentConfig) -> tuple[float, float, str, int, int]:
    return (
        cfg.get("plan", "segment_km"),
        cfg.get("plan", "loss_db_per_km"),
        cfg.get("run", "averaging"),
        cfg.repetitions,
        cfg.seed,
    )


def run_keyrate(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    _check_plan(cfg)
    seg_km, loss, averaging, reps, seed = _plan_args(cfg)
    attempts = cfg.get("plan", "attempts")
    Ms = range(1, cfg.get("plan", "max_segments") + 1)
    tasks = [(A, M, seg_km, loss, averaging, reps, seed, (ai, M)) for ai, A in enumerate(attempts) for M in Ms]
    pts: list[ChainPoint] = parallel_map(chain_point, tasks, threads)
    rows = []
    for pt in pts:
        s = pt.summary
        kr, kr_se = pt.keyrate
        key = 0.0 if s is None else s.key[0]
        rows.append((pt.distance_km, pt.M, pt.A, pt.p, kr, kr_se, key, plob_at(pt.distance_km, loss), s is not None))
    res = ExperimentResult(
        ("distance_km", "segments", "A", "p", "mean_keyrate", "keyrate_stderr", "key_per_success", "plob", "attainable"),
        rows,
    )
    res.plot = PlotSpec("distance_km", ("mean_keyrate",), group="A", logy=True, ylabel="key bits per attempt")
    best: tuple[float, float] | None = None
    for A in attempts:
        sub = [r for r in rows if r[2] == A]
        cross = first_crossing([r[0] for r in sub], [r[4] for r in sub], [r[7] for r in sub])
        res.summary.append(f"A={A:g}: crosses the repeaterless bound at {'none' if cross is None else f'{cross:.3f} km'}")
        if cross is not None and (best is None or cross < best[1]):
            best = (A, cross)
        live = [r for r in sub[1:] if r[8] or r[4] == 0.0]
        mono = all(b[4] <= a[4] + 3.0 * math.hypot(a[5], b[5]) for a, b in zip(live, live[1:]))
        res.checks.append(Check(f"key rate non-increasing beyond one segment A={A:g}", mono))
        first = [pt for pt in pts if pt.A == A and pt.M == 1][0]
        if first.summary is not None:
            expect = first.summary.key[0] * rate_factor(first.p, 1)
            d = abs(expect - sub[0][4])
            res.checks.append(Check(f"one segment equals normalized segment key A={A:g}", d < 1e-15, f"|diff|={d:.1e}"))
    ok = best is not None and 100.0 <= best[1] <= 170.0
    detail = "no crossing" if best is None else f"A={best[0]:g} at {best[1]:.3f} km"
    res.checks.append(Check("crossing of the repeaterless bound within 100-170 km", ok, detail))
    return res


def _chsh_series(
    A: float, ai: int, seg_km: float, loss: float, averaging: str, reps: int, seed: int, max_segments: int
) -> list[ChainPoint]:
    """Grow the chain until CHSH, DW and DI have all failed (or the budget runs out)."""
    out = []
    for M in range(1, max_segments + 1):
        pt = chain_point(A, M, seg_km, loss, averaging, reps, seed, (ai, M))
        out.append(pt)
        s = pt.summary
        if s is None or (s.chsh[0] <= 2.0 and s.key_margin[0] <= 0.0 and s.di[0] <= 0.0):
            break
    return out


def run_chsh_di(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    _check_plan(cfg)
    seg_km, loss, averaging, reps, seed = _plan_args(cfg)
    attempts = cfg.get("plan", "attempts")
    tasks = [(A, ai, seg_km, loss, averaging, reps, seed, cfg.get("plan", "max_segments")) for ai, A in enumerate(attempts)]
    series: list[list[ChainPoint]] = parallel_map(_chsh_series, tasks, threads)
    rows = []
    crit: dict[float, tuple[float | None, float | None, float | None]] = {}
    for A, pts in zip(attempts, series):
        live = [p for p in pts if p.summary is not None]
        for p in pts:
            s = p.summary
            if s is None:
                rows.append((p.distance_km, p.M, A, NAN, NAN, NAN, 0.0, 0.0, 0.0, False))
            else:
                rows.append(
                    (p.distance_km, p.M, A, s.chsh[0], s.chsh[1], s.qber[0], s.di[0], s.key[0], s.key_margin[0], True)
                )
        ds = [p.distance_km for p in live]
        dead = pts[-1].distance_km if pts[-1].summary is None else None
        s_crit = level_crossing(ds, [p.summary.chsh[0] for p in live], 2.0) or dead
        dw_crit = level_crossing(ds, [p.summary.key_margin[0] for p in live], 0.0) or dead
        di_crit = first_zero(ds, [p.summary.di[0] for p in live]) or dead
        crit[A] = (s_crit, dw_crit, di_crit)
    res = ExperimentResult(
        ("distance_km", "segments", "A", "S", "S_stderr", "Q", "di_rate", "dw_rate", "dw_margin", "attainable"), rows
    )
    res.plot = PlotSpec("distance_km", ("S",), group="A", ylabel="CHSH value")
    for A in attempts:
        s_crit, dw_crit, di_crit = crit[A]
        parts = [f"{n} {'none' if v is None else f'{v:.2f} km'}" for n, v in zip(("S=2", "DW=0", "DI=0"), crit[A])]
        if s_crit is not None and dw_crit is not None:
            parts.append(f"gap {dw_crit - s_crit:+.2f} km")
        res.summary.append(f"A={A:g}: " + ", ".join(parts))
    found = [(A, c) for A, c in crit.items() if None not in c]
    for A, (s_crit, dw_crit, di_crit) in found:
        res.checks.append(Check(f"DI key vanishes before DW key A={A:g}", di_crit < dw_crit, f"{di_crit:.2f} < {dw_crit:.2f} km"))
        gap = abs(dw_crit - s_crit)
        res.checks.append(
            Check(f"S=2 and DW=0 distances within one segment A={A:g}", gap <= seg_km, f"gap {gap:.2f} km vs {seg_km:g} km")
        )
    if len(found) >= 2:
        As = [A for A, _ in found]
        s_c = [c[0] for _, c in found]
        dw_c = [c[1] for _, c in found]
        res.checks.append(Check("S=2 distance increases with A", is_nondecreasing(s_c) and As == sorted(As)))
        res.checks.append(Check("DW=0 distance increases with A", is_nondecreasing(dw_c) and As == sorted(As)))
        for label, ys in (("S=2", s_c), ("DW=0", dw_c)):
            slope, icept = np.polyfit(As, ys, 1)
            fit = np.polyval([slope, icept], As)
            ss = float(np.sum((np.asarray(ys) - np.mean(ys)) ** 2))
            r2 = 1.0 - float(np.sum((np.asarray(ys) - fit) ** 2)) / ss if ss > 0 else 1.0
            res.summary.append(f"{label} distance vs A: slope {slope:.4f} km, intercept {icept:.2f} km, R^2 {r2:.4f}")
    return res


# ---------------------------------------------------------------- errors


ERROR_KINDS = ("dark", "coupling", "detector", "chL")


def error_model(kind: str, value: float) -> ErrorModelParams:
    """Dark-count probability, or fractional loss for the other kinds."""
    if kind == "dark":
        return ErrorModelParams(p_dark=value)
    if not 0.0 <= value < 1.0:
        raise ConfigError(f"{kind} loss {value} outside [0, 1)")
    eta = 1.0 - value
    return {
        "coupling": ErrorModelParams(eta_coupling=eta),
        "detector": ErrorModelParams(eta_detector=eta),
        "chL": ErrorModelParams(eta_chL=eta),
    }[kind]


def error_point(
    kind: str,
    value: float,
    A: float,
    M: int,
    seg_km: float,
    loss: float,
    cutoff: int,
    tail_tol: float,
    averaging: str,
    reps: int,
    seed: int,
    index: tuple[int, ...],
) -> tuple[float, float, float, float]:
    """(herald probability, key rate, stderr, key per success) for one error setting."""
    sd = design_segment(RepeaterPlan(M, seg_km, loss, A))
    if sd.design is None:
        return NAN, 0.0, 0.0, 0.0
    d = sd.design
    sc = RegisterScenario(1, d.theta_L, d.theta_R, d.tmsv, 1.0, d.eta)
    seg = simulate_segment(sc, error_model(kind, value), cutoff or None, tail_tol)
    p = seg.trace
    if not p > 0:
        return p, 0.0, 0.0, 0.0
    s = chain_summary(seg, M, p, averaging, reps, point_rng(seed, *index))
    kr, se = s.keyrate
    return p, kr, se, s.key[0]


ERROR_SECTION: Mapping[str, Field] = {
    "dark": Field(real_list, (0.0, 1e-5, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3), "dark-count probabilities"),
    "coupling": Field(real_list, (0.0, 0.01, 0.02, 0.05), "emitter coupling loss"),
    "detector": Field(real_list, (0.0, 0.005, 0.01, 0.02, 0.05), "detector loss"),
    "chL": Field(real_list, (0.0, 0.01, 0.02, 0.05), "left channel loss"),
    "kinds": Field(lambda t: tuple(choice(*ERROR_KINDS)(x) for x in t.split(",")), ERROR_KINDS, "kinds to sweep"),
}
FOCK_SECTION: Mapping[str, Field] = {
    "cutoff": Field(nonnegative_int, 0, "photon cutoff, 0 for automatic"),
    "tail_tol": Field(real, 1e-10, "neglected source weight"),
}


def _threshold(values: list[float], crosses: list[bool]) -> str:
    ok = [v for v, c in zip(values, crosses) if c]
    bad = [v for v, c in zip(values, crosses) if not c]
    hi = max(ok) if ok else None
    lo = min((v for v in bad if hi is None or v > hi), default=None)
    return f"last crossing {'none' if hi is None else f'{hi:g}'}, first failure {'none' if lo is None else f'{lo:g}'}"


def run_error_sweep(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    _check_plan(cfg)
    seg_km, loss, averaging, reps, seed = _plan_args(cfg)
    (A,) = cfg.get("plan", "attempts")[:1]
    cutoff, tail_tol = cfg.get("fock", "cutoff"), cfg.get("fock", "tail_tol")
    kinds = cfg.get("errors", "kinds")
    Ms = list(range(1, cfg.get("plan", "max_segments") + 1))
    tasks = []
    for ki, kind in enumerate(kinds):
        for vi, v in enumerate(cfg.get("errors", kind)):
            error_model(kind, v)
            for M in Ms:
                tasks.append((kind, v, A, M, seg_km, loss, cutoff, tail_tol, averaging, reps, seed, (ki, vi, M)))
    vals = parallel_map(error_point, tasks, threads)
    rows = []
    for t, (p, kr, se, key) in zip(tasks, vals):
        kind, v, _, M = t[:4]
        rows.append((kind, v, M, M * seg_km, p, kr, se, key, plob_at(M * seg_km, loss)))
    res = ExperimentResult(
        ("error_kind", "error_value", "segments", "distance_km", "p_herald", "keyrate", "keyrate_stderr", "key_per_success", "plob"),
        rows,
    )
    res.plot = PlotSpec("distance_km", ("keyrate",), group="error_value", logy=True, ylabel="key bits per attempt")
    for kind in kinds:
        values = list(cfg.get("errors", kind))
        order = sorted(values)
        crosses = []
        for v in order:
            sub = [r for r in rows if r[0] == kind and r[1] == v]
            c = first_crossing([r[3] for r in sub], [r[5] for r in sub], [r[8] for r in sub])
            crosses.append(c is not None)
            res.summary.append(f"{kind}={v:g}: crossing {'none' if c is None else f'{c:.2f} km'}")
        res.summary.append(f"{kind} threshold: {_threshold(order, crosses)}")
        mono = True
        for M in Ms:
            sub = sorted((r for r in rows if r[0] == kind and r[2] == M), key=lambda r: r[1])
            mono &= all(b[5] <= a[5] * (1 + 1e-9) + 3.0 * math.hypot(a[6], b[6]) for a, b in zip(sub, sub[1:]))
        res.checks.append(Check(f"key rate non-increasing in {kind} error", mono))
        if kind in ("coupling", "chL") and 0.01 in order and 0.05 in order:
            c1, c5 = crosses[order.index(0.01)], crosses[order.index(0.05)]
            res.checks.append(Check(f"{kind}: crossing at 1% loss, none at 5%", c1 and not c5))
    return res


# ---------------------------------------------------------------- parameters


def _scan_length(L: float, A: float, loss: float, averaging: str, reps: int, seed: int, li: int, max_km: float) -> float:
    """Distance at which the key first vanishes for segment length ``L``."""
    M = 1
    while M * L <= max_km:
        pt = chain_point(A, M, L, loss, averaging, reps, seed, (li, M))
        if pt.summary is None or pt.summary.key[0] <= 0.0:
            return pt.distance_km
        M += 1
    return NAN


def run_opt_params(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    _check_plan(cfg)
    seg_km, loss, averaging, reps, seed = _plan_args(cfg)
    attempts = cfg.get("plan", "attempts")
    rows = []
    identity = 0.0
    trends = []
    for A in attempts:
        ths = []
        for M in range(1, cfg.get("plan", "max_segments") + 1):
            sd = design_segment(RepeaterPlan(M, seg_km, loss, A))
            if sd.design is None:
                break
            d = sd.design
            identity = max(identity, abs(d.mean_n - optimal_mean_n(d.theta_R, d.eta)))
            ths.append(d.theta_R)
            rows.append(("params", A, seg_km, M, M * seg_km, sd.p, d.theta_R, d.theta_L, d.mean_n, NAN))
        trends.append((A, ths))
    scan_A = cfg.get("scan", "attempts")
    lengths = cfg.get("scan", "segment_lengths")
    max_km = cfg.get("scan", "max_distance_km")
    tasks = [(L, scan_A, loss, averaging, reps, seed, li, max_km) for li, L in enumerate(lengths)]
    vanish = parallel_map(_scan_length, tasks, threads)
    for L, dv in zip(lengths, vanish):
        rows.append(("scan", scan_A, L, 0, NAN, NAN, NAN, NAN, NAN, dv))
    res = ExperimentResult(
        ("table", "A", "segment_km", "segments", "distance_km", "p", "theta_R", "theta_L", "mean_n", "vanishing_km"),
        rows,
    )
    res.plot = PlotSpec("distance_km", ("theta_R", "theta_L", "mean_n"), group="A", xlabel="distance (km)")
    res.checks.append(Check("mean_n is the optimum for theta_R", identity < 1e-12, f"max |diff| {identity:.1e}"))
    for A, ths in trends:
        res.checks.append(Check(f"theta_R increases with distance A={A:g}", is_nondecreasing(ths)))
    finite = [(L, v) for L, v in zip(lengths, vanish) if not math.isnan(v)]
    if finite:
        L_best, v_best = max(finite, key=lambda t: t[1])
        res.summary.append(f"segment scan (A={scan_A:g}): best length {L_best:g} km, key vanishes at {v_best:g} km")
        for L, v in finite:
            res.summary.append(f"  L={L:g} km: key vanishes at {v:g} km ({v / v_best:.3f} of best)")
    res.checks.append(Check("segment scan argmax reported", bool(finite)))
    return res


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class Experiment:
    name: str
    title: str
    schema: Schema
    run: Callable[[ExperimentConfig, int], ExperimentResult]


def _run_section(averaging: str) -> dict[str, Field]:
    out = dict(RUN_SECTION)
    out["averaging"] = Field(RUN_SECTION["averaging"].parse, averaging, RUN_SECTION["averaging"].doc)
    return out


EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment(
            "neg-theta",
            "Register negativity against the superposition angle",
            {"register": REGISTER_SECTION, "sweep": {"steps": Field(positive_int, 91, "angles in [0, pi/2]")}},
            run_neg_theta,
        ),
        Experiment(
            "theta-eta",
            "Negativity-optimal right angle and success probability against transmission",
            {"register": REGISTER_SECTION, "sweep": ETA_SWEEP},
            run_theta_eta,
        ),
        Experiment(
            "neg-eta",
            "Register and TMSV negativity against transmission",
            {"register": REGISTER_SECTION, "sweep": ETA_SWEEP},
            run_neg_eta,
        ),
        Experiment("keyrate", "Key rate against distance", {"plan": _plan_section()}, run_keyrate),
        Experiment(
            "chsh-di",
            "CHSH value, DW and DI key against distance",
            {"plan": _plan_section(attempts=(50.0, 100.0, 200.0, 500.0), max_segments=200)},
            run_chsh_di,
        ),
        Experiment(
            "error-sweep",
            "Key rate under device imperfections",
            {
                "run": _run_section("exact"),
                "plan": _plan_section(segment_km=60.0, attempts=(500.0,), max_segments=6),
                "errors": ERROR_SECTION,
                "fock": FOCK_SECTION,
            },
            run_error_sweep,
        ),
        Experiment(
            "opt-params",
            "Optimal source and angle parameters, segment-length scan",
            {
                "plan": _plan_section(),
                "scan": {
                    "attempts": Field(real, 100.0, "attempt budget for the scan"),
                    "segment_lengths": Field(real_list, (5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 60.0), "segment lengths"),
                    "max_distance_km": Field(real, 2000.0, "scan horizon"),
                },
            },
            run_opt_params,
        ),
    )
}
