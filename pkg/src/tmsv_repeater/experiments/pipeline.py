"""Repeater pipeline shared by the experiments.

For a plan (A, M, segment length) the per-segment success probability is
fixed by the attempt budget, the superposition angles and squeezing follow
from it, and the segment state is joined by sampled swaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..attempts import RepeaterPlan, rate_factor, solve_p_for_attempts
from ..linalg import DensityMatrix
from ..metrics import bell_test, devetak_winter_key, di_key_rate, plob_bound
from ..single_qubit import OneQubitDesign, UnattainableProbabilityError
from ..swap import align_frame, chain_distribution, run_chain


@dataclass(frozen=True)
class SegmentDesign:
    plan: RepeaterPlan
    p: float
    design: OneQubitDesign | None

    @property
    def attainable(self) -> bool:
        return self.design is not None


def design_segment(plan: RepeaterPlan) -> SegmentDesign:
    """Solve attempts -> p -> theta_R -> <n> -> theta_L for one plan."""
    p = solve_p_for_attempts(plan.allowed_attempts_A, plan.segments_M)
    try:
        design = OneQubitDesign.for_probability(p, plan.segment_eta)
    except UnattainableProbabilityError:
        design = None
    return SegmentDesign(plan, p, design)


def coherence_phase(rho: DensityMatrix) -> complex:
    """Unit phase of the |00><11| coherence (1 if it vanishes)."""
    c = rho.data[0, 3]
    return c / abs(c) if abs(c) > 1e-300 else 1.0 + 0j


@dataclass(frozen=True)
class RunMetrics:
    key: float
    chsh: float
    qber: float
    di: float
    key_margin: float


def chain_metrics(segment: DensityMatrix, M: int, rng: np.random.Generator, key_sifting: float = 1.0) -> RunMetrics:
    """One sampled chain of ``M`` segments, aligned to a real positive coherence."""
    seg = segment.normalize()
    final = run_chain(seg, M, rng).rho
    return _final_metrics(align_frame(final, coherence_phase(seg) ** M), key_sifting)


def _final_metrics(final: DensityMatrix, key_sifting: float) -> RunMetrics:
    bt = bell_test(final)
    kr = devetak_winter_key(final, sifting=key_sifting)
    margin = key_sifting * float(np.mean(list(kr.per_basis.values())))
    return RunMetrics(kr.key_bits_per_success, bt.chsh_S, bt.qber_Q, di_key_rate(bt.qber_Q, bt.chsh_S), margin)


def expected_chain_metrics(segment: DensityMatrix, M: int, key_sifting: float = 1.0) -> RunMetrics:
    """Outcome-averaged metrics from the exact branch distribution (short chains only)."""
    seg = segment.normalize()
    phase = coherence_phase(seg) ** M
    acc = np.zeros(5)
    for w, final in chain_distribution(seg, M):
        m = _final_metrics(align_frame(final, phase), key_sifting)
        acc += w * np.array([m.key, m.chsh, m.qber, m.di, m.key_margin])
    return RunMetrics(*map(float, acc))


def mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 1 or np.all(v == v[0]):
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


@dataclass(frozen=True)
class ChainSummary:
    key: tuple[float, float]
    chsh: tuple[float, float]
    qber: tuple[float, float]
    di: tuple[float, float]
    key_margin: tuple[float, float]
    rate_factor: float

    @property
    def keyrate(self) -> tuple[float, float]:
        return self.key[0] * self.rate_factor, self.key[1] * self.rate_factor


def summarize_chain(
    segment: DensityMatrix,
    M: int,
    p: float,
    repetitions: int,
    rng: np.random.Generator,
    key_sifting: float = 1.0,
) -> ChainSummary:
    runs = [chain_metrics(segment, M, rng, key_sifting) for _ in range(repetitions)]
    return ChainSummary(
        mean_stderr([r.key for r in runs]),
        mean_stderr([r.chsh for r in runs]),
        mean_stderr([r.qber for r in runs]),
        mean_stderr([r.di for r in runs]),
        mean_stderr([r.key_margin for r in runs]),
        rate_factor(p, M),
    )


def exact_summary(segment: DensityMatrix, M: int, p: float, key_sifting: float = 1.0) -> ChainSummary:
    """Outcome-averaged summary; standard errors are zero."""
    m = expected_chain_metrics(segment, M, key_sifting)
    return ChainSummary(
        (m.key, 0.0), (m.chsh, 0.0), (m.qber, 0.0), (m.di, 0.0), (m.key_margin, 0.0), rate_factor(p, M)
    )


def chain_summary(
    segment: DensityMatrix,
    M: int,
    p: float,
    averaging: str,
    repetitions: int,
    rng: np.random.Generator,
    key_sifting: float = 1.0,
) -> ChainSummary:
    """Dispatch on ``averaging`` (``"sampled"`` or ``"exact"``)."""
    if averaging == "exact":
        return exact_summary(segment, M, p, key_sifting)
    if averaging == "sampled":
        return summarize_chain(segment, M, p, repetitions, rng, key_sifting)
    raise ValueError(f"unknown averaging {averaging!r}")


def plob_at(distance_km: float, loss_db_per_km: float = 0.2) -> float:
    return plob_bound(10.0 ** (-loss_db_per_km * distance_km / 10.0))


def first_crossing(distances: Sequence[float], rates: Sequence[float], bound: Sequence[float]) -> float | None:
    """First distance where ``rates`` rises from below to above ``bound``.

    Linear interpolation in ``log(rate / bound)``; if the preceding rate is
    zero the grid distance itself is returned.
    """
    d = np.asarray(distances, dtype=float)
    r = np.asarray(rates, dtype=float)
    b = np.asarray(bound, dtype=float)
    for i in range(1, len(d)):
        if r[i] > b[i] and r[i - 1] <= b[i - 1]:
            if r[i - 1] <= 0:
                return float(d[i])
            g0, g1 = math.log(r[i - 1] / b[i - 1]), math.log(r[i] / b[i])
            return float(d[i - 1] + (d[i] - d[i - 1]) * (-g0) / (g1 - g0))
    return None


def level_crossing(distances: Sequence[float], values: Sequence[float], level: float = 0.0) -> float | None:
    """First downward crossing of ``level``, linearly interpolated between grid points."""
    for i, (d, v) in enumerate(zip(distances, values)):
        if v <= level:
            if i == 0:
                return float(d)
            d0, v0 = distances[i - 1], values[i - 1]
            return float(d0 + (d - d0) * (v0 - level) / (v0 - v))
    return None


def first_zero(distances: Sequence[float], values: Sequence[float], level: float = 0.0) -> float | None:
    """First grid distance at which ``values`` is at or below ``level``."""
    for d, v in zip(distances, values):
        if v <= level:
            return float(d)
    return None
