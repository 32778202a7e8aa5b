"""Attempt statistics for M segments that retry independently until all succeed.

Each segment succeeds per attempt with probability p; the experiment ends
when the slowest segment succeeds, so the attempt count is the maximum of
M geometric variables: ``CDF_M(n) = (1 - (1 - p)**n)**M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels

SERIES_TOL = 1e-13
MIN_PROBABILITY = 1e-6
MAX_TERMS = 200_000_000


def _check_p(p: float) -> None:
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p={p} outside (0, 1]")


def _check_M(M: int) -> None:
    if int(M) != M or M < 1:
        raise ValueError(f"segment count must be a positive integer, got {M}")


@dataclass(frozen=True)
class RepeaterPlan:
    segments_M: int
    segment_km: float
    loss_db_per_km: float = 0.2
    allowed_attempts_A: float = 100.0

    def __post_init__(self) -> None:
        _check_M(self.segments_M)
        if not self.segment_km > 0:
            raise ValueError("segment_km must be > 0")
        if self.loss_db_per_km < 0:
            raise ValueError("loss_db_per_km must be >= 0")
        if not self.allowed_attempts_A > 1:
            raise ValueError("allowed_attempts_A must be > 1")

    @property
    def total_km(self) -> float:
        return self.segments_M * self.segment_km

    @property
    def segment_eta(self) -> float:
        return 10.0 ** (-self.loss_db_per_km * self.segment_km / 10.0)

    @property
    def total_eta(self) -> float:
        return 10.0 ** (-self.loss_db_per_km * self.total_km / 10.0)


def geometric_pmf(n: int, p: float) -> float:
    if n < 1:
        raise ValueError("attempt index must be >= 1")
    _check_p(p)
    return p * (1.0 - p) ** (n - 1)


def all_segments_cdf(n: int, p: float, M: int) -> float:
    _check_p(p)
    _check_M(M)
    if n < 0:
        raise ValueError("attempt index must be >= 0")
    return (1.0 - (1.0 - p) ** n) ** M


def all_segments_pdf(n, p: float, M: int):
    """Probability that the last of M segments succeeds at attempt ``n``.

    Accepts a scalar or an integer array for ``n``.
    """
    _check_p(p)
    _check_M(M)
    n_arr = np.asarray(n)
    if np.any(n_arr < 1):
        raise ValueError("attempt index must be >= 1")
    q = 1.0 - p
    with np.errstate(divide="ignore"):
        s_now = -np.expm1(M * np.log1p(-(q ** n_arr.astype(float))))
        s_prev = -np.expm1(M * np.log1p(-(q ** (n_arr.astype(float) - 1))))
    out = np.maximum(s_prev - s_now, 0.0)
    return float(out) if out.ndim == 0 else out


def _moments(p: float, M: int) -> tuple[float, float]:
    _check_p(p)
    _check_M(M)
    if p < MIN_PROBABILITY:
        raise ValueError(f"p={p:g} below {MIN_PROBABILITY:g}: attempt series too long to sum reliably")
    mean, inv, _ = kernels.attempt_moments(p, M, SERIES_TOL, MAX_TERMS)
    return mean, inv


def expected_attempts(p: float, M: int) -> float:
    """Mean of the all-segments attempt count, ``sum_n n PDF_M(n)``."""
    return _moments(p, M)[0]


def rate_factor(p: float, M: int) -> float:
    """``sum_n PDF_M(n) / n``, the mean inverse attempt count."""
    return _moments(p, M)[1]


def solve_p_for_attempts(A: float, M: int) -> float:
    """Per-segment success probability whose expected attempt count is ``A``.

    The root is bracketed by ``1/p <= E <= 1 + H_M/p`` (``H_M`` the harmonic
    number), which follows from bounding the survival sum by its integral.
    """
    _check_M(M)
    if not A >= 1.0:
        raise ValueError(f"A={A} must be >= 1")
    if A == 1.0:
        return 1.0
    lo = 1.0 / A
    if lo < MIN_PROBABILITY:
        raise ValueError(f"A={A} requires p below {MIN_PROBABILITY:g}")
    harmonic = sum(1.0 / k for k in range(1, M + 1))
    hi = min(1.0, harmonic / (A - 1.0))
    f = lambda p: expected_attempts(p, M) - A  # noqa: E731
    f_lo, f_hi = f(lo), f(hi)
    # either end may be the exact root (M = 1 gives E = 1/p)
    if f_lo <= 0:
        return lo
    if f_hi >= 0:
        return hi
    return brentq(f, lo, hi, xtol=1e-300, rtol=1e-14, maxiter=400)


def normalized_key_rate(K_M: float, p: float, M: int) -> float:
    """Key per attempt: ``K_M * sum_n PDF_M(n) / n``."""
    if K_M < 0:
        raise ValueError("key must be >= 0 (clamp before normalizing)")
    if K_M == 0:
        return 0.0
    return K_M * rate_factor(p, M)


def sample_attempts(p: float, M: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo draws of the all-segments attempt count."""
    _check_p(p)
    _check_M(M)
    return rng.geometric(p, size=(trials, M)).max(axis=1)


def attempts_series_oracle(p: float, M: int) -> tuple[float, float]:
    """Closed forms by inclusion-exclusion over the number of unfinished segments.

    Exact but cancellation-prone for large M; used to validate the series.
    """
    q = 1.0 - p
    mean = 0.0
    inv = 0.0
    for s in range(1, M + 1):
        w = math.comb(M, s) * (-1) ** (s + 1)
        mean += w / (1.0 - q**s)
        inv += w * (1.0 - q ** (-s)) * math.log1p(-(q**s)) if q > 0 else 0.0
    if q == 0:
        inv = 1.0
    return mean, inv
