"""Pure numpy reference implementations of the compiled kernels."""

from __future__ import annotations

import numpy as np

_CHUNK = 8192


def attempt_moments(p: float, M: int, tol: float, max_terms: int) -> tuple[float, float, int]:
    """Return (mean attempts, sum_n PDF_M(n)/n, terms used)."""
    if p >= 1.0:
        return 1.0, 1.0, 1
    logq = np.log1p(-p)
    mean = 1.0
    inv = 0.0
    s_prev = 1.0
    start = 1
    while start <= max_terms:
        n = np.arange(start, min(start + _CHUNK, max_terms + 1), dtype=float)
        qn = np.exp(n * logq)
        s = -np.expm1(M * np.log1p(-qn))
        pdf = np.diff(np.concatenate(([s_prev], s))) * -1.0
        # running sums evaluated term by term to find the exact stopping index
        mean_run = mean + np.cumsum(s)
        inv_run = inv + np.cumsum(pdf / n)
        done = (M * qn * np.exp(logq) / p < tol * mean_run) & (M * qn / (n + 1) < tol * inv_run)
        if np.any(done):
            i = int(np.argmax(done))
            return float(mean_run[i]), float(inv_run[i]), int(n[i])
        mean, inv, s_prev = float(mean_run[-1]), float(inv_run[-1]), float(s[-1])
        start += _CHUNK
    raise ArithmeticError(f"attempt series did not converge within {max_terms} terms")


def bell_branches(a: np.ndarray, b: np.ndarray, bell: np.ndarray) -> np.ndarray:
    """Unnormalized projections of a (x) b onto each Bell vector on the middle pair."""
    at = np.asarray(a, dtype=complex).reshape(2, 2, 2, 2)
    bt = np.asarray(b, dtype=complex).reshape(2, 2, 2, 2)
    bv = np.asarray(bell, dtype=complex)
    out = np.einsum("krl,xryq,lwmz,kqm->kxwyz", bv.conj(), at, bt, bv)
    return out.reshape(bv.shape[0], 4, 4)
