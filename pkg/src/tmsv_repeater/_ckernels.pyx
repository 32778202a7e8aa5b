# cython: language_level=3
"""Compiled kernels; see ``_pykernels`` for the reference implementation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log1p

cnp.import_array()


def attempt_moments(double p, long M, double tol, long max_terms):
    """Return (mean attempts, sum_n PDF_M(n)/n, terms used)."""
    cdef double logq, q, mean, inv, s_prev, s_n, q_n
    cdef double dM = <double>M
    cdef long n = 0
    if p >= 1.0:
        return 1.0, 1.0, 1
    logq = log1p(-p)
    q = 1.0 - p
    mean = 1.0
    inv = 0.0
    s_prev = 1.0
    with nogil:
        for n in range(1, max_terms + 1):
            q_n = exp(n * logq)
            # 1 - (1 - q**n)**M without cancellation
            s_n = -expm1(dM * log1p(-q_n))
            mean += s_n
            inv += (s_prev - s_n) / n
            s_prev = s_n
            if dM * q_n * q < tol * p * mean and dM * q_n < tol * (n + 1) * inv:
                break
    if n >= max_terms:
        raise ArithmeticError(f"attempt series did not converge within {max_terms} terms")
    return mean, inv, n


def bell_branches(cnp.ndarray a_in, cnp.ndarray b_in, cnp.ndarray bell_in):
    """Unnormalized projections of a (x) b onto each Bell vector on the middle pair.

    ``a`` acts on (L1, R1), ``b`` on (L2, R2); ``bell[k, r, l]`` is the
    k-th Bell vector on (R1, L2).  Output ``out[k]`` is a 4x4 state on (L1, R2).
    """
    cdef double complex[:, ::1] a = np.ascontiguousarray(a_in, dtype=np.complex128)
    cdef double complex[:, ::1] b = np.ascontiguousarray(b_in, dtype=np.complex128)
    cdef double complex[:, :, ::1] bell = np.ascontiguousarray(bell_in, dtype=np.complex128)
    out_arr = np.zeros((bell.shape[0], 4, 4), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef int k, x, w, xp, wp, r, l, rp, lp
    cdef double complex acc, cb
    for k in range(bell.shape[0]):
        for x in range(2):
            for w in range(2):
                for xp in range(2):
                    for wp in range(2):
                        acc = 0
                        for r in range(2):
                            for l in range(2):
                                cb = bell[k, r, l].conjugate()
                                if cb == 0:
                                    continue
                                for rp in range(2):
                                    for lp in range(2):
                                        acc = acc + cb * bell[k, rp, lp] * a[2 * x + r, 2 * xp + rp] * b[2 * l + w, 2 * lp + wp]
                        out[k, 2 * x + w, 2 * xp + wp] = acc
    return out_arr
