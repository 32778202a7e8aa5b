"""Dense complex-matrix primitives shared by every other module.

All states are small (dimension <= 64 for registers, a few hundred for the
truncated Fock reference states), so everything is plain dense numpy.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
EIGEN_RECONSTRUCTION_TOL = 1e-9

_audit_logs: list[list["DensityMatrix"]] = []


class InvalidStateError(ValueError):
    """Raised when a matrix violates a density-matrix invariant."""


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Square complex matrix tagged with its subsystem dimensions.

    ``normalized`` records whether the matrix is meant to have unit trace.
    Unnormalized matrices carry a success probability in their trace.
    ``operator`` marks Hermitian operators that are not states (partial
    transposes); :meth:`check` then tests Hermiticity only.
    """

    data: np.ndarray
    dims: tuple[int, ...]
    normalized: bool = False
    operator: bool = False

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise InvalidStateError(f"density matrix must be square, got {data.shape}")
        if int(np.prod(dims)) != data.shape[0]:
            raise InvalidStateError(f"dims {dims} do not match matrix dimension {data.shape[0]}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)
        for log in _audit_logs:
            log.append(self)

    @classmethod
    def from_ket(cls, psi: Sequence[complex], dims: Sequence[int]) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        norm = np.vdot(psi, psi).real
        return cls(np.outer(psi, psi.conj()), tuple(dims), normalized=bool(abs(norm - 1) <= TRACE_TOL))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def normalize(self) -> "DensityMatrix":
        tr = self.trace
        if tr <= 0:
            raise InvalidStateError("cannot normalize a state with non-positive trace")
        return DensityMatrix(self.data / tr, self.dims, normalized=True)

    def check(self, hermitian_tol: float = HERMITIAN_TOL, psd_tol: float = PSD_TOL) -> None:
        """Raise :class:`InvalidStateError` unless all invariants hold."""
        herm_err = np.max(np.abs(self.data - self.data.conj().T)) if self.dim else 0.0
        if herm_err > hermitian_tol:
            raise InvalidStateError(f"not Hermitian: max |rho - rho^H| = {herm_err:.3e}")
        if self.operator:
            return
        evals = np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))
        if evals[0] < -psd_tol:
            raise InvalidStateError(f"not PSD: min eigenvalue {evals[0]:.3e}")
        tr = self.trace
        if self.normalized:
            if abs(tr - 1.0) > TRACE_TOL:
                raise InvalidStateError(f"normalized state has trace {tr!r}")
        elif not (0.0 < tr <= 1.0 + TRACE_TOL):
            raise InvalidStateError(f"unnormalized state trace {tr!r} outside (0, 1]")


@contextlib.contextmanager
def audit_states() -> Iterator[list[DensityMatrix]]:
    """Collect every :class:`DensityMatrix` constructed inside the block."""
    log: list[DensityMatrix] = []
    _audit_logs.append(log)
    try:
        yield log
    finally:
        _audit_logs.remove(log)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.kron(a.data, b.data), a.dims + b.dims, normalized=a.normalized and b.normalized)


def _check_subsystem(dims: tuple[int, ...], index: int) -> None:
    if not 0 <= index < len(dims):
        raise IndexError(f"subsystem {index} out of range for dims {dims}")


def partial_transpose(rho: DensityMatrix, subsystem: int) -> DensityMatrix:
    """Transpose one tensor factor: <i,j|rho^T|k,l> = <k,j|rho|i,l> for factor 0."""
    _check_subsystem(rho.dims, subsystem)
    n = len(rho.dims)
    t = rho.data.reshape(rho.dims + rho.dims)
    axes = list(range(2 * n))
    axes[subsystem], axes[n + subsystem] = axes[n + subsystem], axes[subsystem]
    out = t.transpose(axes).reshape(rho.dim, rho.dim)
    # an involution: transposing a transpose gives back a state
    return DensityMatrix(out, rho.dims, normalized=rho.normalized, operator=not rho.operator)


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep`` (kept order is preserved)."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    for k in keep:
        _check_subsystem(rho.dims, k)
    n = len(rho.dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise ValueError("too many subsystems")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out_idx = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    t = np.einsum("".join(row) + "".join(col) + "->" + out_idx, rho.data.reshape(rho.dims + rho.dims))
    kept = tuple(rho.dims[k] for k in keep)
    d = int(np.prod(kept))
    return DensityMatrix(t.reshape(d, d), kept, normalized=rho.normalized)


def _as_array(m) -> np.ndarray:
    return m.data if isinstance(m, DensityMatrix) else np.asarray(m, dtype=complex)


def hermitian_eigh(m) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvectors of a Hermitian matrix.

    The decomposition is accepted only if it reconstructs the input to
    within ``EIGEN_RECONSTRUCTION_TOL`` (relative to the largest entry).
    """
    a = _as_array(m)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.conj().T)) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    if a.size:
        err = np.max(np.abs((v * w) @ v.conj().T - a))
        if err > EIGEN_RECONSTRUCTION_TOL * scale:
            raise np.linalg.LinAlgError(f"eigendecomposition reconstruction error {err:.3e}")
    return w, v


def hermitian_eigenvalues(m) -> np.ndarray:
    return hermitian_eigh(m)[0]


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits; eigenvalues in [-PSD_TOL, 0) are treated as zero."""
    if abs(rho.trace - 1.0) > TRACE_TOL:
        raise InvalidStateError("entropy requires a normalized state")
    w = hermitian_eigenvalues(rho)
    if w[0] < -PSD_TOL:
        raise InvalidStateError(f"negative eigenvalue {w[0]:.3e}")
    w = w[w > 0]
    return float(max(0.0, -np.sum(w * np.log2(w))))
