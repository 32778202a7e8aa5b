"""Entanglement and key figures of merit for two-qubit states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    PSD_TOL,
    TRACE_TOL,
    DensityMatrix,
    InvalidStateError,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
    von_neumann_entropy,
)

TSIRELSON = 2.0 * math.sqrt(2.0)

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
# columns are the eigenvectors measured in each basis
_BASES = {"z": _I2, "x": _H}


def _require_normalized(rho: DensityMatrix) -> None:
    if abs(rho.trace - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"expected a normalized state, trace is {rho.trace!r}")


def _require_two_qubits(rho: DensityMatrix) -> None:
    if rho.dims != (2, 2):
        raise ValueError(f"expected a two-qubit state, got dims {rho.dims}")


def negativity(rho: DensityMatrix, split: int = 0) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    if len(rho.dims) != 2:
        raise ValueError(f"negativity needs a bipartite state, got dims {rho.dims}")
    _require_normalized(rho)
    w = hermitian_eigenvalues(partial_transpose(rho, split))
    return float(-np.sum(w[w < 0]))


def schmidt_negativity(amplitudes) -> float:
    """Negativity of a pure state from its Schmidt amplitudes (normalized internally)."""
    a = np.abs(np.asarray(amplitudes, dtype=complex))
    norm2 = float(np.sum(a**2))
    if norm2 <= 0:
        raise ValueError("zero state")
    return float((np.sum(a) ** 2 / norm2 - 1.0) / 2.0)


def expectation(rho: DensityMatrix, op: np.ndarray) -> float:
    return float(np.trace(rho.data @ op).real)


def correlator(rho: DensityMatrix, a: np.ndarray, b: np.ndarray) -> float:
    return expectation(rho, np.kron(a, b))


def chsh_value(rho: DensityMatrix) -> float:
    """CHSH value for Alice in {X, Z} and Bob in {(X + Z)/sqrt2, (X - Z)/sqrt2}."""
    _require_two_qubits(rho)
    _require_normalized(rho)
    b1 = (_X + _Z) / math.sqrt(2.0)
    b2 = (_X - _Z) / math.sqrt(2.0)
    return (
        correlator(rho, _X, b1)
        + correlator(rho, _X, b2)
        + correlator(rho, _Z, b1)
        - correlator(rho, _Z, b2)
    )


def qber(rho: DensityMatrix) -> float:
    """Probability of unequal outcomes when both parties measure X."""
    _require_two_qubits(rho)
    _require_normalized(rho)
    return (1.0 - correlator(rho, _X, _X)) / 2.0


@dataclass(frozen=True)
class BellTestResult:
    chsh_S: float
    qber_Q: float

    def __post_init__(self) -> None:
        if abs(self.chsh_S) > TSIRELSON + 1e-9:
            raise ValueError(f"CHSH value {self.chsh_S} exceeds the Tsirelson bound")


def bell_test(rho: DensityMatrix) -> BellTestResult:
    return BellTestResult(chsh_value(rho), qber(rho))


@dataclass(frozen=True)
class MeasurementRecord:
    joint_probs: np.ndarray
    basis_label: str = ""

    def __post_init__(self) -> None:
        p = np.asarray(self.joint_probs, dtype=float)
        if p.ndim != 2:
            raise ValueError("joint_probs must be a 2-d table")
        if np.any(p < -1e-15):
            raise ValueError("joint probabilities must be >= 0")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"joint probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "joint_probs", np.clip(p, 0.0, None))


def _basis(label: str) -> np.ndarray:
    try:
        return _BASES[label]
    except KeyError:
        raise ValueError(f"unknown basis {label!r}; use 'z' or 'x'") from None


def _rotate(rho: DensityMatrix, label: str) -> np.ndarray:
    u = np.kron(_basis(label), _basis(label))
    return u.conj().T @ rho.data @ u


def measurement_record(rho: DensityMatrix, basis: str) -> MeasurementRecord:
    """Joint outcome table when both parties measure in ``basis``."""
    _require_two_qubits(rho)
    _require_normalized(rho)
    p = np.diag(_rotate(rho, basis)).real.reshape(2, 2)
    p = np.clip(p, 0.0, None)
    return MeasurementRecord(p / p.sum(), basis)


def mutual_information(rec: MeasurementRecord) -> float:
    p = rec.joint_probs
    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    mask = p > 0
    outer = np.outer(pa, pb)
    return float(max(0.0, np.sum(p[mask] * np.log2(p[mask] / outer[mask]))))


def holevo_bound(rho_AB: DensityMatrix, alice_basis: str) -> float:
    """Eve's Holevo information on Alice's outcome, with Bob purifying the state."""
    _require_two_qubits(rho_AB)
    _require_normalized(rho_AB)
    u = _basis(alice_basis)
    chi = von_neumann_entropy(rho_AB)
    for a in range(2):
        proj = np.kron(np.outer(u[:, a], u[:, a].conj()), _I2)
        branch = proj @ rho_AB.data @ proj
        pa = float(np.trace(branch).real)
        if pa <= PSD_TOL:
            continue
        rho_b = partial_trace(DensityMatrix(branch / pa, (2, 2), normalized=True), [1])
        chi -= pa * von_neumann_entropy(rho_b)
    if chi < -1e-10:
        raise ArithmeticError(f"negative Holevo quantity {chi:.3e}")
    return max(0.0, chi)


@dataclass(frozen=True)
class KeyRateResult:
    mutual_info_bits: float
    holevo_bits: float
    key_bits_per_success: float
    reconciliation_beta: float = 1.0
    per_basis: dict[str, float] = field(default_factory=dict)


def devetak_winter_key(
    rho: DensityMatrix,
    beta: float = 1.0,
    bases: tuple[str, ...] = ("z", "x"),
    sifting: float = 1.0,
) -> KeyRateResult:
    """Basis-averaged key ``mean_b(beta I_b - chi_b)``, clamped at zero, times ``sifting``."""
    per_basis = {}
    infos, chis = [], []
    for b in bases:
        i_ab = mutual_information(measurement_record(rho, b))
        chi = holevo_bound(rho, b)
        infos.append(i_ab)
        chis.append(chi)
        per_basis[b] = beta * i_ab - chi
    key = sifting * max(0.0, float(np.mean(list(per_basis.values()))))
    return KeyRateResult(float(np.mean(infos)), float(np.mean(chis)), key, beta, per_basis)


def binary_entropy(x: float) -> float:
    if not -1e-12 <= x <= 1.0 + 1e-12:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))


def di_key_rate(Q: float, S: float) -> float:
    """Device-independent key from QBER and CHSH value, clamped to [0, 1]."""
    if S <= 2.0:
        return 0.0
    s = min(S, TSIRELSON)
    r = 1.0 - binary_entropy(Q) - binary_entropy((1.0 + math.sqrt((s / 2.0) ** 2 - 1.0)) / 2.0)
    return min(1.0, max(0.0, r))


def plob_bound(eta_total: float) -> float:
    """Repeaterless secret-key capacity ``-log2(1 - eta)``."""
    if not 0.0 < eta_total < 1.0:
        raise ValueError(f"eta_total={eta_total} must lie strictly between 0 and 1")
    return -math.log1p(-eta_total) / math.log(2.0)


def fiber_transmission(distance_km: float, loss_db_per_km: float = 0.2) -> float:
    if distance_km < 0:
        raise ValueError("distance must be >= 0")
    return 10.0 ** (-loss_db_per_km * distance_km / 10.0)


def tmsv_negativity(mean_n: float, eta_L: float = 1.0, eta_R: float = 1.0) -> float:
    """Negativity of a TMSV after pure loss on either mode.

    Uses the smallest symplectic eigenvalue of the partially transposed
    covariance matrix (vacuum variance 1): ``Neg = (1/nu - 1)/2``.
    """
    if mean_n < 0:
        raise ValueError("mean_n must be >= 0")
    for eta in (eta_L, eta_R):
        if not 0.0 <= eta <= 1.0:
            raise ValueError("transmissions must lie in [0, 1]")
    v = 2.0 * mean_n + 1.0
    a = eta_L * (v - 1.0) + 1.0
    b = eta_R * (v - 1.0) + 1.0
    c = math.sqrt(eta_L * eta_R) * 2.0 * math.sqrt(mean_n * (mean_n + 1.0))
    nu = ((a + b) - math.sqrt((a - b) ** 2 + 4.0 * c * c)) / 2.0
    return max(0.0, (1.0 / nu - 1.0) / 2.0)
