"""Entanglement swapping along a chain of two-qubit segments.

A four-qubit state is ordered (L1, R1, L2, R2).  Swapping projects the
middle pair (R1, L2) onto a Bell vector, then applies the Pauli correction
to R2 that maps that branch into the Phi+ frame.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .linalg import DensityMatrix

_S = 1.0 / np.sqrt(2.0)
_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)


class BellOutcome(enum.Enum):
    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def vector(self) -> np.ndarray:
        """Normalized Bell vector in the basis |00>, |01>, |10>, |11>."""
        return _BELL_VECTORS[self.value]

    @property
    def correction(self) -> np.ndarray:
        """Pauli applied to the surviving right qubit."""
        return _CORRECTIONS[self.value]

    @property
    def correction_label(self) -> str:
        return _CORRECTION_LABELS[self.value]


_BELL_VECTORS = np.array(
    [[_S, 0, 0, _S], [_S, 0, 0, -_S], [0, _S, _S, 0], [0, _S, -_S, 0]],
    dtype=complex,
)
_BELL_TENSOR = _BELL_VECTORS.reshape(4, 2, 2)
_CORRECTIONS = (_I2, _Z, _X, _Z @ _X)
_CORRECTION_LABELS = ("I", "Z", "X", "ZX")


def bell_branches(a: DensityMatrix, b: DensityMatrix) -> np.ndarray:
    """Uncorrected projections of ``a (x) b`` onto all four outcomes, shape (4, 4, 4)."""
    for rho in (a, b):
        if rho.dims != (2, 2):
            raise ValueError(f"expected a two-qubit state, got dims {rho.dims}")
    return kernels.bell_branches(a.data, b.data, _BELL_TENSOR)


def bell_project(omega: DensityMatrix, outcome: BellOutcome) -> DensityMatrix:
    """Project R1, L2 of a four-qubit state onto ``outcome``; unnormalized result on (L1, R2)."""
    if omega.dims != (2, 2, 2, 2):
        raise ValueError(f"omega must have dims (2, 2, 2, 2), got {omega.dims}")
    t = omega.data.reshape((2,) * 8)
    bv = outcome.vector.reshape(2, 2)
    out = np.einsum("rl,xrlwyqmz,qm->xwyz", bv.conj(), t, bv)
    return DensityMatrix(out.reshape(4, 4), (2, 2))


def _correct(data: np.ndarray, outcome: BellOutcome) -> np.ndarray:
    c = np.kron(_I2, outcome.correction)
    return c @ data @ c.conj().T


def apply_correction(rho: DensityMatrix, outcome: BellOutcome) -> DensityMatrix:
    if rho.dims != (2, 2):
        raise ValueError("correction acts on two-qubit states")
    return DensityMatrix(_correct(rho.data, outcome), rho.dims, normalized=rho.normalized)


def sample_outcome(omega: DensityMatrix, rng: np.random.Generator) -> BellOutcome:
    weights = np.array([bell_project(omega, o).trace for o in BellOutcome])
    return _draw(weights, rng)


def _draw(weights: np.ndarray, rng: np.random.Generator) -> BellOutcome:
    weights = np.clip(weights, 0.0, None)
    total = weights.sum()
    if not total > 0:
        raise ValueError("all Bell outcomes have zero weight")
    return BellOutcome(int(rng.choice(4, p=weights / total)))


def align_frame(rho: DensityMatrix, phase: complex) -> DensityMatrix:
    """Rotate the right qubit by diag(1, phase) so a coherence ``phase`` becomes real."""
    c = np.kron(_I2, np.diag([1.0, phase]))
    return DensityMatrix(c @ rho.data @ c.conj().T, rho.dims, normalized=rho.normalized)


@dataclass
class ChainState:
    rho: DensityMatrix
    swaps_done: int = 0
    outcome_log: list[BellOutcome] = field(default_factory=list)
    correction_frame: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.swaps_done != len(self.outcome_log):
            raise ValueError("swaps_done must equal the number of logged outcomes")


def swap_pair(
    a: DensityMatrix,
    b: DensityMatrix,
    rng: np.random.Generator | None = None,
    force: BellOutcome | None = None,
    normalize: bool = True,
) -> tuple[DensityMatrix, BellOutcome]:
    """One corrected swap between adjacent segments ``a`` (left) and ``b`` (right)."""
    branches = bell_branches(a, b)
    if force is None:
        if rng is None:
            raise ValueError("rng required unless the outcome is forced")
        outcome = _draw(np.trace(branches, axis1=1, axis2=2).real, rng)
    else:
        outcome = force
    data = _correct(branches[outcome.value], outcome)
    tr = float(np.trace(data).real)
    if not tr > 0:
        raise ValueError(f"outcome {outcome.name} has zero weight")
    if normalize:
        return DensityMatrix(data / tr, (2, 2), normalized=True), outcome
    return DensityMatrix(data, (2, 2)), outcome


def run_chain(
    segment: DensityMatrix,
    M: int,
    rng: np.random.Generator | None = None,
    force: BellOutcome | None = None,
    order: Sequence[int] | None = None,
    normalize: bool = True,
) -> ChainState:
    """Join ``M`` copies of ``segment`` with ``M - 1`` corrected swaps.

    ``order`` lists the swap positions (boundary ``j`` sits between segment
    ``j`` and ``j + 1``); the default is left to right.  With ``force`` every
    swap takes that outcome; otherwise outcomes are sampled from ``rng``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if segment.dims != (2, 2):
        raise ValueError("segment must be a two-qubit state")
    start = segment.normalize() if normalize and not segment.normalized else segment
    if order is None:
        order = range(M - 1)
    order = list(order)
    if sorted(order) != list(range(M - 1)):
        raise ValueError("order must be a permutation of the M - 1 swap positions")
    # blocks of consecutive segments: (first index, last index, state)
    blocks: list[tuple[int, int, DensityMatrix]] = [(i, i, start) for i in range(M)]
    log: list[BellOutcome] = []
    for j in order:
        left = next(k for k, blk in enumerate(blocks) if blk[1] == j)
        a, b = blocks[left], blocks[left + 1]
        rho, outcome = swap_pair(a[2], b[2], rng, force, normalize)
        blocks[left : left + 2] = [(a[0], b[1], rho)]
        log.append(outcome)
    return ChainState(blocks[0][2], len(log), log, [o.correction_label for o in log])


def chain_distribution(
    segment: DensityMatrix, M: int, merge_tol: float = 1e-12, max_branches: int = 4096
) -> list[tuple[float, DensityMatrix]]:
    """Exact distribution of corrected final states over all swap outcomes.

    Swaps run left to right; branches whose corrected states agree within
    ``merge_tol`` are merged.  Corrected outcomes coincide in pairs, so the
    branch count roughly doubles per swap; beyond ``max_branches`` this
    raises rather than running for hours.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    seg = segment.normalize()
    dist: list[tuple[float, np.ndarray]] = [(1.0, seg.data)]
    for _ in range(M - 1):
        nxt: list[tuple[float, np.ndarray]] = []
        for w, data in dist:
            branches = kernels.bell_branches(data, seg.data, _BELL_TENSOR)
            traces = np.trace(branches, axis1=1, axis2=2).real
            total = traces.sum()
            for o in BellOutcome:
                if traces[o.value] <= 0:
                    continue
                state = _correct(branches[o.value], o) / traces[o.value]
                prob = w * traces[o.value] / total
                for i, (w2, s2) in enumerate(nxt):
                    if np.max(np.abs(s2 - state)) <= merge_tol:
                        nxt[i] = (w2 + prob, s2)
                        break
                else:
                    nxt.append((prob, state))
        dist = nxt
        if len(dist) > max_branches:
            raise ValueError(f"more than {max_branches} distinct branches; sample with run_chain instead")
    return [(w, DensityMatrix(d, (2, 2), normalized=True)) for w, d in dist]
