"""Truncated Fock-space simulator of the single-qubit heralding circuit.

A :class:`FockSystem` is a labelled list of modes (qubits are two-level
modes) holding either a ket tensor of shape ``dims`` or a density tensor of
shape ``dims + dims``.  Operations never renormalize: post-selection leaves
the success probability in the norm.

Beamsplitter convention::

    a^dag -> t a^dag + r b^dag,    b^dag -> -r a^dag + t b^dag
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import PSD_TOL, DensityMatrix, hermitian_eigh
from .register import CutoffError, RegisterScenario, TmsvParams, default_cutoff, tmsv_amplitude

FOCK_TAIL_TOL = 1e-10
UNITARY_TOL = 1e-10
_OVERFLOW_TOL = 1e-14


@dataclass(frozen=True)
class ErrorModelParams:
    """Imperfections; channel transmissions multiply those of the scenario."""

    eta_chL: float = 1.0
    eta_chR: float = 1.0
    eta_coupling: float = 1.0
    eta_detector: float = 1.0
    p_dark: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eta_chL", "eta_chR", "eta_coupling", "eta_detector", "p_dark"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    @property
    def ideal(self) -> bool:
        return self == ErrorModelParams()


@dataclass(frozen=True, eq=False)
class FockSystem:
    modes: tuple[str, ...]
    dims: tuple[int, ...]
    data: np.ndarray
    pure: bool

    def __post_init__(self) -> None:
        modes = tuple(self.modes)
        dims = tuple(int(d) for d in self.dims)
        if len(set(modes)) != len(modes):
            raise ValueError(f"duplicate mode labels {modes}")
        if len(modes) != len(dims):
            raise ValueError("modes and dims differ in length")
        data = np.asarray(self.data, dtype=complex)
        shape = dims if self.pure else dims + dims
        if data.shape != shape:
            raise ValueError(f"state shape {data.shape} does not match {shape}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", data)

    def axis(self, mode: str) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise KeyError(f"no mode {mode!r} in {self.modes}") from None

    def cutoff(self, mode: str) -> int:
        """Largest photon number representable in ``mode``."""
        return self.dims[self.axis(mode)] - 1

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def norm(self) -> float:
        """Squared norm of a ket or trace of a density operator."""
        if self.pure:
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data.reshape(self.dim, self.dim)).real)


def _replace(sys: FockSystem, data: np.ndarray, dims: Sequence[int] | None = None, pure: bool | None = None) -> FockSystem:
    return FockSystem(sys.modes, tuple(sys.dims if dims is None else dims), data, sys.pure if pure is None else pure)


def to_density(sys: FockSystem) -> FockSystem:
    if not sys.pure:
        return sys
    psi = sys.data.reshape(-1)
    rho = np.outer(psi, psi.conj()).reshape(sys.dims + sys.dims)
    return _replace(sys, rho, pure=False)


def to_density_matrix(sys: FockSystem) -> DensityMatrix:
    d = to_density(sys)
    return DensityMatrix(d.data.reshape(d.dim, d.dim), d.dims)


def tensor_systems(a: FockSystem, b: FockSystem) -> FockSystem:
    modes = a.modes + b.modes
    dims = a.dims + b.dims
    if a.pure and b.pure:
        return FockSystem(modes, dims, np.multiply.outer(a.data, b.data), True)
    ra, rb = to_density(a).data, to_density(b).data
    na, nb = len(a.dims), len(b.dims)
    t = np.multiply.outer(ra, rb)
    # (a_row, a_col, b_row, b_col) -> (a_row, b_row, a_col, b_col)
    order = list(range(na)) + list(range(2 * na, 2 * na + nb)) + list(range(na, 2 * na)) + list(range(2 * na + nb, 2 * na + 2 * nb))
    return FockSystem(modes, dims, t.transpose(order), False)


def add_systems(a: FockSystem, b: FockSystem) -> FockSystem:
    if a.modes != b.modes or a.dims != b.dims:
        raise ValueError("systems must share modes and dims")
    return _replace(a, to_density(a).data + to_density(b).data, pure=False)


def _apply_op(data: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    k = len(axes)
    t = np.tensordot(op, data, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(t, list(range(k)), list(axes))


def apply_operator(sys: FockSystem, modes: Sequence[str], op: np.ndarray) -> FockSystem:
    """Apply ``op`` (shape out_dims + in_dims) to ``modes``; densities get ``op rho op^dag``."""
    axes = [sys.axis(m) for m in modes]
    k = len(axes)
    in_dims = tuple(sys.dims[a] for a in axes)
    if op.shape[k:] != in_dims:
        raise ValueError(f"operator input shape {op.shape[k:]} does not match mode dims {in_dims}")
    dims = list(sys.dims)
    for a, d in zip(axes, op.shape[:k]):
        dims[a] = d
    if sys.pure:
        return _replace(sys, _apply_op(sys.data, op, axes), dims)
    n = len(sys.dims)
    data = _apply_op(sys.data, op, axes)
    data = _apply_op(data, op.conj(), [a + n for a in axes])
    return _replace(sys, data, dims)


def apply_qubit_gate(sys: FockSystem, mode: str, u: np.ndarray) -> FockSystem:
    return apply_operator(sys, [mode], np.asarray(u, dtype=complex))


def pad_mode(sys: FockSystem, mode: str, dim: int) -> FockSystem:
    """Enlarge the truncation of ``mode`` to ``dim`` levels (new levels empty)."""
    old = sys.dims[sys.axis(mode)]
    if dim < old:
        raise ValueError("pad_mode cannot shrink a mode")
    return apply_operator(sys, [mode], np.eye(dim, old, dtype=complex))


def prepare_tmsv(
    p: TmsvParams,
    cutoff: int | None = None,
    modes: tuple[str, str] = ("a", "b"),
    tail_tol: float = FOCK_TAIL_TOL,
) -> FockSystem:
    """Truncated TMSV ``sum_{n <= cutoff} c_n |n, n>`` (not renormalized)."""
    if cutoff is None:
        cutoff = default_cutoff(p, tail_tol)
    if cutoff < 0:
        raise CutoffError("cutoff must be >= 0")
    tail = p.tail_weight(cutoff)
    if tail >= tail_tol:
        raise CutoffError(f"cutoff {cutoff} leaves TMSV tail weight {tail:.3e} >= {tail_tol:g}")
    d = cutoff + 1
    psi = np.zeros((d, d), dtype=complex)
    for n in range(d):
        psi[n, n] = tmsv_amplitude(n, p)
    return FockSystem(modes, (d, d), psi, True)


def prepare_qubit_emitter(theta: float, modes: tuple[str, str] = ("q", "f")) -> FockSystem:
    """``cos(theta)|0>_q|0>_f + sin(theta)|1>_q|1>_f``; qubit level 1 is bright."""
    psi = np.zeros((2, 2), dtype=complex)
    psi[0, 0] = math.cos(theta)
    psi[1, 1] = math.sin(theta)
    return FockSystem(modes, (2, 2), psi, True)


def _frozen(a: np.ndarray) -> np.ndarray:
    # cached operators are shared between callers
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=256)
def beamsplitter_tensor(da: int, db: int, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Beamsplitter on truncated modes and the weight each input level loses to truncation.

    Returns ``(U, overflow)`` with ``U[n', m', n, m]`` and ``overflow[n, m]``.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("transmission amplitude must lie in [0, 1]")
    r = math.sqrt(max(0.0, 1.0 - t * t))
    u = np.zeros((da, db, da, db))
    overflow = np.zeros((da, db))
    fact = [math.factorial(k) for k in range(da + db)]
    for n in range(da):
        for m in range(db):
            amps: dict[tuple[int, int], float] = {}
            for j in range(n + 1):
                cj = math.comb(n, j) * t**j * r ** (n - j)
                if cj == 0.0:
                    continue
                for k in range(m + 1):
                    ck = math.comb(m, k) * (-r) ** (m - k) * t**k
                    if ck == 0.0:
                        continue
                    key = (j + m - k, n - j + k)
                    amps[key] = amps.get(key, 0.0) + cj * ck
            scale = 1.0 / math.sqrt(fact[n] * fact[m])
            lost = 0.0
            for (na, nb), c in amps.items():
                amp = c * scale * math.sqrt(fact[na] * fact[nb])
                if na < da and nb < db:
                    u[na, nb, n, m] += amp
                else:
                    lost += amp * amp
            overflow[n, m] = lost
    return _frozen(u.astype(complex)), _frozen(overflow)


def _populated(sys: FockSystem, axes: Sequence[int]) -> np.ndarray:
    """Boolean table over the levels of ``axes`` with nonzero weight."""
    n = len(sys.dims)
    if sys.pure:
        w = np.abs(sys.data) ** 2
    else:
        w = np.abs(np.diagonal(sys.data.reshape(sys.dim, sys.dim))).reshape(sys.dims)
    other = tuple(i for i in range(n) if i not in axes)
    w = w.sum(axis=other) if other else w
    order = np.argsort(np.argsort(axes))
    return np.transpose(w, order) > 0


def apply_beamsplitter(sys: FockSystem, mode_a: str, mode_b: str, transmission_amp: float) -> FockSystem:
    """Beamsplitter between two modes; raises if a populated level would leave the truncation."""
    if mode_a == mode_b:
        raise ValueError("beamsplitter needs two distinct modes")
    ia, ib = sys.axis(mode_a), sys.axis(mode_b)
    u, overflow = beamsplitter_tensor(sys.dims[ia], sys.dims[ib], transmission_amp)
    pop = _populated(sys, [ia, ib])
    bad = pop & (overflow > _OVERFLOW_TOL)
    if np.any(bad):
        n, m = map(int, np.argwhere(bad)[0])
        raise CutoffError(f"beamsplitter input |{n},{m}> overflows the truncation of {mode_a!r}/{mode_b!r}")
    return apply_operator(sys, [mode_a, mode_b], u)


@functools.lru_cache(maxsize=256)
def loss_kraus(dim: int, eta: float) -> np.ndarray:
    """Kraus operators ``E_l|n> = sqrt(C(n,l) eta^(n-l) (1-eta)^l)|n-l>``, shape (dim, dim, dim)."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta outside [0, 1]")
    k = np.zeros((dim, dim, dim))
    for l in range(dim):
        for n in range(l, dim):
            k[l, n - l, n] = math.sqrt(math.comb(n, l) * eta ** (n - l) * (1.0 - eta) ** l)
    return _frozen(k.astype(complex))


def apply_loss(sys: FockSystem, mode: str, eta: float) -> FockSystem:
    """Pure-loss channel on ``mode``; the result is a density operator."""
    rho = to_density(sys)
    kraus = loss_kraus(rho.dims[rho.axis(mode)], eta)
    out = None
    for e in kraus:
        if not np.any(e):
            continue
        term = apply_operator(rho, [mode], e).data
        out = term if out is None else out + term
    return _replace(rho, out)


def dilate_loss(sys: FockSystem, mode: str, eta: float, env: str) -> FockSystem:
    """Loss as an isometry onto a new environment mode ``env`` holding the lost photons.

    Tracing out ``env`` recovers :func:`apply_loss`.
    """
    if not sys.pure:
        raise ValueError("dilate_loss needs a pure state")
    ax = sys.axis(mode)
    kraus = loss_kraus(sys.dims[ax], eta)
    # kraus[l, n', n] -> isometry with the lost count as a trailing mode
    data = np.tensordot(kraus, sys.data, axes=([2], [ax]))
    data = np.moveaxis(data, [0, 1], [sys.data.ndim, ax])
    return FockSystem(sys.modes + (env,), sys.dims + (kraus.shape[0],), data, True)


@functools.lru_cache(maxsize=256)
def detector_response(dim: int, eta_detector: float = 1.0, p_dark: float = 0.0) -> np.ndarray:
    """``P[r, n]``: probability of registering ``r`` counts given ``n`` incident photons.

    Binomial thinning by the detector efficiency, then at most one dark count.
    Rows run over r = 0..dim so every column sums to one.
    """
    thin = np.zeros((dim + 1, dim))
    for n in range(dim):
        for k in range(n + 1):
            thin[k, n] = math.comb(n, k) * eta_detector**k * (1.0 - eta_detector) ** (n - k)
    resp = (1.0 - p_dark) * thin
    resp[1:] += p_dark * thin[:-1]
    return _frozen(resp)


def measure_pnr(sys: FockSystem, mode: str, outcome: int, err: ErrorModelParams) -> FockSystem:
    """Condition on registering ``outcome`` counts in ``mode`` (unnormalized, mode kept)."""
    dim = sys.dims[sys.axis(mode)]
    if not 0 <= outcome <= dim:
        raise ValueError(f"outcome {outcome} outside 0..{dim} for mode {mode!r}")
    resp = detector_response(dim, err.eta_detector, err.p_dark)
    kraus = np.diag(np.sqrt(resp[outcome])).astype(complex)
    return apply_operator(sys, [mode], kraus)


def trace_out(sys: FockSystem, modes: Sequence[str]) -> FockSystem:
    """Partial trace over ``modes``; the result is a density operator."""
    drop = sorted(sys.axis(m) for m in modes)
    keep = [i for i in range(len(sys.dims)) if i not in drop]
    if not keep:
        raise ValueError("cannot trace out every mode")
    n = len(sys.dims)
    if sys.pure:
        psi = np.moveaxis(sys.data, keep, list(range(len(keep))))
        kd = int(np.prod([sys.dims[i] for i in keep]))
        m = psi.reshape(kd, -1)
        rho = m @ m.conj().T
    else:
        letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
        row = list(letters[:n])
        col = list(letters[n : 2 * n])
        for i in drop:
            col[i] = row[i]
        out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
        rho = np.einsum("".join(row) + "".join(col) + "->" + out, sys.data)
    kdims = tuple(sys.dims[i] for i in keep)
    return FockSystem(tuple(sys.modes[i] for i in keep), kdims, rho.reshape(kdims + kdims), False)


def purify(sys: FockSystem, env: str) -> FockSystem:
    """Pure state on ``sys.modes + (env,)`` whose reduction to ``sys.modes`` is ``sys``."""
    if sys.pure:
        return sys
    w, v = hermitian_eigh(sys.data.reshape(sys.dim, sys.dim))
    if w[0] < -PSD_TOL * max(1.0, float(w[-1])):
        raise ValueError(f"state is not PSD (eigenvalue {w[0]:.3e})")
    keep = w > 0
    if not keep.any():
        # zero operator: keep one empty environment level
        keep[-1] = True
        w = np.zeros_like(w)
    psi = v[:, keep] * np.sqrt(w[keep])
    return FockSystem(sys.modes + (env,), sys.dims + (int(keep.sum()),), psi.reshape(sys.dims + (-1,)), True)


_Z = np.diag([1.0, -1.0]).astype(complex)
_BALANCED = 1.0 / math.sqrt(2.0)
# (T count, B count) patterns heralding one photon at a register
_ACCEPTED = ((1, 0), (0, 1))


def _herald(
    ket: FockSystem, qubit: str, field: str, channel: str, eta_channel: float, err: ErrorModelParams
) -> FockSystem:
    """Run one register's optics and sum the accepted, phase-corrected branches.

    The channel mode loses photons, the emitter field suffers coupling loss,
    both meet on a balanced beamsplitter and are counted: detector T sees the
    field output port, detector B the channel port.  A B click flips the
    qubit phase with Z.  Every mode except the qubit and any spectator modes
    is traced out.
    """
    env_c, env_f = f"{channel}_lost", f"{field}_lost"
    k = dilate_loss(ket, channel, eta_channel, env_c)
    k = dilate_loss(k, field, err.eta_coupling, env_f)
    d = k.dims[k.axis(channel)] + k.dims[k.axis(field)] - 1
    k = pad_mode(pad_mode(k, channel, d), field, d)
    k = apply_beamsplitter(k, channel, field, _BALANCED)
    total: FockSystem | None = None
    for t_count, b_count in _ACCEPTED:
        kb = measure_pnr(measure_pnr(k, field, t_count, err), channel, b_count, err)
        if b_count:
            kb = apply_qubit_gate(kb, qubit, _Z)
        red = trace_out(kb, [field, channel, env_c, env_f])
        total = red if total is None else add_systems(total, red)
    assert total is not None
    return total


def simulate_segment(
    sc: RegisterScenario,
    err: ErrorModelParams | None = None,
    cutoff: int | None = None,
    tail_tol: float = FOCK_TAIL_TOL,
) -> DensityMatrix:
    """Two-qubit state heralded by one accepted click pattern at each register.

    The trace is the success probability summed over all four accepted
    patterns.  Without errors this equals four times the closed-form
    single-pattern state.
    """
    if sc.N != 1:
        raise ValueError("the optical simulator covers one qubit per register")
    err = ErrorModelParams() if err is None else err
    if cutoff is None:
        cutoff = max(12, default_cutoff(sc.tmsv, tail_tol))
    tmsv = prepare_tmsv(sc.tmsv, cutoff, ("aL", "aR"), tail_tol)
    left = tensor_systems(prepare_qubit_emitter(sc.theta_L, ("qL", "fL")), tmsv)
    rho_left = _herald(left, "qL", "fL", "aL", sc.eta_L * err.eta_chL, err)
    right_in = tensor_systems(purify(rho_left, "mix"), prepare_qubit_emitter(sc.theta_R, ("qR", "fR")))
    out = _herald(right_in, "qR", "fR", "aR", sc.eta_R * err.eta_chR, err)
    rho = to_density_matrix(trace_out(out, ["mix"]))
    if rho.trace > 1.0 + 1e-10:
        raise ArithmeticError(f"heralding probability {rho.trace} exceeds 1")
    return rho
