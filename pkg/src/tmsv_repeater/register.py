"""Two-register (L, R) state built from a lossy TMSV and N-qubit registers.

Each register holds N qubits; after a successful heralding event the
register lives in the symmetric subspace spanned by ``|I_k>``, the even
superposition of all N-qubit strings with ``k`` bright qubits.  The two-
register density matrix is indexed by ``k_L * (N + 1) + k_R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import DensityMatrix

TAIL_TOL = 1e-12


class CutoffError(ValueError):
    """Raised when a photon-number cutoff leaves too much TMSV weight behind."""


@dataclass(frozen=True)
class TmsvParams:
    """Mean photon number per mode and the squeezing phase of a TMSV source."""

    mean_n: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        if not (self.mean_n >= 0 and math.isfinite(self.mean_n)):
            raise ValueError(f"mean_n must be finite and >= 0, got {self.mean_n}")

    @property
    def ratio(self) -> float:
        """``|c_{n+1}|^2 / |c_n|^2``, the geometric ratio of the photon distribution."""
        return self.mean_n / (1.0 + self.mean_n)

    def tail_weight(self, cutoff: int) -> float:
        """Probability weight of photon numbers above ``cutoff``."""
        return self.ratio ** (cutoff + 1)


@dataclass(frozen=True)
class RegisterScenario:
    qubits_per_register: int
    theta_L: float
    theta_R: float
    tmsv: TmsvParams = field(default_factory=lambda: TmsvParams(0.5))
    eta_L: float = 1.0
    eta_R: float = 1.0

    def __post_init__(self) -> None:
        if self.qubits_per_register < 1:
            raise ValueError("qubits_per_register must be >= 1")
        for name in ("theta_L", "theta_R"):
            th = getattr(self, name)
            if not 0.0 <= th <= math.pi / 2 + 1e-15:
                raise ValueError(f"{name}={th} outside [0, pi/2]")
        for name in ("eta_L", "eta_R"):
            eta = getattr(self, name)
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"{name}={eta} outside [0, 1]")

    @property
    def N(self) -> int:
        return self.qubits_per_register

    @property
    def lossless(self) -> bool:
        return self.eta_L == 1.0 and self.eta_R == 1.0


def tmsv_amplitude(n: int, p: TmsvParams) -> complex:
    if n < 0:
        raise ValueError("photon number must be >= 0")
    if p.mean_n == 0:
        return 1.0 + 0j if n == 0 else 0j
    mag = math.sqrt(p.ratio**n / (1.0 + p.mean_n))
    return complex((-np.exp(1j * p.phase)) ** n * mag)


def beta_amp(n: int, theta: float, N: int) -> float:
    if not 0 <= n <= N:
        raise ValueError(f"n={n} outside [0, {N}]")
    return math.cos(theta) ** n * math.sin(theta) ** (N - n)


def delta_amp(n: int, theta: float, N: int) -> float:
    """Amplitude with which ``n`` arriving photons leave the register in ``|I_{N-n}>``."""
    if not 0 <= n <= N:
        raise ValueError(f"n={n} outside [0, {N}]")
    pref = math.factorial(N) / (2.0**N * float(N) ** n * math.factorial(N - n))
    return math.sqrt(pref) * beta_amp(n, theta, N)


def loss_amp(n: int, l: int, eta: float) -> float:
    """Amplitude for losing ``l`` of ``n`` photons in a channel of transmission ``eta``."""
    if not 0 <= l <= n:
        raise ValueError(f"lost photons l={l} outside [0, {n}]")
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta outside [0, 1]")
    kept = n - l
    # 0**0 == 1 handles the lossless and fully lossy limits.
    return math.sqrt(math.comb(n, kept)) * eta ** (kept / 2) * (1.0 - eta) ** (l / 2)


def lambda_element(n: int, m: int, l: int, r: int, sc: RegisterScenario) -> complex:
    """Coefficient of ``|I_{N-n+l}><I_{N-m+l}| (x) |I_{N-n+r}><I_{N-m+r}|``."""
    if not (0 <= l <= min(n, m) and 0 <= r <= min(n, m)):
        raise ValueError("require 0 <= l, r <= min(n, m)")
    N = sc.N
    if n - l > N or n - r > N or m - l > N or m - r > N:
        return 0j
    cn = tmsv_amplitude(n, sc.tmsv)
    cm = tmsv_amplitude(m, sc.tmsv)
    eps = (
        loss_amp(n, r, sc.eta_R)
        * loss_amp(n, l, sc.eta_L)
        * loss_amp(m, r, sc.eta_R)
        * loss_amp(m, l, sc.eta_L)
    )
    dlt = (
        delta_amp(n - l, sc.theta_L, N)
        * delta_amp(n - r, sc.theta_R, N)
        * delta_amp(m - l, sc.theta_L, N)
        * delta_amp(m - r, sc.theta_R, N)
    )
    return cn * np.conj(cm) * eps * dlt


def default_cutoff(p: TmsvParams, tol: float = TAIL_TOL) -> int:
    """Smallest photon cutoff whose neglected TMSV weight is below ``tol``."""
    q = p.ratio
    if q == 0:
        return 0
    return max(0, math.ceil(math.log(tol) / math.log(q)) - 1)


def photon_cutoff(sc: RegisterScenario, n_cutoff: int | None = None, tol: float = TAIL_TOL) -> int:
    """Photon-number range needed to build the register state of ``sc``.

    Without loss the Fock transform kills every n > N, so N suffices.  With
    one lossless side the same bound applies through that side's step gate.
    """
    N = sc.N
    if sc.eta_L == 1.0 or sc.eta_R == 1.0:
        return N
    if n_cutoff is None:
        return max(N, default_cutoff(sc.tmsv, tol))
    if n_cutoff < N:
        raise CutoffError(f"cutoff {n_cutoff} below register size {N}")
    if sc.tmsv.tail_weight(n_cutoff) >= tol:
        raise CutoffError(f"cutoff {n_cutoff} leaves tail weight {sc.tmsv.tail_weight(n_cutoff):.3e} >= {tol:g}")
    return n_cutoff


def build_register_density(sc: RegisterScenario, n_cutoff: int | None = None) -> DensityMatrix:
    """Unnormalized register state; its trace times ``4**N`` is the success probability.

    Tracing out the loss environment leaves one pure branch per pair of
    lost-photon counts ``(l, r)``; the state is the sum of their projectors.
    """
    N = sc.N
    nmax = photon_cutoff(sc, n_cutoff)
    d = N + 1
    c = np.array([tmsv_amplitude(n, sc.tmsv) for n in range(nmax + 1)])
    dL = np.array([delta_amp(k, sc.theta_L, N) for k in range(d)])
    dR = np.array([delta_amp(k, sc.theta_R, N) for k in range(d)])
    rho = np.zeros((d * d, d * d), dtype=complex)
    for l in range(nmax + 1):
        for r in range(nmax + 1):
            v = np.zeros(d * d, dtype=complex)
            for n in range(max(l, r), nmax + 1):
                if n - l > N or n - r > N:
                    continue
                amp = c[n] * loss_amp(n, l, sc.eta_L) * loss_amp(n, r, sc.eta_R) * dL[n - l] * dR[n - r]
                if amp == 0:
                    continue
                v[(N - n + l) * d + (N - n + r)] += amp
            if np.any(v):
                rho += np.outer(v, v.conj())
    return DensityMatrix(rho, (d, d))


def success_probability(rho: DensityMatrix, N: int) -> float:
    p = 4.0**N * rho.trace
    if p > 1.0 + 1e-12:
        raise ValueError(f"success probability {p} > 1: invalid scenario or cutoff")
    return p


def lossless_state(sc: RegisterScenario) -> np.ndarray:
    """Schmidt amplitudes of ``|I_{N-n}>_L |I_{N-n}>_R`` for n = 0..N."""
    if not sc.lossless:
        raise ValueError("lossless_state requires eta_L = eta_R = 1")
    N = sc.N
    return np.array(
        [
            tmsv_amplitude(n, sc.tmsv) * delta_amp(n, sc.theta_L, N) * delta_amp(n, sc.theta_R, N)
            for n in range(N + 1)
        ]
    )


def lossless_ket(sc: RegisterScenario) -> np.ndarray:
    """:func:`lossless_state` embedded in the (N+1)^2 register basis."""
    N = sc.N
    d = N + 1
    psi = np.zeros(d * d, dtype=complex)
    for n, a in enumerate(lossless_state(sc)):
        k = N - n
        psi[k * d + k] = a
    return psi
