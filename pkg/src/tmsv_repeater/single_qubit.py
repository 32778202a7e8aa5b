"""Closed-form pipeline for one qubit per register with loss on the right channel.

Basis order is |00>, |01>, |10>, |11> with 1 = bright.  The chain of
choices used by the repeater is::

    p_target -> theta_R (quartic in z) -> <n> = z -> theta_L (bond)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .linalg import DensityMatrix
from .register import TmsvParams, tmsv_amplitude

# Below this angle the bonded success probability is monotone in theta_R.
MONOTONE_THETA_LIMIT = 0.66


class UnattainableProbabilityError(ValueError):
    """Raised when no superposition angle reaches the requested success probability."""


def _check_eta(eta: float) -> None:
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta={eta} outside (0, 1]")


def one_qubit_density(theta_L: float, theta_R: float, p: TmsvParams, eta: float) -> DensityMatrix:
    """Unnormalized N=1 register state for a lossless left and lossy right channel."""
    _check_eta(eta)
    c0 = tmsv_amplitude(0, p)
    c1 = tmsv_amplitude(1, p)
    sL, cL = math.sin(theta_L), math.cos(theta_L)
    sR, cR = math.sin(theta_R), math.cos(theta_R)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = abs(c1) ** 2 * eta * cL**2 * cR**2
    rho[1, 1] = abs(c1) ** 2 * (1 - eta) * cL**2 * sR**2
    rho[3, 3] = abs(c0) ** 2 * sL**2 * sR**2
    rho[0, 3] = c1 * np.conj(c0) * math.sqrt(eta) * sR * sL * cR * cL
    rho[3, 0] = np.conj(rho[0, 3])
    return DensityMatrix(rho / 4, (2, 2))


def bond_theta_L(theta_R: float, eta: float, p: TmsvParams) -> float:
    """Left angle that equalises the |00> and |11> populations."""
    _check_eta(eta)
    if not 0.0 < theta_R < math.pi / 2:
        raise ValueError("theta_R must lie in (0, pi/2)")
    return math.atan(math.sqrt(eta * p.ratio) / math.tan(theta_R))


def success_prob_bonded(theta_R: float, mean_n: float, eta: float) -> float:
    """Heralding probability (all four detector patterns) with the bond applied."""
    _check_eta(eta)
    c0sq = 1.0 / (1.0 + mean_n)
    c1sq = mean_n / (1.0 + mean_n) ** 2
    t2 = math.tan(theta_R) ** 2
    return math.sin(theta_R) ** 2 * c1sq * c0sq * (2 * eta + (1 - eta) * t2) / (t2 * c0sq + eta * c1sq)


def optimal_mean_n(theta_R: float, eta: float) -> float:
    """Mean photon number maximising :func:`success_prob_bonded` at fixed angle."""
    _check_eta(eta)
    t2 = math.tan(theta_R) ** 2
    return math.sqrt(1.0 - eta / (eta + t2))


def theta_R_from_z(z: float, eta: float) -> float:
    return math.atan(math.sqrt(eta * z * z / (1.0 - z * z)))


def bonded_probability_z(z: float, eta: float) -> float:
    """Success probability at optimal squeezing, written in ``z = <n>``."""
    return eta * z * z * (2 - (1 + eta) * z * z) / ((1 - (1 - eta) * z * z) * (1 + z) ** 2)


def optimized_success_probability(theta_R: float, eta: float) -> float:
    return success_prob_bonded(theta_R, optimal_mean_n(theta_R, eta), eta)


def quartic_coefficients(p_target: float, eta: float) -> np.ndarray:
    """Coefficients (constant term first) of the quartic whose roots give z."""
    p = p_target
    return np.array([p, 2 * p, eta * (p - 2), p * (2 * eta - 2), -p + (1 + p) * eta + eta**2])


def solve_theta_R(p_target: float, eta: float) -> float:
    """Smallest angle at which the optimised success probability equals ``p_target``.

    Roots come from the companion matrix of the quartic in z; each real root
    in (0, 1) is polished with a bracketing solve on the z-form probability.
    """
    _check_eta(eta)
    if not 0.0 < p_target < 1.0:
        raise UnattainableProbabilityError(f"p_target={p_target} outside (0, 1)")
    coeffs = quartic_coefficients(p_target, eta)
    roots = np.roots(coeffs[::-1])
    zs = sorted(r.real for r in roots if abs(r.imag) < 1e-7 and 0.0 < r.real < 1.0)
    f = lambda z: bonded_probability_z(z, eta) - p_target  # noqa: E731
    for z0 in zs:
        # bracket around the companion-matrix estimate, then refine
        lo, hi = max(z0 * (1 - 1e-6) - 1e-12, 1e-300), min(z0 * (1 + 1e-6) + 1e-12, 1 - 1e-15)
        if f(lo) * f(hi) > 0:
            if abs(f(z0)) < 1e-12:
                return theta_R_from_z(z0, eta)
            continue
        z = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return theta_R_from_z(z, eta)
    raise UnattainableProbabilityError(f"no z in (0, 1) reaches p={p_target} at eta={eta}")


@dataclass(frozen=True)
class OneQubitDesign:
    """A bonded single-qubit segment design."""

    theta_R: float
    theta_L: float
    mean_n: float
    eta: float
    p_target: float

    @classmethod
    def for_probability(cls, p_target: float, eta: float) -> "OneQubitDesign":
        theta_R = solve_theta_R(p_target, eta)
        mean_n = optimal_mean_n(theta_R, eta)
        theta_L = bond_theta_L(theta_R, eta, TmsvParams(mean_n))
        return cls(theta_R, theta_L, mean_n, eta, p_target)

    @property
    def tmsv(self) -> TmsvParams:
        return TmsvParams(self.mean_n)

    @property
    def loss_ratio(self) -> float:
        """Loss population relative to the |00> population, ``(1/eta - 1) tan^2 theta_R``."""
        return (1.0 / self.eta - 1.0) * math.tan(self.theta_R) ** 2

    def density(self) -> DensityMatrix:
        return one_qubit_density(self.theta_L, self.theta_R, self.tmsv, self.eta)

    def success_probability(self) -> float:
        return success_prob_bonded(self.theta_R, self.mean_n, self.eta)


def bonded_prefactor(theta_R: float, eta: float, p: TmsvParams) -> float:
    """Scalar multiplying the bonded 4x4 matrix (includes the 1/4)."""
    c0sq = abs(tmsv_amplitude(0, p)) ** 2
    c1sq = abs(tmsv_amplitude(1, p)) ** 2
    t2 = math.tan(theta_R) ** 2
    return 0.25 * math.sin(theta_R) ** 2 * c1sq * c0sq * eta / (t2 * c0sq + eta * c1sq)


def swapped_state_analytic(
    s: int,
    theta_R: float,
    eta: float,
    p: TmsvParams | None = None,
    normalized: bool = True,
) -> DensityMatrix:
    """Bonded state after ``s`` swaps that all returned the Phi+ outcome.

    With ``normalized=False`` the matrix carries the prefactor
    ``(1/2)**s * K**(s+1)``; that form needs the TMSV parameters.
    """
    if s < 0:
        raise ValueError("swap count must be >= 0")
    _check_eta(eta)
    phase = 0.0 if p is None else p.phase
    x = (s + 1) * (1.0 / eta - 1.0) * math.tan(theta_R) ** 2
    ph = (-np.exp(1j * phase)) ** (s + 1)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = 1.0
    m[1, 1] = x
    m[0, 3] = ph
    m[3, 0] = np.conj(ph)
    if normalized:
        return DensityMatrix(m / (2.0 + x), (2, 2), normalized=True)
    if p is None:
        raise ValueError("unnormalized form needs TMSV parameters")
    k = bonded_prefactor(theta_R, eta, p)
    return DensityMatrix(0.5**s * k ** (s + 1) * m, (2, 2))
