"""Shared helpers: random states and tolerance settings."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from tmsv_repeater.linalg import DensityMatrix

settings.register_profile("repo", max_examples=60, deadline=None)
settings.load_profile("repo")


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Unit-trace PSD matrix from a Ginibre draw."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_state(rng: np.random.Generator, dims: tuple[int, ...], rank: int | None = None) -> DensityMatrix:
    return DensityMatrix(random_density(rng, int(np.prod(dims)), rank), dims, normalized=True)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def bell_phi_plus() -> DensityMatrix:
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return DensityMatrix.from_ket(psi, (2, 2))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
