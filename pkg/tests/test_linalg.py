import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bell_phi_plus, random_density, random_state, random_unitary
from tmsv_repeater.linalg import (
    DensityMatrix,
    InvalidStateError,
    audit_states,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
    tensor,
    von_neumann_entropy,
)

seeds = st.integers(0, 2**32 - 1)


def test_tensor_of_maximally_mixed():
    half = DensityMatrix(np.eye(2) / 2, (2,), normalized=True)
    out = tensor(half, half)
    assert out.dims == (2, 2)
    np.testing.assert_allclose(out.data, np.eye(4) / 4, atol=1e-15)


def test_tensor_of_basis_states():
    zero = DensityMatrix(np.diag([1.0, 0.0]), (2,))
    one = DensityMatrix(np.diag([0.0, 1.0]), (2,))
    np.testing.assert_allclose(tensor(zero, one).data, np.diag([0, 1, 0, 0]), atol=0)


@given(seeds)
def test_tensor_trace_is_multiplicative(seed):
    rng = np.random.default_rng(seed)
    a = DensityMatrix(random_density(rng, 2) * rng.uniform(0.1, 1), (2,))
    b = DensityMatrix(random_density(rng, 3) * rng.uniform(0.1, 1), (3,))
    assert tensor(a, b).trace == pytest.approx(a.trace * b.trace, abs=1e-14)


def test_partial_transpose_element_rule(rng):
    rho = random_state(rng, (2, 3))
    pt = partial_transpose(rho, 0).data.reshape(2, 3, 2, 3)
    t = rho.data.reshape(2, 3, 2, 3)
    for i in range(2):
        for j in range(3):
            for k in range(2):
                for l in range(3):
                    assert pt[i, j, k, l] == t[k, j, i, l]


def test_partial_transpose_of_product_state_has_no_negativity(rng):
    a, b = random_state(rng, (2,)), random_state(rng, (3,))
    pt = partial_transpose(tensor(a, b), 0)
    np.testing.assert_allclose(pt.data, np.kron(a.data.T, b.data), atol=1e-15)
    assert hermitian_eigenvalues(pt)[0] > -1e-14


def test_partial_transpose_bell_spectrum():
    w = hermitian_eigenvalues(partial_transpose(bell_phi_plus(), 1))
    np.testing.assert_allclose(w, [-0.5, 0.5, 0.5, 0.5], atol=1e-15)


@given(seeds, st.sampled_from([(2, 2), (3, 2), (2, 2, 2)]), st.integers(0, 1))
def test_partial_transpose_involution_and_invariants(seed, dims, sub):
    rho = random_state(np.random.default_rng(seed), dims)
    pt = partial_transpose(rho, sub)
    assert pt.operator
    np.testing.assert_array_equal(partial_transpose(pt, sub).data, rho.data)
    assert pt.trace == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(pt.data, pt.data.conj().T, atol=1e-15)


def test_partial_transpose_bad_index():
    with pytest.raises(IndexError):
        partial_transpose(bell_phi_plus(), 2)


def test_partial_trace_of_product(rng):
    a, b = random_state(rng, (2,)), random_state(rng, (3,))
    b = DensityMatrix(0.4 * b.data, (3,))
    np.testing.assert_allclose(partial_trace(tensor(a, b), [0]).data, a.data * 0.4, atol=1e-15)


def test_partial_trace_of_bell_state():
    np.testing.assert_allclose(partial_trace(bell_phi_plus(), [0]).data, np.eye(2) / 2, atol=1e-15)


@given(seeds)
def test_partial_trace_matches_index_loop(seed):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, (2, 3, 2))
    t = rho.data.reshape(2, 3, 2, 2, 3, 2)
    oracle = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for c in range(2):
            for ap in range(2):
                for cp in range(2):
                    oracle[2 * a + c, 2 * ap + cp] = sum(t[a, b, c, ap, b, cp] for b in range(3))
    out = partial_trace(rho, [0, 2])
    assert out.dims == (2, 2)
    np.testing.assert_allclose(out.data, oracle, atol=1e-14)


def test_partial_trace_rejects_empty_keep():
    with pytest.raises(ValueError):
        partial_trace(bell_phi_plus(), [])


@pytest.mark.parametrize(
    "m, expect",
    [(np.diag([3.0, 1.0, 2.0]), [1, 2, 3]), (np.array([[0.0, 1.0], [1.0, 0.0]]), [-1, 1])],
)
def test_hermitian_eigenvalues_examples(m, expect):
    np.testing.assert_allclose(hermitian_eigenvalues(m), expect, atol=1e-15)


def test_hermitian_eigenvalues_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))


@given(seeds, st.integers(1, 16))
def test_eigenvalue_sum_is_trace(seed, dim):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = g + g.conj().T
    assert hermitian_eigenvalues(h).sum() == pytest.approx(np.trace(h).real, abs=1e-10)


def test_entropy_examples(rng):
    assert von_neumann_entropy(DensityMatrix(np.eye(2) / 2, (2,), True)) == pytest.approx(1.0, abs=1e-14)
    assert von_neumann_entropy(bell_phi_plus()) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(random_state(rng, (3,), rank=1)) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(DensityMatrix(np.diag([0.25, 0.75]), (2,), True)) == pytest.approx(0.811278124459, abs=1e-11)


def test_entropy_rejects_unnormalized():
    with pytest.raises(InvalidStateError):
        von_neumann_entropy(DensityMatrix(np.eye(2) / 4, (2,)))


@given(seeds)
def test_entropy_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, (2,))
    u = random_unitary(rng, 2)
    rotated = DensityMatrix(u @ rho.data @ u.conj().T, (2,), True)
    assert von_neumann_entropy(rotated) == pytest.approx(von_neumann_entropy(rho), abs=1e-12)


def test_constructor_validation():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.zeros((2, 3)), (2,))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(4), (2, 3))


def test_check_flags_violations():
    with pytest.raises(InvalidStateError, match="Hermitian"):
        DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]), (2,)).check()
    with pytest.raises(InvalidStateError, match="PSD"):
        DensityMatrix(np.diag([1.5, -0.5]), (2,), True).check()
    with pytest.raises(InvalidStateError, match="trace"):
        DensityMatrix(np.eye(2), (2,), True).check()
    bell_phi_plus().check()


def test_audit_collects_constructions():
    with audit_states() as log:
        rho = bell_phi_plus()
        partial_trace(rho, [0])
    assert len(log) == 2
    assert all(m.dims for m in log)
