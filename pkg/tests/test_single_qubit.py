import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmsv_repeater.register import TmsvParams
from tmsv_repeater.single_qubit import (
    MONOTONE_THETA_LIMIT,
    OneQubitDesign,
    UnattainableProbabilityError,
    bond_theta_L,
    bonded_prefactor,
    bonded_probability_z,
    one_qubit_density,
    optimal_mean_n,
    optimized_success_probability,
    quartic_coefficients,
    solve_theta_R,
    success_prob_bonded,
    swapped_state_analytic,
)

Q = math.pi / 4


def test_lossless_density_is_rank_one():
    rho = one_qubit_density(0.5, 0.9, TmsvParams(0.5), 1.0)
    assert np.linalg.matrix_rank(rho.data, tol=1e-14) == 1


def test_loss_entry_example():
    rho = one_qubit_density(Q, Q, TmsvParams(0.5), 0.5)
    assert rho.data[1, 1].real == pytest.approx(0.25 * (2 / 9) * 0.5 * 0.5 * 0.5, abs=1e-15)


@given(st.floats(0.0, math.pi / 2), st.floats(0.0, math.pi / 2), st.floats(0.01, 2.0), st.floats(0.01, 1.0))
def test_bright_dark_entry_vanishes(tL, tR, mean_n, eta):
    assert one_qubit_density(tL, tR, TmsvParams(mean_n), eta).data[2, 2] == 0


@pytest.mark.parametrize("eta", [0.0, 1.5])
def test_density_rejects_bad_eta(eta):
    with pytest.raises(ValueError):
        one_qubit_density(Q, Q, TmsvParams(0.5), eta)


@pytest.mark.parametrize("mean_n, expect", [(0.5, math.pi / 6), (1.0, math.atan(1 / math.sqrt(2)))])
def test_bond_examples(mean_n, expect):
    assert bond_theta_L(Q, 1.0, TmsvParams(mean_n)) == pytest.approx(expect, abs=1e-15)


@given(st.floats(0.01, 1.5), st.floats(0.01, 1.0), st.floats(0.01, 2.0))
def test_bond_equalises_populations(theta_R, eta, mean_n):
    p = TmsvParams(mean_n)
    tL = bond_theta_L(theta_R, eta, p)
    rho = one_qubit_density(tL, theta_R, p, eta).data
    assert rho[0, 0].real == pytest.approx(rho[3, 3].real, rel=1e-12, abs=1e-300)
    assert math.tan(tL) ** 2 == pytest.approx(eta * p.ratio / math.tan(theta_R) ** 2, rel=1e-12)


def test_bond_rejects_zero_angle():
    with pytest.raises(ValueError):
        bond_theta_L(0.0, 0.5, TmsvParams(0.5))


def test_bonded_probability_example():
    assert success_prob_bonded(Q, 0.5, 1.0) == pytest.approx(1 / 6, abs=1e-15)
    assert success_prob_bonded(1e-9, 0.5, 0.5) < 1e-17


def test_bonded_probability_is_four_traces():
    rng = np.random.default_rng(7)
    for _ in range(50):
        theta_R, mean_n, eta = rng.uniform(0.01, 1.5), rng.uniform(0.01, 2.0), rng.uniform(0.01, 1.0)
        p = TmsvParams(mean_n)
        rho = one_qubit_density(bond_theta_L(theta_R, eta, p), theta_R, p, eta)
        assert success_prob_bonded(theta_R, mean_n, eta) == pytest.approx(4 * rho.trace, rel=1e-12)


def test_optimal_mean_n_examples():
    assert optimal_mean_n(Q, 1.0) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert optimal_mean_n(1e-8, 0.5) < 1e-7


@given(st.floats(0.02, 1.5), st.floats(0.05, 1.0))
def test_optimal_mean_n_is_a_maximum(theta_R, eta):
    n = optimal_mean_n(theta_R, eta)
    assert 0 < n < 1
    best = success_prob_bonded(theta_R, n, eta)
    for d in (-1e-4, 1e-4):
        assert success_prob_bonded(theta_R, n + d, eta) <= best * (1 + 1e-12)


@pytest.mark.parametrize("eta", [round(0.1 * k, 1) for k in range(1, 11)])
def test_probability_increases_below_monotone_limit(eta):
    # the optimised probability grows with theta_R on (0, 0.66)
    th = np.linspace(1e-3, MONOTONE_THETA_LIMIT, 400)
    p = [optimized_success_probability(t, eta) for t in th]
    assert np.all(np.diff(p) > 0)


@pytest.mark.parametrize("p_target", [1e-4, 1e-2, 0.05])
@pytest.mark.parametrize("eta", [0.3, 0.6, 0.9])
def test_quartic_solution_residual(p_target, eta):
    th = solve_theta_R(p_target, eta)
    assert 0 < th < MONOTONE_THETA_LIMIT
    assert abs(optimized_success_probability(th, eta) - p_target) < 1e-10


@given(st.floats(1e-6, 0.1), st.floats(0.05, 1.0))
def test_quartic_roots_satisfy_polynomial(p_target, eta):
    th = solve_theta_R(p_target, eta)
    z = optimal_mean_n(th, eta)
    poly = np.polynomial.polynomial.polyval(z, quartic_coefficients(p_target, eta))
    assert abs(poly) < 1e-12
    assert bonded_probability_z(z, eta) == pytest.approx(p_target, rel=1e-10)


def test_solver_at_unit_transmission():
    # pi/4 reaches 1/6 at <n>=0.5, but the optimised curve reaches it earlier
    th = solve_theta_R(1 / 6, 1.0)
    assert th <= Q
    assert optimized_success_probability(th, 1.0) == pytest.approx(1 / 6, abs=1e-12)


@pytest.mark.parametrize("p_target", [0.5, 0.99, 1.0, -0.1])
def test_unattainable_probability(p_target):
    with pytest.raises(UnattainableProbabilityError):
        solve_theta_R(p_target, 0.3)


def test_design_invariants():
    d = OneQubitDesign.for_probability(0.01, 0.7)
    assert math.tan(d.theta_L) ** 2 == pytest.approx(d.eta * d.tmsv.ratio / math.tan(d.theta_R) ** 2, rel=1e-12)
    assert d.success_probability() == pytest.approx(0.01, rel=1e-10)
    assert 4 * d.density().trace == pytest.approx(0.01, rel=1e-10)
    assert d.loss_ratio == pytest.approx(d.density().data[1, 1].real / d.density().data[0, 0].real, rel=1e-12)


def test_swapped_state_initial_bell_form():
    rho = swapped_state_analytic(0, 0.3, 1.0)
    expect = np.zeros((4, 4))
    expect[0, 0] = expect[3, 3] = 0.5
    expect[0, 3] = expect[3, 0] = -0.5
    np.testing.assert_allclose(rho.data, expect, atol=1e-15)


@given(st.integers(0, 64), st.floats(0.01, 1.5), st.floats(0.05, 1.0), st.floats(-math.pi, math.pi))
def test_swapped_state_is_valid(s, theta_R, eta, phase):
    rho = swapped_state_analytic(s, theta_R, eta, TmsvParams(0.3, phase))
    rho.check()
    b0 = swapped_state_analytic(0, theta_R, eta)
    x0 = b0.data[1, 1].real / b0.data[0, 0].real
    assert rho.data[1, 1].real / rho.data[0, 0].real == pytest.approx((s + 1) * x0, rel=1e-12)
    assert rho.data[0, 3] / rho.data[0, 0] == pytest.approx((-np.exp(1j * phase)) ** (s + 1), abs=1e-12)


def test_unnormalized_prefactor():
    p = TmsvParams(optimal_mean_n(0.2, 0.6))
    k = bonded_prefactor(0.2, 0.6, p)
    for s in range(4):
        rho = swapped_state_analytic(s, 0.2, 0.6, p, normalized=False)
        x = (s + 1) * (1 / 0.6 - 1) * math.tan(0.2) ** 2
        assert rho.trace == pytest.approx(0.5**s * k ** (s + 1) * (2 + x), rel=1e-13)
    with pytest.raises(ValueError):
        swapped_state_analytic(1, 0.2, 0.6, normalized=False)
