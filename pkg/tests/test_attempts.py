import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmsv_repeater.attempts import (
    RepeaterPlan,
    all_segments_cdf,
    all_segments_pdf,
    attempts_series_oracle,
    expected_attempts,
    geometric_pmf,
    normalized_key_rate,
    rate_factor,
    sample_attempts,
    solve_p_for_attempts,
)


@pytest.mark.parametrize("n, p, expect", [(1, 0.5, 0.5), (2, 0.5, 0.25), (3, 0.1, 0.081), (1, 1.0, 1.0)])
def test_geometric_pmf_examples(n, p, expect):
    assert geometric_pmf(n, p) == pytest.approx(expect, abs=1e-15)


@pytest.mark.parametrize("n, p, M, expect", [(1, 0.5, 2, 0.25), (2, 0.5, 2, 0.3125), (1, 0.5, 1, 0.5)])
def test_pdf_examples(n, p, M, expect):
    assert all_segments_pdf(n, p, M) == pytest.approx(expect, abs=1e-15)


@given(st.floats(0.01, 1.0), st.integers(1, 20))
def test_pdf_sums_to_one_and_matches_cdf(p, M):
    n = np.arange(1, 6000)
    pdf = all_segments_pdf(n, p, M)
    assert pdf.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.cumsum(pdf)[9] == pytest.approx(all_segments_cdf(10, p, M), abs=1e-12)


@pytest.mark.parametrize("p, M, expect", [(0.5, 1, 2.0), (0.5, 2, 8 / 3), (1.0, 7, 1.0), (0.25, 1, 4.0)])
def test_expected_attempts_examples(p, M, expect):
    assert expected_attempts(p, M) == pytest.approx(expect, rel=1e-12)


def test_rate_factor_examples():
    assert rate_factor(0.5, 1) == pytest.approx(math.log(2), rel=1e-12)
    assert rate_factor(1.0, 4) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("p", [0.3, 0.05, 0.01])
@pytest.mark.parametrize("M", [1, 2, 5, 8])
def test_series_match_inclusion_exclusion(p, M):
    mean, inv = attempts_series_oracle(p, M)
    assert expected_attempts(p, M) == pytest.approx(mean, rel=1e-10)
    assert rate_factor(p, M) == pytest.approx(inv, rel=1e-10)


@pytest.mark.parametrize("A", [2.0, 10.0, 100.0, 500.0])
@pytest.mark.parametrize("M", [1, 2, 10, 64])
def test_solve_round_trip(A, M):
    p = solve_p_for_attempts(A, M)
    assert expected_attempts(p, M) == pytest.approx(A, rel=1e-10)


def test_solve_single_segment_is_inverse():
    assert solve_p_for_attempts(100.0, 1) == pytest.approx(0.01, rel=1e-14)
    assert solve_p_for_attempts(1.0, 5) == 1.0


def test_expected_attempts_grows_with_segments():
    e = [expected_attempts(0.02, M) for M in range(1, 30)]
    assert np.all(np.diff(e) > 0)


def test_monte_carlo_agrees():
    rng = np.random.default_rng(99)
    draws = sample_attempts(0.1, 6, 200_000, rng)
    for value, stat in ((expected_attempts(0.1, 6), draws), (rate_factor(0.1, 6), 1.0 / draws)):
        se = stat.std() / math.sqrt(stat.size)
        assert abs(stat.mean() - value) < 4 * se


def test_normalized_key_rate():
    assert normalized_key_rate(0.5, 0.5, 1) == pytest.approx(0.5 * math.log(2))
    assert normalized_key_rate(0.0, 1e-9, 3) == 0.0
    with pytest.raises(ValueError):
        normalized_key_rate(-0.1, 0.5, 1)


@pytest.mark.parametrize("call", [
    lambda: expected_attempts(5e-7, 2),
    lambda: solve_p_for_attempts(2e6, 1),
    lambda: expected_attempts(0.0, 1),
    lambda: expected_attempts(0.5, 0),
    lambda: solve_p_for_attempts(0.5, 1),
    lambda: geometric_pmf(0, 0.5),
])
def test_rejects_bad_input(call):
    with pytest.raises(ValueError):
        call()


def test_plan_transmissions():
    plan = RepeaterPlan(4, 25.0, 0.2, 100.0)
    assert plan.total_km == 100.0
    assert plan.segment_eta == pytest.approx(10 ** -0.5)
    assert plan.total_eta == pytest.approx(0.01)
    with pytest.raises(ValueError):
        RepeaterPlan(2, 10.0, allowed_attempts_A=1.0)
