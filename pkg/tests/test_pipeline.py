import math

import numpy as np
import pytest

from tmsv_repeater.attempts import RepeaterPlan, normalized_key_rate
from tmsv_repeater.experiments.pipeline import (
    chain_metrics,
    chain_summary,
    coherence_phase,
    design_segment,
    expected_chain_metrics,
    first_crossing,
    first_zero,
    level_crossing,
    mean_stderr,
    plob_at,
)
from tmsv_repeater.metrics import devetak_winter_key, plob_bound
from tmsv_repeater.register import TmsvParams
from tmsv_repeater.single_qubit import OneQubitDesign, swapped_state_analytic


def test_design_segment_round_trip():
    sd = design_segment(RepeaterPlan(4, 10.0, 0.2, 100.0))
    assert sd.attainable
    assert sd.design.success_probability() == pytest.approx(sd.p, rel=1e-10)
    # a very short budget asks for more than the source can deliver
    assert not design_segment(RepeaterPlan(1, 10.0, 0.2, 1.5)).attainable


def test_coherence_phase():
    rho = swapped_state_analytic(0, 0.3, 0.8, TmsvParams(0.2, 0.4))
    assert abs(coherence_phase(rho)) == pytest.approx(1.0)
    assert coherence_phase(rho) == pytest.approx(-np.exp(0.4j), abs=1e-12)


def test_single_segment_metrics_are_deterministic():
    d = OneQubitDesign.for_probability(0.01, 0.6)
    seg = d.density()
    m = chain_metrics(seg, 1, np.random.default_rng(0))
    assert m.key == pytest.approx(devetak_winter_key(seg.normalize()).key_bits_per_success, abs=1e-14)
    assert m.chsh > 2.0 and 0.0 <= m.qber < 0.5


def test_exact_average_agrees_with_sampling():
    seg = OneQubitDesign.for_probability(0.01, 0.6).density()
    exact = expected_chain_metrics(seg, 5)
    rng = np.random.default_rng(5)
    s = chain_summary(seg, 5, 0.01, "sampled", 400, rng)
    for (mean, se), ref in ((s.key, exact.key), (s.chsh, exact.chsh), (s.qber, exact.qber)):
        assert abs(mean - ref) <= 4 * se + 1e-12


def test_exact_summary_keyrate():
    seg = OneQubitDesign.for_probability(0.02, 0.6).density()
    s = chain_summary(seg, 1, 0.02, "exact", 1, np.random.default_rng(0))
    assert s.keyrate[0] == pytest.approx(normalized_key_rate(s.key[0], 0.02, 1), rel=1e-14)
    assert s.keyrate[1] == 0.0
    with pytest.raises(ValueError):
        chain_summary(seg, 1, 0.02, "median", 1, np.random.default_rng(0))


def test_mean_stderr():
    assert mean_stderr([2.0, 2.0, 2.0]) == (2.0, 0.0)
    m, se = mean_stderr([1.0, 2.0, 3.0])
    assert m == 2.0 and se == pytest.approx(1 / math.sqrt(3))


def test_crossings():
    d = [0.0, 10.0, 20.0, 30.0]
    assert level_crossing(d, [3.0, 2.0, 1.0, -1.0], 0.0) == pytest.approx(25.0)
    assert level_crossing(d, [3.0, 2.0, 1.0, 0.5], 0.0) is None
    assert level_crossing(d, [-1.0, 2.0, 1.0, 0.5], 0.0) == 0.0
    assert first_zero(d, [3.0, 0.0, 1.0, 0.0]) == 10.0
    # log-linear interpolation: ratio goes 1/e -> e, crosses halfway
    b = [1.0, 1.0, 1.0, 1.0]
    assert first_crossing(d, [0.5, math.exp(-1), math.e, 3.0], b) == pytest.approx(15.0)
    assert first_crossing(d, [0.0, 2.0, 3.0, 4.0], b) == 10.0
    assert first_crossing(d, [0.5, 0.5, 0.5, 0.5], b) is None


def test_plob_at():
    assert plob_at(50.0) == pytest.approx(plob_bound(0.1))
