import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from d2dsched.channel import ChannelRealization, realize_iid_rayleigh
from d2dsched.scheduler import (
    fair_itlinq_schedule,
    flashlinq_schedule,
    itlinq_schedule,
    modified1_schedule,
    modified2_schedule,
    modified2_threshold,
    rates_of_schedule,
    round_robin_enforced,
    sinr_threshold_schedule,
    snr_based_schedule,
    sum_rate_of_set,
    worst_case_greedy_checks,
)

from conftest import make_real

gain_matrices = st.integers(2, 6).flatmap(
    lambda k: arrays(np.float64, (k, k), elements=st.floats(1e-3, 1e3))
)


def test_two_pair_example():
    real = make_real([[4.0, 1.0], [1.0, 4.0]])
    np.testing.assert_allclose(real.sinr_all_active, [2.0, 2.0])
    both = rates_of_schedule(real, sinr_threshold_schedule(real, 2.0))
    np.testing.assert_allclose(both.per_user_rate, [math.log2(3)] * 2)
    assert both.sum_rate == pytest.approx(2 * math.log2(3))
    none = sinr_threshold_schedule(real, 2.0 + 1e-9)
    assert none.num_active == 0
    assert rates_of_schedule(real, none).sum_rate == 0.0


def test_threshold_zero_activates_all():
    real = realize_iid_rayleigh(7, 10.0, np.random.default_rng(0))
    dec = sinr_threshold_schedule(real, 0.0)
    assert dec.active.tolist() == [1] * 7
    assert np.array_equal(dec.feedback, dec.active)


def test_single_active_link_gets_snr_rate():
    real = make_real([[5.0, 100.0], [100.0, 0.01]], noise_over_power=0.5)
    rep = rates_of_schedule(real, np.array([1, 0], dtype=np.int8))
    assert rep.per_user_rate[0] == pytest.approx(math.log2(1 + 10.0))
    assert rep.per_user_rate[1] == 0.0
    assert rep.fraction_inactive == pytest.approx(0.5)


@pytest.mark.parametrize("bad", [-0.1, float("nan")])
def test_negative_threshold_rejected(bad):
    real = make_real(np.eye(2))
    with pytest.raises(ValueError):
        sinr_threshold_schedule(real, bad)
    with pytest.raises(ValueError):
        snr_based_schedule(real, bad)


def test_rates_shape_check():
    real = make_real(np.eye(3))
    with pytest.raises(ValueError):
        rates_of_schedule(real, np.ones(2, dtype=np.int8))


@given(gain_matrices, st.floats(0.0, 10.0), st.floats(0.0, 10.0))
@settings(max_examples=100, deadline=None)
def test_active_set_shrinks_with_threshold(g, a, b):
    real = make_real(g, 0.1)
    lo, hi = min(a, b), max(a, b)
    s_lo = sinr_threshold_schedule(real, lo).active
    s_hi = sinr_threshold_schedule(real, hi).active
    assert np.all(s_hi <= s_lo)


@given(gain_matrices, st.floats(0.0, 5.0), st.floats(1e-3, 1e3))
@settings(max_examples=100, deadline=None)
def test_schedule_scale_invariant(g, gamma, c):
    # scaling every gain and the noise-to-power ratio together leaves all SINRs alone
    a = make_real(g, 0.1)
    b = make_real(g * c, 0.1 * c)
    np.testing.assert_allclose(a.sinr_all_active, b.sinr_all_active, rtol=1e-12)
    clear = np.abs(a.sinr_all_active - gamma) > 1e-7 * max(gamma, 1.0)
    da = sinr_threshold_schedule(a, gamma).active
    db = sinr_threshold_schedule(b, gamma).active
    assert np.array_equal(da[clear], db[clear])
    np.testing.assert_allclose(
        rates_of_schedule(a, da).per_user_rate, rates_of_schedule(b, da).per_user_rate, rtol=1e-9, atol=1e-12
    )


@given(gain_matrices, st.floats(0.0, 5.0), st.integers(0, 5), st.integers(0, 5), st.floats(1e-3, 1e3))
@settings(max_examples=100, deadline=None)
def test_decision_is_local_to_own_row(g, gamma, row, col, value):
    # changing a gain seen by receiver r must not change any other decision
    k = g.shape[0]
    r, j = row % k, col % k
    a = make_real(g, 0.1)
    g2 = g.copy()
    g2[r, j] = value
    b = make_real(g2, 0.1)
    da = sinr_threshold_schedule(a, gamma).active
    db = sinr_threshold_schedule(b, gamma).active
    others = np.arange(k) != r
    assert np.array_equal(da[others], db[others])


@given(gain_matrices, st.floats(0.0, 5.0))
@settings(max_examples=100, deadline=None)
def test_realized_sinr_at_least_predicted(g, gamma):
    real = make_real(g, 0.1)
    dec = sinr_threshold_schedule(real, gamma)
    rep = rates_of_schedule(real, dec)
    on = dec.active.astype(bool)
    predicted = np.log2(1 + real.sinr_all_active[on])
    assert np.all(rep.per_user_rate[on] >= predicted - 1e-12)
    assert np.all(rep.per_user_rate[on] >= np.log2(1 + gamma) - 1e-12)


def test_comparison_count_equals_k():
    for k in (1, 2, 17, 300):
        real = realize_iid_rayleigh(k, 100.0, np.random.default_rng(k))
        assert sinr_threshold_schedule(real, 0.7).comparison_count == k
        assert snr_based_schedule(real, 3.0).comparison_count == k


def test_batched_threshold_schedule_matches_loop():
    batch = realize_iid_rayleigh(4, 100.0, np.random.default_rng(5), size=50)
    dec = sinr_threshold_schedule(batch, 0.5)
    rep = rates_of_schedule(batch, dec)
    for d in range(50):
        one = ChannelRealization(batch.gains[d], 1.0, 100.0)
        assert rates_of_schedule(one, sinr_threshold_schedule(one, 0.5)).sum_rate == pytest.approx(rep.sum_rate[d])


def test_snr_based_ignores_interference():
    real = make_real([[1.0, 1000.0], [1000.0, 1.0]], noise_over_power=0.1)
    assert snr_based_schedule(real, 10.0).active.tolist() == [1, 1]
    assert sinr_threshold_schedule(real, 0.5).active.tolist() == [0, 0]


def test_itlinq_two_pair_examples():
    # weak cross links: both admitted
    real = make_real([[100.0, 1.0], [1.0, 100.0]])
    dec = itlinq_schedule(real, eta=1.0)
    assert dec.active.tolist() == [1, 1]
    assert dec.comparison_count == 1 + 3
    # strong cross link: second link yields
    real = make_real([[100.0, 200.0], [1.0, 100.0]])
    assert itlinq_schedule(real, eta=1.0).active.tolist() == [1, 0]
    # smaller eta relaxes the test and admits it
    assert itlinq_schedule(real, eta=0.5).active.tolist() == [1, 1]


def test_itlinq_order_and_eta_validation():
    real = make_real(np.eye(3))
    with pytest.raises(ValueError):
        itlinq_schedule(real, eta=0.0)
    with pytest.raises(ValueError):
        itlinq_schedule(real, eta=1.0, order=[0, 0, 1])
    real = make_real([[100.0, 200.0], [1.0, 100.0]])
    assert itlinq_schedule(real, eta=1.0, order=[1, 0]).active.tolist() == [0, 1]


def test_fair_itlinq_examples():
    real = make_real([[100.0, 200.0], [1.0, 100.0]])
    # SNR 100 = 20 dB; INR_in at link 1 = 1, INR_out to link 0 = 200
    dec = fair_itlinq_schedule(real, snr_th_db=110.0, m_db=25.0, mbar_db=20.0, etabar=0.6)
    # limits 10**2.5 * 100**0.6 = 5012 and 100 * 15.85 = 1585 both pass
    assert dec.active.tolist() == [1, 1]
    strict = fair_itlinq_schedule(real, snr_th_db=110.0, m_db=0.0, mbar_db=0.0, etabar=0.6)
    assert strict.active.tolist() == [1, 0]
    # SNR above the hard threshold always gets on
    easy = fair_itlinq_schedule(real, snr_th_db=10.0, m_db=0.0, mbar_db=0.0, etabar=0.6)
    assert easy.active.tolist() == [1, 1]


def test_flashlinq_pairwise_examples():
    # gamma 9 dB ~ 7.94
    real = make_real([[100.0, 10.0], [1.0, 100.0]])
    assert flashlinq_schedule(real).active.tolist() == [1, 1]
    # Rx yielding: link 1 sees Tx_0 too strongly
    real = make_real([[100.0, 1.0], [20.0, 100.0]])
    assert flashlinq_schedule(real).active.tolist() == [1, 0]
    # Tx yielding: link 1 would hurt Rx_0 too much
    real = make_real([[100.0, 20.0], [1.0, 100.0]])
    assert flashlinq_schedule(real).active.tolist() == [1, 0]


def test_flashlinq_aggregate_is_stricter():
    rng = np.random.default_rng(3)
    for _ in range(20):
        real = realize_iid_rayleigh(12, 100.0, rng)
        pw = flashlinq_schedule(real, sir_test="pairwise").active
        ag = flashlinq_schedule(real, sir_test="aggregate").active
        assert ag.sum() <= pw.sum()
    with pytest.raises(ValueError):
        flashlinq_schedule(real, sir_test="bogus")


def test_greedy_rejects_batches():
    batch = realize_iid_rayleigh(3, 10.0, np.random.default_rng(0), size=2)
    with pytest.raises(ValueError):
        itlinq_schedule(batch, 1.0)


def test_greedy_counts_no_interference_worst_case():
    for k in (2, 3, 10, 40):
        real = make_real(np.eye(k) * 10.0)
        bound = worst_case_greedy_checks(k)
        for dec in (itlinq_schedule(real, 1.0), fair_itlinq_schedule(real), flashlinq_schedule(real)):
            assert dec.num_active == k
            assert dec.comparison_count == k * k
            assert dec.comparison_count <= bound
    # a single link still takes one admission test while the bound is zero
    one = make_real([[3.0]])
    assert itlinq_schedule(one, 1.0).comparison_count == 1
    assert worst_case_greedy_checks(1) == 0.0
    assert worst_case_greedy_checks(3) == 6 + 9


def test_greedy_counts_superlinear():
    counts = []
    for k in (20, 80, 320):
        real = make_real(np.eye(k))
        counts.append(itlinq_schedule(real, 1.0).comparison_count)
    assert counts[1] / counts[0] > 10  # about 16x for 4x more links
    assert counts[2] / counts[1] > 10


def test_modified1_enforced_on():
    real = make_real([[1.0, 10.0, 10.0], [10.0, 1.0, 10.0], [10.0, 10.0, 1.0]])
    dec = modified1_schedule(real, 1.0, enforced=[2])
    assert dec.active.tolist() == [0, 0, 1]
    assert dec.comparison_count == 3
    with pytest.raises(ValueError):
        modified1_schedule(real, 1.0, enforced=[3])


def test_round_robin_cycle_covers_all_links():
    k = 25
    m = math.ceil(0.1 * k)
    seen = set()
    for d in range(math.ceil(k / m)):
        block = round_robin_enforced(k, d)
        assert block.size == m
        seen.update(block.tolist())
    assert seen == set(range(k))
    assert round_robin_enforced(10, 0).tolist() == [0]
    assert round_robin_enforced(10, 3).tolist() == [3]


def test_modified2_offsets():
    assert modified2_threshold(1.0, 0.0) == 1.0
    assert modified2_threshold(2.0, 3.0) == pytest.approx(2.0 * 10 ** -0.3)
    assert modified2_threshold(1.0, 0.45, offset="linear") == pytest.approx(0.55)
    assert modified2_threshold(0.3, 0.45, offset="linear") == 0.0
    with pytest.raises(ValueError):
        modified2_threshold(1.0, 0.1, offset="ratio")
    real = make_real([[4.0, 1.0], [1.0, 4.0]])
    assert modified2_schedule(real, 2.5, 0.5, offset="linear").active.tolist() == [1, 1]
    assert modified2_schedule(real, 2.5, 0.0).active.tolist() == [0, 0]


def test_sum_rate_of_set():
    real = make_real([[4.0, 1.0], [1.0, 4.0]])
    assert sum_rate_of_set(real, [1, 1]) == pytest.approx(2 * math.log2(3))
    assert sum_rate_of_set(real, [1, 0]) == pytest.approx(math.log2(5))


def test_flashlinq_rejects_dead_link():
    real = make_real([[5.0, 0.1], [0.1, 0.0]])
    for mode in ("pairwise", "aggregate"):
        dec = flashlinq_schedule(real, sir_test=mode)
        assert dec.active.tolist() == [1, 0]
    assert flashlinq_schedule(make_real([[2.0]])).active.tolist() == [1]
