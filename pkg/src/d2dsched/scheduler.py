"""Binary link schedulers and the TIN rates of a scheduled set.

Every scheduler takes a :class:`~d2dsched.channel.ChannelRealization` and
returns a :class:`ScheduleDecision`. The threshold rules (proposed, SNR-based,
modified 1 and 2) are vectorized and accept batched realizations with gains of
shape ``(..., K, K)``. The greedy baselines (ITLinQ, Fair ITLinQ, FlashLinQ)
walk links one at a time in a given priority order and work on a single drop.

``comparison_count`` records the scheduling decisions made: one per threshold
test, and for the greedy schemes one per pairwise test against each
already-scheduled link plus one admission test per candidate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, cross_gains

SCHEMES = (
    "proposed",
    "snr_based",
    "itlinq",
    "fair_itlinq",
    "flashlinq",
    "modified1",
    "modified2",
)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ScheduleDecision:
    active: np.ndarray  # int8 0/1, shape (..., K)
    scheme_id: str
    feedback: np.ndarray  # one-bit f_i sent from Rx_i to Tx_i
    comparison_count: int

    @property
    def active_set(self) -> np.ndarray:
        return np.flatnonzero(self.active)

    @property
    def num_active(self):
        return self.active.sum(axis=-1)


@dataclass(frozen=True)
class RateReport:
    per_user_rate: np.ndarray  # bits/s/Hz, zero for silent links
    sum_rate: np.ndarray | float
    fraction_inactive: np.ndarray | float
    scheme_id: str


def _decision(active, scheme_id, count, feedback=None) -> ScheduleDecision:
    active = np.asarray(active).astype(np.int8)
    fb = active if feedback is None else np.asarray(feedback).astype(np.int8)
    return ScheduleDecision(active=active, scheme_id=scheme_id, feedback=fb, comparison_count=int(count))


def _check_nonneg(name, value):
    if not value >= 0:  # also rejects NaN
        raise ValueError(f"{name} must be nonnegative, got {value!r}")


def sinr_threshold_schedule(real: ChannelRealization, gamma: float) -> ScheduleDecision:
    """Activate link i iff its all-active SINR prediction is at least ``gamma``.

    Each receiver decides alone from its own row of the gain matrix; the
    decision is the one-bit feedback ``1(SINR_i - gamma)``.
    """
    _check_nonneg("gamma", gamma)
    active = real.sinr_all_active >= gamma
    return _decision(active, "proposed", active.size)


def snr_based_schedule(real: ChannelRealization, snr_threshold: float) -> ScheduleDecision:
    """Interference-blind rule: activate link i iff its SNR is at least the threshold."""
    _check_nonneg("snr_threshold", snr_threshold)
    active = real.snr >= snr_threshold
    return _decision(active, "snr_based", active.size)


def modified1_schedule(real: ChannelRealization, gamma: float, enforced) -> ScheduleDecision:
    """Proposed rule with a set of links forced on.

    Non-enforced links still test the all-active SINR prediction, which already
    counts the interference from the enforced links.
    """
    _check_nonneg("gamma", gamma)
    k = real.num_pairs
    enforced = np.asarray(enforced, dtype=int).ravel()
    if enforced.size and (enforced.min() < 0 or enforced.max() >= k):
        raise ValueError(f"enforced indices must lie in [0, {k})")
    mask = np.zeros(k, dtype=bool)
    mask[enforced] = True
    active = mask | (real.sinr_all_active >= gamma)
    # every receiver still runs its one threshold test; enforcement overrides it
    return _decision(active, "modified1", active.size)


def round_robin_enforced(k: int, drop_index: int, fraction: float = 0.10) -> np.ndarray:
    """Links forced on in a given drop; a block of ceil(fraction*K) rotating by drop."""
    m = max(1, math.ceil(fraction * k - 1e-12))
    start = (drop_index * m) % k
    return (start + np.arange(m)) % k


def modified2_threshold(gamma_star: float, gamma_v: float, offset: str = "db") -> float:
    """Lowered threshold. ``offset="db"`` subtracts ``gamma_v`` dB from gamma*;
    ``offset="linear"`` uses ``max(0, gamma* - gamma_v)``."""
    _check_nonneg("gamma_star", gamma_star)
    if offset == "db":
        return gamma_star * 10.0 ** (-gamma_v / 10.0)
    if offset == "linear":
        return max(0.0, gamma_star - gamma_v)
    raise ValueError(f"offset must be 'db' or 'linear', got {offset!r}")


def modified2_schedule(real: ChannelRealization, gamma_star: float, gamma_v: float,
                       offset: str = "db") -> ScheduleDecision:
    dec = sinr_threshold_schedule(real, modified2_threshold(gamma_star, gamma_v, offset))
    return _decision(dec.active, "modified2", dec.comparison_count)


def rates_of_schedule(real: ChannelRealization, dec: ScheduleDecision | np.ndarray) -> RateReport:
    """Per-user TIN rates in bits/s/Hz; only scheduled links interfere."""
    active = dec.active if isinstance(dec, ScheduleDecision) else np.asarray(dec)
    scheme_id = dec.scheme_id if isinstance(dec, ScheduleDecision) else "custom"
    if active.shape != real.sinr_all_active.shape:
        raise ValueError(f"active has shape {active.shape}, expected {real.sinr_all_active.shape}")
    on = active.astype(bool)
    onf = on.astype(float)
    direct = real.direct
    interference = np.einsum("...ij,...j->...i", cross_gains(real.gains), onf)
    sinr = direct / (interference + real.noise_over_power)
    rates = np.where(on, np.log2(1.0 + sinr), 0.0)
    return RateReport(
        per_user_rate=rates,
        sum_rate=rates.sum(axis=-1),
        fraction_inactive=1.0 - onf.mean(axis=-1),
        scheme_id=scheme_id,
    )


def sum_rate_of_set(real: ChannelRealization, active) -> float:
    return float(rates_of_schedule(real, np.asarray(active, dtype=np.int8)).sum_rate)


def _check_order(order, k: int) -> np.ndarray:
    if order is None:
        return np.arange(k)
    order = np.asarray(order)
    if order.shape != (k,) or not np.array_equal(np.sort(order), np.arange(k)):
        raise ValueError(f"order must be a permutation of 0..{k - 1}")
    return order.astype(int)


def _single(real: ChannelRealization):
    if real.gains.ndim != 2:
        raise ValueError("greedy schedulers take a single (K, K) realization")


def itlinq_schedule(real: ChannelRealization, eta: float, order=None) -> ScheduleDecision:
    """Greedy ITLinQ: admit link i iff SNR_i >= (max INR to/from scheduled links)**eta."""
    _single(real)
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta!r}")
    k = real.num_pairs
    order = _check_order(order, k)
    q = real.gains / real.noise_over_power
    snr = real.snr
    max_in = np.zeros(k)   # max_{j in S} INR caused by Tx_j at Rx_i
    max_out = np.zeros(k)  # max_{j in S} INR caused by Tx_i at Rx_j
    active = np.zeros(k, dtype=bool)
    n_active = 0
    count = 0
    for i in order:
        count += 1 + 2 * n_active
        if n_active == 0 or (snr[i] >= max_in[i] ** eta and snr[i] >= max_out[i] ** eta):
            active[i] = True
            n_active += 1
            col, row = q[:, i].copy(), q[i, :].copy()
            col[i] = row[i] = 0.0
            np.maximum(max_in, col, out=max_in)
            np.maximum(max_out, row, out=max_out)
    return _decision(active, "itlinq", count)


def fair_itlinq_schedule(real: ChannelRealization, snr_th_db: float = 110.0, m_db: float = 25.0,
                         mbar_db: float = 20.0, etabar: float = 0.6, order=None) -> ScheduleDecision:
    """Greedy Fair-ITLinQ.

    Link i is admitted iff SNR_i >= SNR_th, or both
    ``max INR_in <= M * SNR_i**etabar`` and ``max INR_out <= Mbar * SNR_i**etabar``.
    The margins M, Mbar relax the plain ITLinQ test so weaker links get on.
    """
    _single(real)
    k = real.num_pairs
    order = _check_order(order, k)
    q = real.gains / real.noise_over_power
    snr = real.snr
    snr_th = db_to_linear(snr_th_db)
    lim_in = db_to_linear(m_db) * snr**etabar
    lim_out = db_to_linear(mbar_db) * snr**etabar
    max_in = np.zeros(k)
    max_out = np.zeros(k)
    active = np.zeros(k, dtype=bool)
    n_active = 0
    count = 0
    for i in order:
        count += 1 + 2 * n_active
        ok = (
            n_active == 0
            or snr[i] >= snr_th
            or (max_in[i] <= lim_in[i] and max_out[i] <= lim_out[i])
        )
        if ok:
            active[i] = True
            n_active += 1
            col, row = q[:, i].copy(), q[i, :].copy()
            col[i] = row[i] = 0.0
            np.maximum(max_in, col, out=max_in)
            np.maximum(max_out, row, out=max_out)
    return _decision(active, "fair_itlinq", count)


def flashlinq_schedule(real: ChannelRealization, gamma_tx_db: float = 9.0, gamma_rx_db: float = 9.0,
                       order=None, sir_test: str = "pairwise") -> ScheduleDecision:
    """Greedy FlashLinQ with receiver and transmitter yielding.

    ``sir_test="pairwise"``: link i yields if, for some scheduled j, its SIR
    against Tx_j alone is below gamma_RX (Rx yielding) or it would push Rx_j's
    SIR against Tx_i alone below gamma_TX (Tx yielding).

    ``sir_test="aggregate"``: Rx yielding compares against the summed
    interference of all scheduled links, and Tx yielding checks each scheduled
    receiver's SIR including its existing interference.
    """
    _single(real)
    if sir_test not in ("pairwise", "aggregate"):
        raise ValueError(f"sir_test must be 'pairwise' or 'aggregate', got {sir_test!r}")
    k = real.num_pairs
    order = _check_order(order, k)
    g_tx, g_rx = db_to_linear(gamma_tx_db), db_to_linear(gamma_rx_db)
    gains = real.gains
    direct = real.direct
    active = np.zeros(k, dtype=bool)
    sched: list[int] = []
    interf = np.zeros(k)  # aggregate interference from scheduled links
    count = 0
    for i in order:
        s = np.asarray(sched, dtype=int)
        if sir_test == "pairwise":
            count += 1 + 2 * s.size
            ok = s.size == 0 or (
                np.all(direct[i] >= g_rx * gains[i, s]) and np.all(direct[s] >= g_tx * gains[s, i])
            )
        else:
            count += 1 + s.size
            ok = s.size == 0 or (
                direct[i] >= g_rx * interf[i]
                and np.all(direct[s] >= g_tx * (gains[s, i] + interf[s]))
            )
        if ok:
            active[i] = True
            sched.append(int(i))
            col = gains[:, i].copy()
            col[i] = 0.0
            interf += col
    return _decision(active, "flashlinq", count)


def worst_case_greedy_checks(k: int) -> float:
    """Upper bound 6 + 9 + ... + 3K on greedy condition checks (K >= 2)."""
    return 1.5 * (k + 2) * (k - 1)
