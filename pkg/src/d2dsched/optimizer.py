"""Optimal SINR threshold search over observed breakpoints.

For a fixed set of drops the empirical mean sum rate is piecewise constant in
the threshold and only changes when the threshold crosses an observed
all-active SINR. Evaluating it at ``{0} U {every observed SINR}`` therefore
finds the global optimum.

Two evaluation paths are provided:

* ``method="exact"`` recomputes the schedule and its rates at every candidate.
* ``method="sweep"`` sorts each drop's links by score once and builds the sum
  rate of every top-n prefix with a cumulative interference matrix; a
  candidate then maps to a prefix length by binary search.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .channel import ChannelRealization, NetworkConfig, geometric_drop
from .scheduler import rates_of_schedule, sinr_threshold_schedule

ScoreFn = Callable[[ChannelRealization], np.ndarray]


def sinr_score(real: ChannelRealization) -> np.ndarray:
    return real.sinr_all_active


def snr_score(real: ChannelRealization) -> np.ndarray:
    return real.snr


def enforced_score(enforced) -> ScoreFn:
    """Score for modified scheme 1: forced links never drop below any threshold."""
    idx = np.asarray(enforced, dtype=int)

    def score(real):
        s = np.array(real.sinr_all_active, dtype=float)
        s[idx] = np.inf
        return s

    return score


@dataclass(frozen=True)
class ThresholdSearchResult:
    gamma_star: float
    best_mean_sum_rate: float
    curve: list[tuple[float, float]]
    num_candidates: int
    num_realizations: int

    @property
    def candidates(self) -> np.ndarray:
        return np.array([g for g, _ in self.curve])

    @property
    def mean_sum_rates(self) -> np.ndarray:
        return np.array([r for _, r in self.curve])


@dataclass(frozen=True)
class BreakpointCurve:
    """Sum rate of one drop as a step function of the threshold.

    ``sorted_scores`` is ascending; ``prefix_sum_rate[n]`` is the sum rate when
    the n highest-scoring links are active.
    """

    sorted_scores: np.ndarray
    prefix_sum_rate: np.ndarray

    def sum_rate_at(self, gamma) -> np.ndarray:
        k = self.sorted_scores.size
        n_active = k - np.searchsorted(self.sorted_scores, gamma, side="left")
        return self.prefix_sum_rate[n_active]

    def fraction_inactive_at(self, gamma) -> np.ndarray:
        k = self.sorted_scores.size
        return np.searchsorted(self.sorted_scores, gamma, side="left") / k


def breakpoint_curve(real: ChannelRealization, score: ScoreFn = sinr_score) -> BreakpointCurve:
    s = np.asarray(score(real), dtype=float)
    k = s.size
    order = np.argsort(-s, kind="stable")
    g = real.gains[np.ix_(order, order)]
    direct = np.diagonal(g).copy()
    cross = g - np.diag(direct)
    # cum[i, n-1]: interference at link i from the first n links in order
    cum = np.cumsum(cross, axis=1)
    rates = np.log2(1.0 + direct[:, None] / (cum + real.noise_over_power))
    in_prefix = np.arange(k)[:, None] <= np.arange(k)[None, :]
    prefix = np.concatenate(([0.0], np.where(in_prefix, rates, 0.0).sum(axis=0)))
    return BreakpointCurve(sorted_scores=np.sort(s), prefix_sum_rate=prefix)


def _active_at(real, gamma, score):
    return (np.asarray(score(real)) >= gamma).astype(np.int8)


def empirical_mean_sum_rate(realizations: Sequence[ChannelRealization], gamma: float,
                            scheme=sinr_threshold_schedule) -> float:
    """Mean over drops of the scheduled sum rate at threshold ``gamma``."""
    if len(realizations) == 0:
        raise ValueError("need at least one realization")
    total = 0.0
    for real in realizations:
        total += float(rates_of_schedule(real, scheme(real, gamma)).sum_rate)
    return total / len(realizations)


def candidate_thresholds(score_arrays, stride: int = 1) -> np.ndarray:
    """``{0}`` plus the finite observed scores, ascending; every ``stride``-th kept."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    vals = np.concatenate([np.asarray(s, dtype=float).ravel() for s in score_arrays])
    vals = np.sort(vals[np.isfinite(vals)])
    if stride > 1:
        vals = vals[::stride]
    return np.concatenate(([0.0], vals))


def search_from_curves(curves: Sequence[BreakpointCurve], stride: int = 1) -> ThresholdSearchResult:
    if len(curves) == 0:
        raise ValueError("need at least one realization")
    cands = candidate_thresholds([c.sorted_scores for c in curves], stride)
    total = np.zeros(cands.size)
    for c in curves:  # fixed order keeps the reduction deterministic
        total += c.sum_rate_at(cands)
    return _result(cands, total / len(curves), len(curves))


def _result(cands, means, n_real) -> ThresholdSearchResult:
    best = int(np.argmax(means))  # first maximum = smallest threshold
    return ThresholdSearchResult(
        gamma_star=float(cands[best]),
        best_mean_sum_rate=float(means[best]),
        curve=list(zip(cands.tolist(), means.tolist())),
        num_candidates=int(cands.size),
        num_realizations=n_real,
    )


def lemma2_search(realizations: Sequence[ChannelRealization], stride: int = 1,
                  method: str = "sweep", score: ScoreFn = sinr_score) -> ThresholdSearchResult:
    """Global threshold maximizing the empirical mean sum rate.

    Ties go to the smallest threshold, which schedules the most links.
    ``stride`` > 1 subsamples the sorted candidates for speed.
    """
    if len(realizations) == 0:
        raise ValueError("need at least one realization")
    if method == "sweep":
        return search_from_curves([breakpoint_curve(r, score) for r in realizations], stride)
    if method != "exact":
        raise ValueError(f"method must be 'sweep' or 'exact', got {method!r}")
    cands = candidate_thresholds([score(r) for r in realizations], stride)
    means = np.empty(cands.size)
    for n, gamma in enumerate(cands):
        means[n] = np.mean([
            float(rates_of_schedule(r, _active_at(r, gamma, score)).sum_rate) for r in realizations
        ])
    return _result(cands, means, len(realizations))


@dataclass(frozen=True)
class ThresholdRow:
    k: int
    gamma_star: float
    mean_sum_rate: float


def optimal_threshold_vs_k(k_values, cfg: NetworkConfig, num_drops: int, seed: int | None = None,
                           first_drop: int = 0) -> list[ThresholdRow]:
    """Optimal broadcast threshold for each network size on fresh geometric drops."""
    rows = []
    for k in k_values:
        kcfg = _with_k(cfg, k)
        curves = [
            breakpoint_curve(geometric_drop(kcfg, d, seed)[1])
            for d in range(first_drop, first_drop + num_drops)
        ]
        res = search_from_curves(curves)
        rows.append(ThresholdRow(k=int(k), gamma_star=res.gamma_star, mean_sum_rate=res.best_mean_sum_rate))
    return rows


def _with_k(cfg: NetworkConfig, k: int) -> NetworkConfig:
    return replace(cfg, num_pairs=int(k))


def write_threshold_csv(rows: Sequence[ThresholdRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["K", "gamma_star", "mean_sum_rate"])
        for r in rows:
            w.writerow([r.k, f"{r.gamma_star:.9g}", f"{r.mean_sum_rate:.9g}"])
