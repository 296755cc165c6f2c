"""Seeded Monte Carlo studies: sum rate vs. K, user-rate CDFs, thresholds,
decision counts and cellular-assisted time sharing.

Drop ``d`` of a K-pair study always uses the substream
``drop_rng(seed, K, d)``; it draws the topology, then the fading, then the
greedy priority order. Drops ``0 .. n_train-1`` tune scheme parameters and the
remaining drops are used for reporting. Work is spread over a thread pool and
reduced in drop order, so results do not depend on the thread count.
"""
from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import NetworkConfig, drop_rng, drop_topology, realize_channel, realize_iid_rayleigh
from .config import ConfigError, coerce, field_defaults
from .optimizer import (
    ThresholdRow,
    breakpoint_curve,
    enforced_score,
    search_from_curves,
    snr_score,
    write_threshold_csv,
)
from .scheduler import (
    SCHEMES,
    db_to_linear,
    fair_itlinq_schedule,
    flashlinq_schedule,
    itlinq_schedule,
    modified1_schedule,
    modified2_threshold,
    rates_of_schedule,
    round_robin_enforced,
    sinr_threshold_schedule,
    snr_based_schedule,
)

NEAR_ZERO_RATE = 0.01
CDF_QUANTILES = tuple(np.round(np.linspace(0.0, 1.0, 21), 2))


@dataclass(frozen=True)
class ExperimentSpec:
    cfg: NetworkConfig = field(default_factory=NetworkConfig)
    k_values: tuple = (50, 100, 200, 400, 800)
    num_drops: int = 200
    schemes: tuple = SCHEMES
    # Fraction of drops used to tune parameters; 0 tunes on the reporting drops.
    train_eval_split: float = 0.5
    output_dir: str = "results"
    threads: int = 0
    channel_mode: str = "geometric"  # or "iid_rayleigh"
    iid_power_db: float = 20.0
    itlinq_etas: tuple = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    fair_snr_th_db: float = 110.0
    fair_m_db: float = 25.0
    fair_mbar_db: float = 20.0
    fair_etabar: float = 0.6
    flash_gamma_tx_db: float = 9.0
    flash_gamma_rx_db: float = 9.0
    flash_sir_test: str = "pairwise"
    gamma_v: float = 0.45
    gamma_v_offset: str = "db"
    enforce_fraction: float = 0.10
    # "k2": tune on two-pair drops of the same geometry; "trained": tune at
    # each K; "fixed": use snr_threshold_db.
    snr_threshold_design: str = "k2"
    snr_threshold_db: float = 0.0
    cdf_k: int = 800
    r_c: float = 4.0
    b_cells: int = 10
    k_c: int = 20
    alphas: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    search_stride: int = 1

    def __post_init__(self):
        if self.num_drops < 1:
            raise ValueError("num_drops must be >= 1")
        if not 0 <= self.train_eval_split < 1:
            raise ValueError("train_eval_split must lie in [0, 1)")
        if not self.schemes:
            raise ValueError("schemes must be nonempty")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ValueError(f"unknown scheme(s): {sorted(unknown)}; choose from {SCHEMES}")
        if not self.k_values or min(self.k_values) < 1:
            raise ValueError("k_values must be nonempty positive integers")
        if self.channel_mode not in ("geometric", "iid_rayleigh"):
            raise ValueError("channel_mode must be 'geometric' or 'iid_rayleigh'")
        if self.snr_threshold_design not in ("k2", "trained", "fixed"):
            raise ValueError("snr_threshold_design must be 'k2', 'trained' or 'fixed'")
        if self.threads < 0:
            raise ValueError("threads must be >= 0")

    @property
    def seed(self) -> int:
        return self.cfg.rng_seed

    def split(self) -> tuple[range, range]:
        n_train = int(round(self.train_eval_split * self.num_drops))
        if self.train_eval_split == 0:
            every = range(self.num_drops)
            return every, every
        n_train = min(max(n_train, 1), self.num_drops - 1)
        return range(n_train), range(n_train, self.num_drops)


def spec_keys() -> set[str]:
    return (set(field_defaults(NetworkConfig)) | set(field_defaults(ExperimentSpec))) - {"cfg"}


def spec_from_mapping(values: dict[str, str], base: ExperimentSpec | None = None) -> ExperimentSpec:
    """Build a spec from string key/values named after the dataclass fields."""
    base = base or ExperimentSpec()
    net_defaults = field_defaults(NetworkConfig)
    exp_defaults = field_defaults(ExperimentSpec)
    net_kw, exp_kw = {}, {}
    for key, text in values.items():
        if key in net_defaults:
            net_kw[key] = coerce(key, text, net_defaults[key])
        elif key in exp_defaults and key != "cfg":
            exp_kw[key] = coerce(key, text, exp_defaults[key])
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        cfg = replace(base.cfg, **net_kw)
        return replace(base, cfg=cfg, **exp_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class SchemeStats:
    scheme: str
    mean_sum_rate: float
    stderr: float
    user_rates: np.ndarray  # (eval drops, K), bits/s/Hz
    fraction_inactive: float
    near_zero_fraction: float
    never_active_fraction: float
    mean_checks: float
    wall_clock_s: float

    @property
    def sum_rates(self) -> np.ndarray:
        return self.user_rates.sum(axis=1)


@dataclass
class AggregateResult:
    k: int
    params: dict
    stats: dict[str, SchemeStats]
    num_eval_drops: int

    def gain(self, a: str, b: str) -> float:
        """Relative sum-rate gain of scheme ``a`` over ``b``."""
        ma, mb = self.stats[a].mean_sum_rate, self.stats[b].mean_sum_rate
        return (ma - mb) / mb


# ---------------------------------------------------------------- drops


def _realize(spec: ExperimentSpec, k: int, d: int):
    rng = drop_rng(spec.seed, k, d)
    if spec.channel_mode == "iid_rayleigh":
        real = realize_iid_rayleigh(k, db_to_linear(spec.iid_power_db), rng)
    else:
        cfg = replace(spec.cfg, num_pairs=k)
        real = realize_channel(drop_topology(cfg, rng), cfg, rng)
    order = rng.permutation(k)
    return real, order


def _pool_map(spec: ExperimentSpec, fn, items):
    workers = spec.threads or os.cpu_count() or 1
    items = list(items)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- training


def _needs(spec, *names):
    return any(n in spec.schemes for n in names)


def train_parameters(spec: ExperimentSpec, k: int) -> dict:
    """Tune gamma* (proposed, modified 2), modified-1 gamma, ITLinQ eta and the SNR threshold."""
    train, _ = spec.split()
    etas = tuple(spec.itlinq_etas)

    def work(d):
        real, order = _realize(spec, k, d)
        out = {}
        if _needs(spec, "proposed", "modified2"):
            out["proposed"] = breakpoint_curve(real)
        if "modified1" in spec.schemes:
            out["modified1"] = breakpoint_curve(real, enforced_score(round_robin_enforced(k, d, spec.enforce_fraction)))
        if "snr_based" in spec.schemes and spec.snr_threshold_design == "trained":
            out["snr_based"] = breakpoint_curve(real, snr_score)
        if "itlinq" in spec.schemes:
            out["itlinq"] = np.array([
                float(rates_of_schedule(real, itlinq_schedule(real, eta, order)).sum_rate) for eta in etas
            ])
        return out

    per_drop = _pool_map(spec, work, train)
    params: dict = {}
    if _needs(spec, "proposed", "modified2"):
        res = search_from_curves([p["proposed"] for p in per_drop], spec.search_stride)
        params["gamma_star"] = res.gamma_star
        params["train_mean_sum_rate"] = res.best_mean_sum_rate
    if "modified1" in spec.schemes:
        res = search_from_curves([p["modified1"] for p in per_drop], spec.search_stride)
        params["gamma_modified1"] = res.gamma_star
    if "itlinq" in spec.schemes:
        means = np.mean([p["itlinq"] for p in per_drop], axis=0)
        params["eta"] = float(etas[int(np.argmax(means))])
    if "snr_based" in spec.schemes:
        params["snr_threshold"] = _snr_threshold(spec, per_drop, train)
    return params


def _snr_threshold(spec, per_drop, train) -> float:
    if spec.snr_threshold_design == "fixed":
        return db_to_linear(spec.snr_threshold_db)
    if spec.snr_threshold_design == "trained":
        return search_from_curves([p["snr_based"] for p in per_drop], spec.search_stride).gamma_star
    # Two-pair design reused at every K: the rule ignores interference, so its
    # threshold is not adapted to the network size.
    curves = _pool_map(spec, lambda d: breakpoint_curve(_realize(spec, 2, d)[0], snr_score), train)
    return search_from_curves(curves, spec.search_stride).gamma_star


# ---------------------------------------------------------------- evaluation


def _schedule(spec: ExperimentSpec, name: str, real, order, params: dict, k: int, d: int):
    if name == "proposed":
        return sinr_threshold_schedule(real, params["gamma_star"])
    if name == "snr_based":
        return snr_based_schedule(real, params["snr_threshold"])
    if name == "itlinq":
        return itlinq_schedule(real, params["eta"], order)
    if name == "fair_itlinq":
        return fair_itlinq_schedule(real, spec.fair_snr_th_db, spec.fair_m_db, spec.fair_mbar_db,
                                    spec.fair_etabar, order)
    if name == "flashlinq":
        return flashlinq_schedule(real, spec.flash_gamma_tx_db, spec.flash_gamma_rx_db, order,
                                  spec.flash_sir_test)
    if name == "modified1":
        return modified1_schedule(real, params["gamma_modified1"],
                                  round_robin_enforced(k, d, spec.enforce_fraction))
    if name == "modified2":
        gamma = modified2_threshold(params["gamma_star"], params.get("gamma_v", spec.gamma_v),
                                    spec.gamma_v_offset)
        return sinr_threshold_schedule(real, gamma)
    raise ValueError(f"unknown scheme {name!r}")


def evaluate(spec: ExperimentSpec, k: int, params: dict, schemes=None) -> AggregateResult:
    schemes = tuple(schemes or spec.schemes)
    _, evald = spec.split()

    def work(d):
        real, order = _realize(spec, k, d)
        out = {}
        for name in schemes:
            t0 = time.perf_counter()
            dec = _schedule(spec, name, real, order, params, k, d)
            rates = rates_of_schedule(real, dec).per_user_rate
            out[name] = (rates, dec.comparison_count, time.perf_counter() - t0)
        return out

    per_drop = _pool_map(spec, work, evald)
    stats = {name: _summarize(name, [p[name] for p in per_drop]) for name in schemes}
    return AggregateResult(k=k, params=dict(params), stats=stats, num_eval_drops=len(per_drop))


def _summarize(name, rows) -> SchemeStats:
    rates = np.vstack([r for r, _, _ in rows])
    sums = rates.sum(axis=1)
    n = sums.size
    stderr = float(sums.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return SchemeStats(
        scheme=name,
        mean_sum_rate=float(sums.mean()),
        stderr=stderr,
        user_rates=rates,
        fraction_inactive=float(np.mean(rates == 0.0)),
        near_zero_fraction=float(np.mean(rates < NEAR_ZERO_RATE)),
        never_active_fraction=float(np.mean(np.all(rates == 0.0, axis=0))),
        mean_checks=float(np.mean([c for _, c, _ in rows])),
        wall_clock_s=float(sum(t for _, _, t in rows)),
    )


# ---------------------------------------------------------------- studies


def run_sum_rate_study(spec: ExperimentSpec, write: bool = True) -> list[AggregateResult]:
    results = []
    for k in spec.k_values:
        results.append(evaluate(spec, k, train_parameters(spec, k)))
    if write:
        out = _outdir(spec)
        write_sum_rate_csv(results, out / "sum_rate_vs_k.csv")
        write_threshold_csv(threshold_rows(results), out / "thresholds.csv")
    return results


def threshold_rows(results) -> list[ThresholdRow]:
    return [
        ThresholdRow(k=r.k, gamma_star=r.params["gamma_star"], mean_sum_rate=r.stats["proposed"].mean_sum_rate)
        for r in results
        if "gamma_star" in r.params and "proposed" in r.stats
    ]


def run_threshold_study(spec: ExperimentSpec, write: bool = True) -> list[ThresholdRow]:
    """gamma* per K tuned on the training drops; mean sum rate on the reporting drops."""
    narrowed = replace(spec, schemes=("proposed",))
    rows = threshold_rows([evaluate(narrowed, k, train_parameters(narrowed, k)) for k in spec.k_values])
    if write:
        write_threshold_csv(rows, _outdir(spec) / "thresholds.csv")
    return rows


def run_cdf_study(spec: ExperimentSpec, k: int | None = None, write: bool = True) -> AggregateResult:
    k = spec.cdf_k if k is None else k
    result = evaluate(spec, k, train_parameters(spec, k))
    if write:
        out = _outdir(spec)
        write_cdf_csv(result, out / f"cdf_k{k}.csv")
        write_fairness_csv(result, out / f"fairness_k{k}.csv")
    return result


def run_modified2_sweep(spec: ExperimentSpec, k: int, gamma_vs, params: dict | None = None) -> list[SchemeStats]:
    """Modified scheme 2 at each offset, on the reporting drops."""
    if params is None:
        params = train_parameters(replace(spec, schemes=("proposed",)), k)
    out = []
    for gv in gamma_vs:
        res = evaluate(spec, k, {**params, "gamma_v": float(gv)}, schemes=("modified2",))
        out.append(res.stats["modified2"])
    return out


def cellular_assisted_rate(d2d_user_rates, r_c_nominal: float, b_cells: int, k_c: int, alpha: float) -> np.ndarray:
    """Time-sharing rate alpha * R_c B K_c / K + (1 - alpha) * R_k for every user."""
    rates = np.asarray(d2d_user_rates, dtype=float)
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if r_c_nominal < 0 or b_cells < 0 or k_c < 0 or np.any(rates < 0):
        raise ValueError("rates and cell counts must be nonnegative")
    k = rates.shape[-1]
    cellular = r_c_nominal * b_cells * k_c / k
    return alpha * cellular + (1.0 - alpha) * rates


def run_cellular_study(spec: ExperimentSpec, k: int | None = None, write: bool = True) -> list[dict]:
    k = spec.cdf_k if k is None else k
    narrowed = replace(spec, schemes=("proposed",))
    res = evaluate(narrowed, k, train_parameters(narrowed, k))
    d2d = res.stats["proposed"].user_rates
    rows = []
    for alpha in spec.alphas:
        hybrid = cellular_assisted_rate(d2d, spec.r_c, spec.b_cells, spec.k_c, alpha)
        rows.append({
            "alpha": alpha,
            "mean_user_rate": float(hybrid.mean()),
            "p10_user_rate": float(np.quantile(hybrid, 0.10)),
            "near_zero_fraction": float(np.mean(hybrid < NEAR_ZERO_RATE)),
        })
    if write:
        path = _outdir(spec) / f"cellular_k{k}.csv"
        _write_rows(path, ["alpha", "mean_user_rate", "p10_user_rate", "near_zero_fraction"],
                    [[r["alpha"], r["mean_user_rate"], r["p10_user_rate"], r["near_zero_fraction"]] for r in rows])
    return rows


@dataclass(frozen=True)
class OpCountRow:
    k: int
    scheme: str
    mean_checks: float


def count_ops_study(spec: ExperimentSpec, write: bool = True) -> list[OpCountRow]:
    """Mean decision counts per drop; thresholds do not change the counts of
    the threshold rules, so fixed placeholder parameters are used."""
    params = {
        "gamma_star": 1.0,
        "gamma_modified1": 1.0,
        "snr_threshold": 1.0,
        "eta": float(max(spec.itlinq_etas)),
    }
    rows = []
    _, evald = spec.split()
    for k in spec.k_values:

        def work(d):
            real, order = _realize(spec, k, d)
            return {n: _schedule(spec, n, real, order, params, k, d).comparison_count for n in spec.schemes}

        per_drop = _pool_map(spec, work, evald)
        for name in spec.schemes:
            rows.append(OpCountRow(k=k, scheme=name, mean_checks=float(np.mean([p[name] for p in per_drop]))))
    if write:
        _write_rows(_outdir(spec) / "op_counts.csv", ["K", "scheme", "mean_checks"],
                    [[r.k, r.scheme, r.mean_checks] for r in rows])
    return rows


def quadratic_fit_r2(ks, counts) -> float:
    ks = np.asarray(ks, dtype=float)
    counts = np.asarray(counts, dtype=float)
    coef = np.polyfit(ks, counts, 2)
    resid = counts - np.polyval(coef, ks)
    ss_tot = np.sum((counts - counts.mean()) ** 2)
    return float(1.0 - np.sum(resid**2) / ss_tot) if ss_tot > 0 else 1.0


# ---------------------------------------------------------------- output


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _outdir(spec) -> Path:
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_sum_rate_csv(results, path):
    rows = [[r.k, name, s.mean_sum_rate, s.stderr] for r in results for name, s in r.stats.items()]
    _write_rows(path, ["K", "scheme", "mean", "stderr"], rows)


def write_cdf_csv(result: AggregateResult, path):
    rows = []
    for name, s in result.stats.items():
        qs = np.quantile(s.user_rates.ravel(), CDF_QUANTILES)
        rows.extend([name, q, v] for q, v in zip(CDF_QUANTILES, qs))
    _write_rows(path, ["scheme", "quantile", "rate"], rows)


def write_fairness_csv(result: AggregateResult, path):
    rows = [
        [name, s.fraction_inactive, s.near_zero_fraction, s.never_active_fraction]
        for name, s in result.stats.items()
    ]
    _write_rows(path, ["scheme", "fraction_inactive", "near_zero_fraction", "never_active_fraction"], rows)
