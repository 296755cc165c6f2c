"""Command-line front end for the Monte Carlo studies.

    d2dsched sum-rate --config base.cfg --override num_pairs=2 --seed 7 --out results
    d2dsched analytic-k2 --power-db 20

Exit status: 0 on success, 2 on usage or configuration errors, 1 on runtime
failures. Every written file is printed on stdout.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import analytic, harness
from .config import ConfigError, load_config, parse_override

DEFAULT_SEED = 1
SUBCOMMANDS = ("sum-rate", "cdf", "thresholds", "op-count", "analytic-k2", "cellular")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="d2dsched", description="SINR-threshold D2D scheduling studies")
    sub = p.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}", parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key=value config file")
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable, last one wins)")
    common.add_argument("--seed", type=int, default=None,
                        help=f"64-bit seed for all randomness (default {DEFAULT_SEED})")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--threads", type=int, default=None, help="worker threads, 0 = auto")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "analytic-k2":
            sp.add_argument("--power-db", type=float, default=20.0, help="P in dB with unit noise")
        if name in ("cdf", "cellular"):
            sp.add_argument("--k", type=int, default=None, help="network size (default cdf_k)")
    return p


def _spec(args) -> harness.ExperimentSpec:
    values: dict[str, str] = {}
    if args.config is not None:
        values.update(load_config(args.config))
    for item in args.override:
        key, value = parse_override(item)
        values[key] = value
    known = harness.spec_keys()
    for key in values:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    spec = harness.spec_from_mapping(values)
    seed = DEFAULT_SEED if args.seed is None and "rng_seed" not in values else args.seed
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        spec = replace(spec, cfg=replace(spec.cfg, rng_seed=seed))
    if args.out is not None:
        spec = replace(spec, output_dir=str(args.out))
    if args.threads is not None:
        if args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        spec = replace(spec, threads=args.threads)
    return spec


def _run(args, spec) -> list[Path]:
    out = Path(spec.output_dir)
    cmd = args.command
    if cmd == "sum-rate":
        harness.run_sum_rate_study(spec)
        return [out / "sum_rate_vs_k.csv", out / "thresholds.csv"]
    if cmd == "cdf":
        res = harness.run_cdf_study(spec, args.k)
        return [out / f"cdf_k{res.k}.csv", out / f"fairness_k{res.k}.csv"]
    if cmd == "thresholds":
        harness.run_threshold_study(spec)
        return [out / "thresholds.csv"]
    if cmd == "op-count":
        harness.count_ops_study(spec)
        return [out / "op_counts.csv"]
    if cmd == "cellular":
        k = spec.cdf_k if args.k is None else args.k
        harness.run_cellular_study(spec, k)
        return [out / f"cellular_k{k}.csv"]
    if cmd == "analytic-k2":
        out.mkdir(parents=True, exist_ok=True)
        p = 10.0 ** (args.power_db / 10.0)
        path = out / f"analytic_k2_p{args.power_db:g}dB.csv"
        analytic.write_curve_csv(p, path)
        return [path]
    raise _UsageError(f"unknown subcommand {cmd!r}")


def parse_and_dispatch(argv) -> int:
    """Run one subcommand and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise _UsageError("a subcommand is required")
        spec = _spec(args)
    except _UsageError as exc:
        print(f"d2dsched: error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"d2dsched: config error: {exc}", file=sys.stderr)
        return 2
    try:
        paths = _run(args, spec)
    except Exception as exc:  # noqa: BLE001
        print(f"d2dsched: run failed: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    print(f"d2dsched: {args.command} done", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    return parse_and_dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
