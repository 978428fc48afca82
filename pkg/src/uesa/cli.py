"""Command-line interface: simulate, sweep, enumerate, validate."""

from __future__ import annotations

import argparse
import sys

from . import allocation as alloc_mod
from . import harness
from ._kernels import available_backends, default_backend_name
from .errors import UnsupportedConfigurationError


def _int_list(text: str) -> list:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list:
    return [float(v) for v in text.split(",") if v]


def _add_cell_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file; flags override it")
    p.add_argument("--nr", type=_int_list, help="receive antenna counts, comma separated")
    p.add_argument("--n", type=_int_list, help="RF chain counts, comma separated")
    p.add_argument("--k", type=int, help="number of users")
    p.add_argument("--snr-db", dest="snr_db", type=_float_list, help="SNR points in dB")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per cell")
    p.add_argument("--seed", type=int, help="base seed for per-trial generators")
    p.add_argument("--algorithm", choices=harness.ALGORITHMS)
    p.add_argument("--q-levels", dest="q_levels", type=int, help="phase grid size (default 16)")
    p.add_argument("--paths", type=int, help="scattering paths per user (default 10)")
    p.add_argument("--count-max", dest="count_max", type=int, help="early-termination budget")
    p.add_argument("--fast-iters", dest="fast_iters", type=int, help="fast search outer iterations")
    p.add_argument("--gamma", type=float, help="fast search eigenvalue-gap threshold")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--heavy", action="store_true", default=None,
                   help="allow exhaustive-search cells beyond the heavy limit")


def _collect_options(args: argparse.Namespace) -> dict:
    options = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            options.update(harness.parse_config_text(fh.read()))
    for key in ("nr", "n", "k", "snr_db", "trials", "seed", "algorithm", "q_levels",
                "paths", "count_max", "fast_iters", "gamma", "out", "heavy"):
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    return options


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = harness.config_from_options(_collect_options(args))
    records = harness.run_sweep(config)
    _write_output(harness.emit_csv(records, config), config.out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = harness.config_from_options(_collect_options(args))
    if len(config.nr_list) != 1 or len(config.n_list) != 1 or len(config.snr_db_list) != 1:
        raise ValueError("simulate takes a single cell; use sweep for grids")
    records = harness.run_sweep(config)
    rec = records[0]
    print(f"nr={rec.nr} n={rec.n} k={rec.k} snr_db={rec.snr_db:g} algorithm={rec.algorithm}")
    print(f"trials={rec.trial_count} seed={rec.seed}")
    print(f"mean_rate={rec.mean_rate:.9g} bits/s/Hz")
    print(f"mean_ub1={rec.mean_ub1:.9g} mean_ub={rec.mean_ub:.9g}")
    print(f"power_mw={rec.power_mw:.9g} mean_ee={rec.mean_ee:.9g}")
    print(f"mean_candidates_examined={rec.mean_candidates_examined:.9g}")
    if config.out:
        _write_output(harness.emit_csv(records, config), config.out)
    return 0


def _cmd_enumerate(args: argparse.Namespace) -> int:
    n_r, n = args.nr, args.n
    compositions = sum(1 for _ in alloc_mod.enumerate_compositions(n_r, n))
    partitions = list(alloc_mod.enumerate_partitions_nondecreasing(n_r, n))
    head = alloc_mod.order_by_pi_desc(partitions)[0]
    print(f"compositions: {compositions}")
    print(f"nondecreasing_partitions: {len(partitions)}")
    print(f"pi_head: {','.join(str(m) for m in head)}")
    print(f"pi_head_metric: {alloc_mod.pi_metric(head)}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    report = harness.validate(instances=args.instances, seed=args.seed, backend=args.backend)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uesa",
        description="Sub-connected analog combining simulator "
                    f"(kernel backend: {default_backend_name()})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one (nr, n, snr) cell")
    _add_cell_options(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a (nr, n, snr) grid and emit CSV")
    _add_cell_options(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("enumerate", help="report candidate-space sizes")
    p.add_argument("--nr", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--seed", type=int, default=2026)
    p.add_argument("--backend", choices=available_backends(), default=None)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, UnsupportedConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
