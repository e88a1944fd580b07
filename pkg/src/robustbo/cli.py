"""Command-line entry point: ``robustbo {run,bounds,gen-carrier-standin,selftest}``.

Exit codes: 0 success, 1 selftest failure, 2 config error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import ConfigError, DataError, NumericalFailure

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3, 4

log = logging.getLogger("robustbo")


def _cmd_run(args):
    from .campaign import emit_csv, parse_config, run_campaign

    cfg = parse_config(args.config)
    if args.workers is not None:
        cfg = type(cfg)(**{**cfg.__dict__, "workers": args.workers})
    result = run_campaign(cfg)
    paths = emit_csv(result, args.output or cfg.output)
    for s in cfg.strategies:
        log.info("%-15s final mean regret %.6g", s, result.mean[s][-1])
    print(f"wrote {len(paths)} files to {args.output or cfg.output}")
    return EXIT_OK


def _cmd_bounds(args):
    from .campaign import compute_bounds, parse_config, write_bounds_csv

    cfg = parse_config(args.config)
    out = args.output or cfg.output
    os.makedirs(out, exist_ok=True)
    print(write_bounds_csv(compute_bounds(cfg), out))
    return EXIT_OK


def _cmd_standin(args):
    from .bench import generate_carrier_standin

    generate_carrier_standin(args.out, seed=args.seed)
    print(args.out)
    return EXIT_OK


def _cmd_selftest(args):
    from .checks import run_all

    results = run_all(quick=args.quick)
    for name, (ok, detail) in results.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name:12s} {detail}")
    return EXIT_OK if all(ok for ok, _ in results.values()) else EXIT_SELFTEST


def build_parser():
    p = argparse.ArgumentParser(prog="robustbo", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a campaign and write CSV results")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="override the output directory")
    r.add_argument("-j", "--workers", type=int, help="override the worker count")
    r.set_defaults(func=_cmd_run)

    b = sub.add_parser("bounds", help="write bounds.csv only")
    b.add_argument("config")
    b.add_argument("-o", "--output")
    b.set_defaults(func=_cmd_bounds)

    g = sub.add_parser("gen-carrier-standin", help="write a synthetic x1,x2,lt lifetime file")
    g.add_argument("out")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=_cmd_standin)

    s = sub.add_parser("selftest", help="run the randomized invariant suites")
    s.add_argument("--quick", action="store_true", help="smaller sample sizes")
    s.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
