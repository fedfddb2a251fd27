"""Command-line entry point: ``qpsync <command> [flags]``.

Exit codes: 0 success, 1 check failure, 2 invalid input, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import InvalidInputError
from .experiments import (COMMANDS, ExperimentConfig, load_config, raw_samples,
                          run_concurrence_scan, run_distributions, run_latitude_sweep,
                          run_mean_psf, run_optimize, run_verify_suite, run_witness,
                          verify_table)
from .records import OutputError, dumps, write_table

log = logging.getLogger("qpsync")

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3

# flag name -> config field
_FLAGS = {
    "seed": "seed", "samples": "n_samples", "quad_order": "quad_order",
    "eps_phase": "eps_phase", "out": "output_path", "format": "format", "params": "params",
    "restarts": "restarts", "minimize": "minimize", "raw": "raw",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--quad-order", type=int, help="quadrature points per dimension")
    common.add_argument("--eps-phase", type=float, help="projected-norm threshold for an undefined phase")
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--params", help="a,b,g,m1,m2,n1,n2,s1 in radians (default: U_max)")
    common.add_argument("--config", help="JSON file with config fields; flags override it")
    common.add_argument("--workers", type=int, default=1, help="threads; results do not depend on it")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qpsync", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "optimize":
            sp.add_argument("--restarts", type=int)
            sp.add_argument("--minimize", action="store_true", default=None)
        if name == "distributions":
            sp.add_argument("--raw", action="store_true", default=None,
                            help="also write per-sample values next to the histogram file")
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values = load_config(args.config) if args.config else {}
    for flag, key in _FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    values["command"] = args.command
    if args.command == "verify" and "format" not in values:
        values["format"] = "json"
    return ExperimentConfig.from_mapping(values)


def _emit(table, config: ExperimentConfig, suffix: str = "") -> None:
    if config.output_path is None:
        sys.stdout.write(dumps(table, config.format))
        return
    path = Path(config.output_path)
    if suffix:
        path = path.with_name(path.stem + suffix + path.suffix)
    write_table(table, path, config.format)
    log.info("wrote %s", path)


def run(config: ExperimentConfig, workers: int = 1) -> int:
    cmd = config.command
    if cmd == "verify":
        checks = run_verify_suite(config)
        for c in checks:
            log.info("%-32s %s  %.3g <= %.3g", c.name, "pass" if c.passed else "FAIL", c.statistic, c.threshold)
        _emit(verify_table(config, checks), config)
        return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK
    if cmd == "witness":
        table, found = run_witness(config)
        _emit(table, config)
        return EXIT_OK if found else EXIT_CHECK
    if cmd == "distributions":
        _emit(run_distributions(config, workers), config)
        if config.raw:
            _emit(raw_samples(config, workers), config, ".raw")
        return EXIT_OK
    runners = {
        "optimize": lambda: run_optimize(config, workers),
        "mean-psf": lambda: run_mean_psf(config, workers),
        "latitude-sweep": lambda: run_latitude_sweep(config),
        "concurrence-scan": lambda: run_concurrence_scan(config),
    }
    _emit(runners[cmd](), config)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = resolve_config(args)
        if args.workers < 1:
            raise InvalidInputError("--workers must be >= 1")
        return run(config, args.workers)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OutputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
