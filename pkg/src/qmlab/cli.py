"""Command line interface.

Subcommands:

* ``qmlab run <config.json>`` - execute one experiment from a config file
* ``qmlab run <experiment> [flags]`` - build the config from flags instead
* ``qmlab validate <config.json>`` - report precondition violations, no compute
* ``qmlab list-experiments`` - print the available experiment ids

Exit codes: 0 success, 2 config parse error, 3 validation failure,
4 numerical failure.  QMLAB_OUTPUT_DIR sets the default output root.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, QmlabError, ValidationError
from .runner import (
    EXPERIMENTS,
    ExperimentConfig,
    config_from_dict,
    default_output_dir,
    load_config,
    run,
    validate,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmlab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one experiment")
    run_p.add_argument("target", help="config file path, or an experiment id with flags")
    run_p.add_argument("--angles", help="bell: a,a_prime,b,b_prime in degrees")
    run_p.add_argument("--model", help="bell: qm | malus_stochastic | deterministic_threshold; "
                                       "three_polarizer: quantum")
    run_p.add_argument("--threshold", type=float, help="deterministic_threshold parameter")
    run_p.add_argument("--n-pairs", type=int, help="bell: Monte Carlo pairs per setting")
    run_p.add_argument("--alpha-sweep", help="three_polarizer: start:stop:step in degrees")
    run_p.add_argument("--k-parallel", type=float, help="three_polarizer: axis transmittance")
    run_p.add_argument("--k-perp", type=float, help="three_polarizer: cross transmittance")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", help="output directory")

    val_p = sub.add_parser("validate", help="check a config without computing")
    val_p.add_argument("config", help="config file path")

    sub.add_parser("list-experiments", help="print available experiment ids")
    return parser


def _config_from_flags(args) -> ExperimentConfig:
    experiment = args.target
    params: dict = {}
    if experiment == "bell":
        if args.angles:
            try:
                angles = [float(v) for v in args.angles.split(",")]
            except ValueError as exc:
                raise ConfigError(f"--angles must be four comma-separated numbers: {exc}") from exc
            params["angles"] = angles
        model = args.model or "qm"
        if model == "qm":
            params["model"] = "qm"
        elif model == "malus_stochastic":
            params["model"] = {"kind": "malus_stochastic"}
        elif model == "deterministic_threshold":
            params["model"] = {"kind": "deterministic_threshold"}
            if args.threshold is not None:
                params["model"]["threshold"] = args.threshold
        else:
            raise ConfigError(f"unknown bell model {model!r}")
        if args.n_pairs is not None:
            params["n_pairs"] = args.n_pairs
    elif experiment == "three_polarizer":
        if args.alpha_sweep:
            params["alphas"] = args.alpha_sweep
        model: dict = {}
        if args.k_parallel is not None:
            model["k_parallel"] = args.k_parallel
        if args.k_perp is not None:
            model["k_perp"] = args.k_perp
        if model:
            params["model"] = model
    else:
        raise ConfigError(
            f"experiment {experiment!r} has no flag form; pass a config file "
            f"(flag form exists for: bell, three_polarizer)"
        )
    return config_from_dict({"experiment": experiment, "params": params, "seed": args.seed},
                            source="<flags>")


def _cmd_run(args) -> int:
    target = Path(args.target)
    try:
        if target.exists() or args.target.endswith(".json"):
            config = load_config(target)
        elif args.target in EXPERIMENTS:
            config = _config_from_flags(args)
        else:
            raise ConfigError(f"{args.target!r} is neither a config file nor an experiment id")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    violations = validate(config)
    if violations:
        for v in violations:
            print(f"validation: {v}", file=sys.stderr)
        return EXIT_VALIDATION

    outdir = Path(args.out) if args.out else None
    try:
        run(config, output_dir=outdir)
    except ValidationError as exc:
        for v in exc.violations:
            print(f"validation: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except (QmlabError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    from .runner import default_output_dir
    final = outdir if outdir is not None else default_output_dir(config)
    print(f"wrote {final / 'run_manifest.json'}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    violations = validate(config)
    if violations:
        for v in violations:
            print(v)
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "validate":
        return _cmd_validate(args)
    for experiment in EXPERIMENTS:
        print(experiment)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
