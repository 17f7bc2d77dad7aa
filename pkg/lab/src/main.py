"""Command line entry point of the laboratory.

    muskat-lab [--config FILE] [--out DIR] [--threads N] [--seed S] [--verbose]
               <group> <action> [options]

Exit codes: 0 success, 1 invalid arguments, 2 failed check or trend,
3 capacity exceeded.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from pydantic import ValidationError

from . import config as env
from .besov_norm import besov_norm, norm_upper_bound_check
from .errors import ArgumentError, CapacityError, LabError, ToleranceError
from .gamma_kernel import gamma_check_suite
from .ledger import run_inflation_demo, run_ledger, time_grid
from .oracle import oracle_compare
from .reports import FORMATS, emit, write_json
from .schemas import ExperimentConfig, NormParams
from .second_iterate import assemble_component, measure_component_norms
from .sequences import (
    SequenceFamily,
    build_initial_data,
    family_hash,
    generate_family,
    validate_family,
)
from .version import get_version

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ARGUMENT = 1
EXIT_FAILED = 2
EXIT_CAPACITY = 3


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Experiment file (if any) with ``--out`` applied on top.

    Raises:
        ArgumentError: If the file does not validate
    """
    try:
        if args.config:
            text = Path(args.config).read_text()
            cfg = ExperimentConfig.model_validate_json(text)
        else:
            cfg = ExperimentConfig()
    except ValidationError as e:
        raise ArgumentError(f"invalid experiment configuration: {e}") from e
    if args.out:
        cfg = cfg.model_copy(update={"output_dir": args.out})
    return cfg


def _family(cfg: ExperimentConfig, args: argparse.Namespace) -> SequenceFamily:
    if getattr(args, "family", None):
        return SequenceFamily.from_json(Path(args.family).read_text())
    N = args.N if args.N is not None else cfg.sweep[0]
    return generate_family(
        cfg.ell,
        cfg.p,
        cfg.q,
        cfg.epsilon,
        cfg.delta,
        cfg.M,
        N,
        cfg.strict_separation,
    )


def cmd_gamma_check(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    samples = args.samples or cfg.gamma_samples
    summary = gamma_check_suite(rng, samples, args.orders, args.oracle_samples)
    summary["seed"] = args.seed
    path = write_json(summary, Path(cfg.output_dir) / "gamma_check.json")
    print(f"gamma check: passed={summary['passed']} -> {path}")
    return EXIT_OK if summary["passed"] else EXIT_FAILED


def cmd_sequence_gen(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    family = _family(cfg, args)
    conditions = validate_family(family)
    out = Path(cfg.output_dir)
    path = out / f"family_N{family.N}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(family.to_json() + "\n", encoding="utf-8")
    write_json(
        {
            "hash": family_hash(family),
            "conditions": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in conditions
            ],
        },
        out / f"family_N{family.N}.conditions.json",
    )
    print(f"family N={family.N} hash={family_hash(family)} -> {path}")
    return EXIT_OK if all(c.passed for c in conditions) else EXIT_FAILED


def cmd_norm_eval(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    family = _family(cfg, args)
    result = norm_upper_bound_check(family)
    if args.s is not None:
        params = NormParams(s=args.s, p=cfg.p, q=cfg.q)
        result["s"] = args.s
        result["norm_at_s"] = besov_norm(build_initial_data(family), params)
    result["family_hash"] = family_hash(family)
    path = write_json(result, Path(cfg.output_dir) / f"norm_N{family.N}.json")
    print(f"norm N={family.N}: {result['norm']!r} -> {path}")
    return EXIT_OK


def cmd_iterate_assemble(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    family = _family(cfg, args)
    k = args.k or family.ell
    if args.t is not None:
        t = args.t
    elif args.t_factor is not None:
        t = args.t_factor / family.k_N
    else:
        t = time_grid(cfg, family.k_N)[0][0]
    component = assemble_component(
        family,
        k,
        t,
        cfg.quadrature,
        cfg.time_nodes,
        exact_time=cfg.exact_time,
        prefactor_mode=cfg.prefactor_mode,
        max_tuples=cfg.max_tuples,
    )
    params = cfg.norm_params()
    summary = measure_component_norms(component, params, family, cfg.quadrature)
    payload = summary.model_dump()
    payload["family_hash"] = family_hash(family)
    path = write_json(payload, Path(cfg.output_dir) / f"iterate_N{family.N}_k{k}.json")
    print(f"f_{k} at t={t!r}: norm {summary.f_norm!r} -> {path}")
    return EXIT_OK if summary.triangle_ok else EXIT_FAILED


def cmd_oracle_compare(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    result = oracle_compare(cfg.oracle, args.k, exact_time=cfg.exact_time)
    path = write_json(result, Path(cfg.output_dir) / f"oracle_k{args.k}.json")
    print(f"oracle k={args.k}: difference {result['relative_difference']!r} -> {path}")
    return EXIT_OK if result["passed"] else EXIT_FAILED


def _emit_all(report, cfg: ExperimentConfig, formats: Sequence[str]) -> None:
    for fmt in formats:
        for path in emit(report, fmt, cfg.output_dir):
            print(f"wrote {path}")


def cmd_ledger_run(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    report = run_ledger(cfg, args.threads)
    _emit_all(report, cfg, args.format)
    for failure in report.failures:
        print(f"FAILED: {failure}")
    return EXIT_OK if report.status == "OK" else EXIT_FAILED


def cmd_inflate_demo(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    report = run_inflation_demo(cfg, args.R, args.threads)
    _emit_all(report, cfg, args.format)
    demo = report.demo
    print(
        f"inflation R={args.R}: {demo.label}, best ratio {demo.best_ratio!r}, "
        f"extrapolated N {demo.extrapolated_N}"
    )
    for failure in report.failures:
        print(f"FAILED: {failure}")
    return EXIT_OK if report.status == "OK" else EXIT_FAILED


def _add_family_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--N", type=int, help="Family index N (default: first sweep N)")
    parser.add_argument("--family", help="Load the family from a JSON file instead")


class LabArgumentParser(argparse.ArgumentParser):
    """Parser reporting usage errors as ArgumentError instead of exiting."""

    def error(self, message: str):
        raise ArgumentError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = LabArgumentParser(
        prog="muskat-lab",
        description="Norm inflation laboratory for truncated Muskat equations",
    )
    parser.add_argument("--version", action="version", version=get_version())
    parser.add_argument("--config", help="Experiment configuration (JSON)")
    parser.add_argument("--out", help="Output directory (default: LAB_OUTPUT_DIR)")
    parser.add_argument("--threads", type=int, help="Worker processes for sweeps")
    parser.add_argument("--seed", type=int, help="Seed for randomized sampling")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    groups = parser.add_subparsers(dest="group", required=True)

    gamma = groups.add_parser("gamma").add_subparsers(dest="action", required=True)
    check = gamma.add_parser("check", help="Randomized kernel property suite")
    check.add_argument("--samples", type=int, help="Tuples per property")
    check.add_argument("--orders", type=int, nargs="+", default=[1, 2])
    check.add_argument("--oracle-samples", type=int, default=20)
    check.set_defaults(handler=cmd_gamma_check)

    sequence = groups.add_parser("sequence")
    sequence = sequence.add_subparsers(dest="action", required=True)
    gen = sequence.add_parser("gen", help="Generate and validate a family")
    _add_family_options(gen)
    gen.set_defaults(handler=cmd_sequence_gen)

    norm = groups.add_parser("norm").add_subparsers(dest="action", required=True)
    evaluate = norm.add_parser("eval", help="Norm of the initial data")
    _add_family_options(evaluate)
    evaluate.add_argument("--s", type=float, help="Extra regularity index to evaluate")
    evaluate.set_defaults(handler=cmd_norm_eval)

    iterate = groups.add_parser("iterate").add_subparsers(dest="action", required=True)
    assemble = iterate.add_parser("assemble", help="Assemble and measure f_k")
    _add_family_options(assemble)
    assemble.add_argument("--k", type=int, help="Component order (default: ell)")
    when = assemble.add_mutually_exclusive_group()
    when.add_argument("--t", type=float, help="Evaluation time")
    when.add_argument("--t-factor", type=float, help="Evaluation time as t k_N")
    assemble.set_defaults(handler=cmd_iterate_assemble)

    oracle = groups.add_parser("oracle").add_subparsers(dest="action", required=True)
    compare = oracle.add_parser("compare", help="Physical-space cross check")
    compare.add_argument("--k", type=int, default=1)
    compare.set_defaults(handler=cmd_oracle_compare)

    ledger = groups.add_parser("ledger").add_subparsers(dest="action", required=True)
    run = ledger.add_parser("run", help="I_1 ... I_6 ledger over the sweep")
    run.add_argument("--format", nargs="+", choices=FORMATS, default=list(FORMATS))
    run.set_defaults(handler=cmd_ledger_run)

    inflate = groups.add_parser("inflate").add_subparsers(dest="action", required=True)
    demo = inflate.add_parser("demo", help="Inflation ratio and extrapolation")
    demo.add_argument("--R", type=float, required=True, help="Target inflation R")
    demo.add_argument("--format", nargs="+", choices=FORMATS, default=list(FORMATS))
    demo.set_defaults(handler=cmd_inflate_demo)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one command and map errors onto exit codes."""
    try:
        args = build_parser().parse_args(argv)
        handler: Callable[[ExperimentConfig, argparse.Namespace], int] = args.handler
        env.configure_logging(args.verbose)
        if args.seed is None:
            args.seed = env.seed()
        if args.threads is None:
            args.threads = env.threads()
        if args.threads < 1:
            raise ArgumentError(f"--threads must be >= 1, got {args.threads}")
        cfg = load_config(args)
        return handler(cfg, args)
    except CapacityError as e:
        logger.error(f"Capacity exceeded: {e}")
        return EXIT_CAPACITY
    except ToleranceError as e:
        logger.error(f"Tolerance not met: {e}")
        return EXIT_FAILED
    except (ArgumentError, ValueError) as e:
        logger.error(f"Invalid argument: {e}")
        return EXIT_ARGUMENT
    except (LabError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
