"""Command-line entry point: ``twostep-qaoa {solve,run,generate}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .engine import METHODS, AnsatzSpec, run_method
from .experiment import ConfigError, GeneratorSpec, generate_instance, load_config, load_split, run_experiment
from .hamiltonian import bitstring, violation_count
from .optimizer import OptimizerOptions
from .qubo import QuboFormatError, make_split, write_groups, write_qubo
from .simulator import TOPOLOGIES, sample


def _add_method_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default="two_step")
    p.add_argument("--p1", type=int, default=1, help="stage-one layers (two_step only)")
    p.add_argument("--p2", type=int, default=1, help="layers of the objective stage")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="penalty weight for standard_penalty")
    p.add_argument("--topology", choices=TOPOLOGIES, default="ring")
    p.add_argument("--shared-params", action="store_true", help="reuse one (gamma, beta) pair per stage")
    p.add_argument("--sequential-stages", action="store_true", help="optimize stage one on <P>, then stage two")
    p.add_argument("--project-feasible", action="store_true", help="post-select the intermediate state (diagnostic)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twostep-qaoa", description=__doc__)
    parser.add_argument("--version", action="version", version=f"twostep-qaoa {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one QUBO file and print the best feasible bitstring")
    solve.add_argument("qubo", type=Path)
    src = solve.add_mutually_exclusive_group(required=True)
    src.add_argument("--groups", type=Path, help="one-hot groups file; the QUBO is then the objective alone")
    src.add_argument("--detect", action="store_true", help="detect one-hot penalty groups in a penalized QUBO")
    _add_method_flags(solve)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--starts", type=int, default=8)
    solve.add_argument("--max-evals", type=int, default=2000)
    solve.add_argument("--shots", type=int, default=1024, help="measurements of the final state used to pick the best bitstring")

    run = sub.add_parser("run", help="run an experiment config and write a CSV report")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None, help="override the config's output path")
    run.add_argument("--seed", type=int, default=None, help="override the config's seed")

    gen = sub.add_parser("generate", help="write a random one-hot instance as QUBO and groups files")
    gen.add_argument("--group-sizes", type=int, nargs="+", required=True)
    gen.add_argument("--extra-free-vars", type=int, default=0)
    gen.add_argument("--distribution", choices=("uniform", "integer"), default="uniform")
    gen.add_argument("--low", type=float, default=0.0)
    gen.add_argument("--high", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--lambda", dest="lam", type=float, default=None, help="write the penalized QUBO with this weight")
    gen.add_argument("--qubo-out", type=Path, required=True)
    gen.add_argument("--groups-out", type=Path, default=None)
    return parser


def _solve(args: argparse.Namespace) -> int:
    split = load_split(args.qubo, args.groups, args.lam if args.lam is not None else 1.0)
    if args.detect:
        print(f"detected groups: {' | '.join(' '.join(map(str, g.indices)) for g in split.groups)}")
        print(f"detected lambda: {split.lam:.12g}")
    spec = AnsatzSpec(
        args.method,
        p2=args.p2,
        p1=args.p1 if args.method == "two_step" else 0,
        lam=args.lam,
        topology=args.topology,
        shared_params=args.shared_params,
        sequential_stages=args.sequential_stages,
        project_feasible=args.project_feasible,
    )
    opt = OptimizerOptions(n_starts=args.starts, max_evals=args.max_evals, seed=args.seed)
    result = run_method(split, spec, opt)
    if not result.ok:
        print(result.status, file=sys.stderr)
        return 1
    n = split.n
    z = result.best_bitstring
    counts = sample(result.final_state, args.shots, args.seed) if args.shots > 0 else {}
    feasible = [s for s in counts if violation_count(split.groups, s) == 0]
    if feasible:
        # Lowest-energy feasible measurement; ties go to the smaller string.
        z = min((split.cost.energy(s), int(s, 2)) for s in feasible)[1]
    print(f"method: {result.method} p1={result.p1} p2={result.p2}" + (f" lambda={result.lam:.12g}" if result.lam else ""))
    source = f"best of {args.shots} shots" if feasible else "most probable"
    print(f"best feasible bitstring: {bitstring(z, n)}  ({source}; variable 0 is the rightmost bit)")
    print("assignment: " + " ".join(f"x{i}={(z >> i) & 1}" for i in range(n)))
    print(f"energy: {split.cost.energy(z):.12g}")
    for name in (
        "expectation",
        "feasible_expectation",
        "feasibility_probability",
        "ground_state_probability",
        "approximation_ratio",
    ):
        print(f"{name}: {getattr(result, name):.12g}")
    print(f"optimizer_evals: {result.optimizer_evals}")
    if counts:
        top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
        print("samples: " + ", ".join(f"{k}:{v}" for k, v in top))
    return 0


def _run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.output = args.out
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.optimizer = replace(cfg.optimizer, seed=args.seed)
        if cfg.generator is not None:
            cfg.generator = replace(cfg.generator, seed=args.seed)
    text = run_experiment(cfg)
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {cfg.output}")
    return 0


def _generate(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(
        tuple(args.group_sizes),
        args.distribution,
        args.low,
        args.high,
        args.extra_free_vars,
        args.seed,
    )
    cost, groups = generate_instance(spec)
    q = cost
    if args.lam is not None:
        q = make_split(cost, groups, args.lam).recombined()
    write_qubo(q, args.qubo_out)
    if args.groups_out is not None:
        write_groups(groups, args.groups_out)
    print(f"wrote n={cost.n} instance with {len(groups)} groups to {args.qubo_out}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"solve": _solve, "run": _run, "generate": _generate}
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except (QuboFormatError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
