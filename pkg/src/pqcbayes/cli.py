"""Command-line interface.

Subcommands: `train` (single seeded run), `experiment` (multi-seed run from
a JSON spec), `compile-stats` (CZ counts versus removal fraction),
`tv-shots` (sampling fidelity of a serialized circuit), and `sample` (draw
outcomes from a serialized circuit). Exit code 0 on success, 2 on contract
errors with a diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from .ansatz import bind_parameters, build_ansatz, circuit_from_text, circuit_to_text
from .harness import (
    ExperimentSpec,
    compile_stats_experiment,
    emit_plots,
    run_experiment,
    spec_from_json,
    tv_shot_experiment,
)


def _add_spec_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--problem", required=True, choices=("maxcut", "tfim", "genmodel"))
    parser.add_argument("--n-qubits", type=int, required=True)
    parser.add_argument("--depth", type=int, required=True)
    parser.add_argument("--algorithm", default="pga", choices=("ga", "pga", "sgld"))
    parser.add_argument("--iterations", type=int, default=1000)
    parser.add_argument("--k0-fraction", type=float, default=0.0)
    parser.add_argument("--beta", type=float, default=math.inf)
    parser.add_argument("--a", dest="step_a", type=float, default=15.0)
    parser.add_argument("--b", dest="step_b", type=float, default=10.0)
    parser.add_argument("--init-radius", type=float, default=1e-3)
    parser.add_argument("--dataset", default=None, help="integer dataset for genmodel")
    parser.add_argument("--shots", type=int, default=None, help="finite shots per estimate")


def _spec_from_args(args: argparse.Namespace, n_seeds: int) -> ExperimentSpec:
    return ExperimentSpec(
        problem=args.problem,
        n_qubits=args.n_qubits,
        depth=args.depth,
        algorithm=args.algorithm,
        iterations=args.iterations,
        n_seeds=n_seeds,
        seed=args.seed,
        k0_fraction=args.k0_fraction,
        beta=args.beta,
        step_a=args.step_a,
        step_b=args.step_b,
        init_radius=args.init_radius,
        dataset=args.dataset,
        n_shots=args.shots,
        output_dir=args.out,
    )


def _cmd_train(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args, n_seeds=1)
    result = run_experiment(spec)
    trace = result.traces[0]
    circuit = build_ansatz(spec.n_qubits, spec.depth)
    if args.out is not None:
        out = Path(args.out)
        bound = bind_parameters(circuit, trace.final_theta())
        (out / "final_circuit.txt").write_text(circuit_to_text(bound))
        emit_plots(result, out)
    print(f"final cost: {trace.costs[-1]:.6g}")
    print(f"final shifted cost: {trace.costs[-1] - result.c_mins[0]:.6g}")
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    spec = spec_from_json(args.spec)
    if args.out is not None:
        spec = replace(spec, output_dir=args.out)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    result = run_experiment(spec, threads=args.threads)
    for index, message in result.failures:
        print(f"seed {index} failed: {message}", file=sys.stderr)
    if spec.output_dir is not None:
        emit_plots(result, spec.output_dir)
    print(
        f"{len(result.seeds)}/{spec.n_seeds} seeds completed; "
        f"median final shifted cost: {result.median_shifted_cost[-1]:.6g}"
    )
    return 0


def _cmd_compile_stats(args: argparse.Namespace) -> int:
    spec = spec_from_json(args.spec)
    if args.out is not None:
        spec = replace(spec, output_dir=args.out)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    fractions = [float(f) for f in args.fractions.split(",")]
    sweep = compile_stats_experiment(spec, fractions, threads=args.threads)
    if spec.output_dir is not None:
        out = Path(spec.output_dir)
        for fraction, entries in sweep.compiled.items():
            index, _, compiled = entries[0]
            name = f"compiled_f{fraction:g}_seed{index}.txt"
            (out / name).write_text(circuit_to_text(compiled))
    print("fraction,median_cz,median_cost")
    for fraction, cz, cost in sweep.rows:
        print(f"{fraction:g},{cz:g},{cost:.6g}")
    return 0


def _cmd_tv_shots(args: argparse.Namespace) -> int:
    circuit = circuit_from_text(Path(args.circuit).read_text(), args.n_qubits)
    shot_grid = [int(s) for s in args.shots.split(",")]
    seeds = list(range(args.seed, args.seed + args.n_seeds))
    rows = tv_shot_experiment(None, circuit, shot_grid, seeds)
    lines = ["n_shots,median_tv,mean_tv"] + [
        f"{r['n_shots']},{r['median_tv']:.17g},{r['mean_tv']:.17g}" for r in rows
    ]
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "tv_shots.csv").write_text(text)
    print(text, end="")
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    circuit = circuit_from_text(Path(args.circuit).read_text(), args.n_qubits)
    from .harness import sample_from_circuit

    samples = sample_from_circuit(circuit, None, args.shots, args.seed)
    text = "\n".join(str(int(z)) for z in samples) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqcbayes",
        description="Train parameterised quantum circuits with sparsifying "
        "proximal updates or Langevin posterior sampling, on an exact "
        "statevector simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="single training run")
    _add_spec_args(p_train)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--out", default=None)
    p_train.set_defaults(func=_cmd_train)

    p_exp = sub.add_parser("experiment", help="multi-seed run from a JSON spec")
    p_exp.add_argument("--spec", required=True)
    p_exp.add_argument("--seed", type=int, default=None)
    p_exp.add_argument("--out", default=None)
    p_exp.add_argument("--threads", type=int, default=1)
    p_exp.set_defaults(func=_cmd_experiment)

    p_cs = sub.add_parser("compile-stats", help="CZ counts vs removal fraction")
    p_cs.add_argument("--spec", required=True)
    p_cs.add_argument("--fractions", default="0,0.15,0.3,0.45,0.6")
    p_cs.add_argument("--seed", type=int, default=None)
    p_cs.add_argument("--out", default=None)
    p_cs.add_argument("--threads", type=int, default=1)
    p_cs.set_defaults(func=_cmd_compile_stats)

    p_tv = sub.add_parser("tv-shots", help="shot-sampling fidelity of a circuit")
    p_tv.add_argument("--circuit", required=True, help="serialized bound circuit")
    p_tv.add_argument("--n-qubits", type=int, default=None)
    p_tv.add_argument("--shots", default="100,1000,10000")
    p_tv.add_argument("--n-seeds", type=int, default=5)
    p_tv.add_argument("--seed", type=int, default=0)
    p_tv.add_argument("--out", default=None)
    p_tv.set_defaults(func=_cmd_tv_shots)

    p_sample = sub.add_parser("sample", help="draw outcomes from a circuit")
    p_sample.add_argument("--circuit", required=True, help="serialized bound circuit")
    p_sample.add_argument("--n-qubits", type=int, default=None)
    p_sample.add_argument("--shots", type=int, default=1000)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", default=None)
    p_sample.set_defaults(func=_cmd_sample)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, IndexError, NotImplementedError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
