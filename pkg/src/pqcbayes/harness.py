"""Problem generators, dataset ingestion, and multi-seed experiments.

An ExperimentSpec names a problem (weighted max-cut on random 3-regular
graphs, a transverse-field Ising chain with random field strength, or a
generative model of an integer dataset), an ansatz shape, and a training
configuration. run_experiment trains it across seeds with fresh problem
instances and initial parameters per seed, shifts costs by the exact
problem optimum, and writes per-seed trace CSVs plus an aggregate of the
median shifted cost per iteration. Companion sweeps measure compiled CZ
counts against the removal fraction and shot-sampling fidelity, and plots
are emitted as SVG.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .ansatz import CircuitIR, build_ansatz, gate_counts, prune_and_cancel
from .costs import (
    EmpiricalDist,
    KernelSpec,
    WeightedGraph,
    maxcut_optimum,
    median_heuristic,
    tfim_ground_energy,
    total_variation,
)
from .gradients import CostEvaluator
from .optim import (
    StepSchedule,
    TrainConfig,
    TrainingTrace,
    run_training,
    trace_to_csv,
)
from .seeds import derive_seed
from .sim import born_probabilities, counts_to_probs, run_circuit, sample_counts

PROBLEMS = ("maxcut", "tfim", "genmodel")

DEFAULT_SEEDS = 20
DEFAULT_ITERATIONS = 1000
DEFAULT_STEP_A = 15.0
DEFAULT_STEP_B = 10.0
DEFAULT_INIT_RADIUS = 1e-3
DEFAULT_BURN_IN = 400

# per-seed stream tags
_STREAM_INSTANCE = 0
_STREAM_INIT = 1
_STREAM_NOISE = 2
_STREAM_SHOTS = 3


# -- generators and ingestion ---------------------------------------------------

def gen_3regular_weighted(n_nodes: int, seed) -> WeightedGraph:
    """Uniform random simple 3-regular graph with Uniform[0,1] edge weights.

    Uses the pairing model with full rejection of self-loops and multi-edges,
    which is exactly uniform over simple 3-regular graphs. Requires an even
    n_nodes >= 4.
    """
    if n_nodes < 4 or n_nodes % 2:
        raise ValueError(f"3-regular graphs need an even node count >= 4, got {n_nodes}")
    rng = np.random.default_rng(seed)
    while True:
        stubs = np.repeat(np.arange(n_nodes), 3)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        edges = {(min(a, b), max(a, b)) for a, b in pairs}
        if len(edges) < pairs.shape[0]:
            continue
        break
    edge_list = sorted(edges)
    weights = rng.uniform(0.0, 1.0, size=len(edge_list))
    return WeightedGraph(n_nodes, tuple((i, j, w) for (i, j), w in zip(edge_list, weights)))


def sample_tfim_g(seed) -> float:
    """One field strength drawn from Normal(0, 1/4), i.e. standard deviation 1/2."""
    return float(np.random.default_rng(seed).normal(0.0, 0.5))


def init_params(n_params: int, radius: float, seed) -> np.ndarray:
    """Initial angles drawn i.i.d. from Uniform(-radius, radius)."""
    if n_params < 1:
        raise ValueError(f"need at least one parameter, got {n_params}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return np.random.default_rng(seed).uniform(-radius, radius, size=n_params)


def read_integer_file(path) -> list[int]:
    """Raw dataset values, one integer per line; errors name the line."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    values = []
    for lineno, raw in enumerate(lines, start=1):
        try:
            values.append(int(raw))
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: not an integer: {raw!r}") from exc
    if not values:
        raise ValueError(f"{path}: empty dataset")
    return values


def load_integer_dataset(path, n_qubits: int) -> EmpiricalDist:
    """Empirical distribution of an integer dataset over 2**n_qubits outcomes."""
    values = read_integer_file(path)
    size = 1 << n_qubits
    probs = np.zeros(size)
    for lineno, value in enumerate(values, start=1):
        if not 0 <= value < size:
            raise ValueError(
                f"{path}: line {lineno}: value {value} outside [0, {size})"
            )
        probs[value] += 1.0
    return EmpiricalDist(probs / len(values), len(values))


def surrogate_dataset_path() -> Path:
    """Bundled stand-in dataset: 485 bimodal integers in [60, 131]."""
    return Path(str(resources.files("pqcbayes") / "data" / "stamp_surrogate.txt"))


# -- experiment specification ------------------------------------------------------

@dataclass
class ExperimentSpec:
    """A full experiment: problem, ansatz shape, training knobs, seed plan."""

    problem: str
    n_qubits: int
    depth: int
    algorithm: str = "pga"
    iterations: int = DEFAULT_ITERATIONS
    n_seeds: int = DEFAULT_SEEDS
    seed: int = 0
    k0_fraction: float = 0.0
    beta: float = math.inf
    step_a: float = DEFAULT_STEP_A
    step_b: float = DEFAULT_STEP_B
    init_radius: float = DEFAULT_INIT_RADIUS
    n_nodes: int | None = None
    dataset: str | None = None
    n_shots: int | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if self.n_seeds < 1:
            raise ValueError(f"n_seeds must be >= 1, got {self.n_seeds}")
        if not 0.0 <= self.k0_fraction <= 1.0:
            raise ValueError(f"k0_fraction must be in [0, 1], got {self.k0_fraction}")
        if self.init_radius <= 0:
            raise ValueError(f"init_radius must be positive, got {self.init_radius}")
        if self.problem == "maxcut":
            if self.n_nodes is None:
                self.n_nodes = self.n_qubits + 1
            if self.n_nodes != self.n_qubits + 1:
                raise ValueError(
                    f"{self.n_qubits} qubits label {self.n_qubits + 1} nodes, "
                    f"got n_nodes={self.n_nodes}"
                )
        if self.problem == "tfim" and self.n_qubits < 2:
            raise ValueError("tfim needs at least 2 qubits")
        if self.problem == "genmodel" and self.dataset is None:
            self.dataset = str(surrogate_dataset_path())


def spec_from_json(path) -> ExperimentSpec:
    """Load an ExperimentSpec from a JSON object file."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected a JSON object")
    known = {f.name for f in fields(ExperimentSpec)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"{path}: unknown spec keys {sorted(unknown)}")
    if isinstance(raw.get("beta"), str):
        raw["beta"] = float(raw["beta"])
    return ExperimentSpec(**raw)


def spec_to_json(spec: ExperimentSpec, path) -> None:
    payload = asdict(spec)
    if math.isinf(payload["beta"]):
        payload["beta"] = "inf"
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _make_evaluator(spec: ExperimentSpec, circuit: CircuitIR, index: int):
    """Fresh problem instance for one seed; returns (evaluator, exact optimum)."""
    instance_seed = derive_seed(spec.seed, index, _STREAM_INSTANCE)
    mode_kwargs = {}
    if spec.n_shots is not None:
        mode_kwargs = {
            "mode": "shots",
            "n_shots": spec.n_shots,
            "seed": derive_seed(spec.seed, index, _STREAM_SHOTS),
        }
    if spec.problem == "maxcut":
        graph = gen_3regular_weighted(spec.n_nodes, instance_seed)
        evaluator = CostEvaluator.maxcut(circuit, graph, **mode_kwargs)
        c_min = -maxcut_optimum(graph)[1]
    elif spec.problem == "tfim":
        g = sample_tfim_g(instance_seed)
        evaluator = CostEvaluator.tfim(circuit, g, **mode_kwargs)
        c_min = tfim_ground_energy(spec.n_qubits, g)
    else:
        values = read_integer_file(spec.dataset)
        data = load_integer_dataset(spec.dataset, spec.n_qubits)
        kernel = KernelSpec(median_heuristic(values))
        evaluator = CostEvaluator.mmd(circuit, data, kernel, **mode_kwargs)
        # squared MMD is nonnegative with infimum 0, the natural shift origin
        c_min = 0.0
    return evaluator, c_min


def _train_config(spec: ExperimentSpec, n_params: int, index: int) -> TrainConfig:
    return TrainConfig(
        algorithm=spec.algorithm,
        iterations=spec.iterations,
        schedule=StepSchedule(spec.step_a, spec.step_b),
        beta=spec.beta,
        k0=round(spec.k0_fraction * n_params),
        seed=derive_seed(spec.seed, index, _STREAM_NOISE),
    )


def _run_seed(spec: ExperimentSpec, index: int) -> tuple[int, TrainingTrace, float]:
    circuit = build_ansatz(spec.n_qubits, spec.depth)
    evaluator, c_min = _make_evaluator(spec, circuit, index)
    theta0 = init_params(
        circuit.n_params, spec.init_radius, derive_seed(spec.seed, index, _STREAM_INIT)
    )
    trace = run_training(evaluator, _train_config(spec, circuit.n_params, index), theta0)
    return index, trace, c_min


# -- multi-seed runs -----------------------------------------------------------------

@dataclass
class RunResult:
    """Completed traces of a multi-seed experiment plus the aggregate curve."""

    spec: ExperimentSpec
    seeds: list[int]
    traces: list[TrainingTrace]
    c_mins: list[float]
    median_shifted_cost: np.ndarray
    failures: list[tuple[int, str]]

    def shifted_costs(self) -> np.ndarray:
        """Per-seed cost curves minus each instance's exact optimum, (S, T+1)."""
        return np.stack([t.costs - c for t, c in zip(self.traces, self.c_mins)])


def _fmt(x: float) -> str:
    return format(x, ".17g")


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> RunResult:
    """Train every seed on a fresh instance; aggregate the median shifted cost.

    Per-seed failures are recorded and skipped; the aggregate needs at least
    one completed seed. With output_dir set, writes trace_<seed>.csv per seed
    and aggregate.csv (`iter,median_shifted_cost`); reruns of the same spec
    produce byte-identical files.
    """
    outcomes: dict[int, tuple[TrainingTrace, float]] = {}
    failures: list[tuple[int, str]] = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {i: pool.submit(_run_seed, spec, i) for i in range(spec.n_seeds)}
            for i, future in futures.items():
                try:
                    index, trace, c_min = future.result()
                    outcomes[index] = (trace, c_min)
                except Exception as exc:  # noqa: BLE001 - per-seed isolation
                    failures.append((i, f"{type(exc).__name__}: {exc}"))
    else:
        for i in range(spec.n_seeds):
            try:
                index, trace, c_min = _run_seed(spec, i)
                outcomes[index] = (trace, c_min)
            except Exception as exc:  # noqa: BLE001 - per-seed isolation
                failures.append((i, f"{type(exc).__name__}: {exc}"))
    if not outcomes:
        raise RuntimeError(f"all {spec.n_seeds} seeds failed; first: {failures[0][1]}")

    seeds = sorted(outcomes)
    traces = [outcomes[i][0] for i in seeds]
    c_mins = [outcomes[i][1] for i in seeds]
    shifted = np.stack([t.costs - c for t, c in zip(traces, c_mins)])
    median = np.median(shifted, axis=0)
    result = RunResult(spec, seeds, traces, c_mins, median, failures)
    if spec.output_dir is not None:
        write_run_outputs(result, spec.output_dir)
    return result


def write_run_outputs(result: RunResult, output_dir) -> list[Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for index, trace in zip(result.seeds, result.traces):
        path = out / f"trace_{index}.csv"
        trace_to_csv(trace, path)
        written.append(path)
    agg = out / "aggregate.csv"
    with open(agg, "w", newline="\n") as fh:
        fh.write("iter,median_shifted_cost\n")
        for t, value in enumerate(result.median_shifted_cost):
            fh.write(f"{t},{_fmt(value)}\n")
    written.append(agg)
    return written


# -- compile-statistics sweep ----------------------------------------------------------

@dataclass
class CompileSweep:
    """CZ counts and final costs after compiling trained circuits."""

    rows: list[tuple[float, float, float]]
    compiled: dict[float, list[tuple[int, np.ndarray, CircuitIR]]]


def compile_stats_experiment(
    spec: ExperimentSpec, removal_fractions, threads: int = 1
) -> CompileSweep:
    """Train at each removal fraction, compile the final circuits, tally CZs.

    Returns one row (fraction, median CZ count, median final cost) per
    fraction; the same per-seed instances and initial parameters are reused
    across fractions. Writes compile_stats.csv when output_dir is set.
    """
    fractions = [float(f) for f in removal_fractions]
    if any(not 0.0 <= f <= 1.0 for f in fractions):
        raise ValueError(f"fractions must lie in [0, 1], got {fractions}")
    circuit = build_ansatz(spec.n_qubits, spec.depth)
    rows = []
    compiled: dict[float, list[tuple[int, np.ndarray, CircuitIR]]] = {}
    for fraction in fractions:
        sub = replace(spec, k0_fraction=fraction, output_dir=None)
        result = run_experiment(sub, threads=threads)
        entries = []
        for index, trace in zip(result.seeds, result.traces):
            theta_final = trace.final_theta()
            entries.append((index, theta_final, prune_and_cancel(circuit, theta_final)))
        compiled[fraction] = entries
        cz_counts = [gate_counts(c).cz for _, _, c in entries]
        final_costs = [t.costs[-1] for t in result.traces]
        rows.append((fraction, float(np.median(cz_counts)), float(np.median(final_costs))))
    if spec.output_dir is not None:
        out = Path(spec.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "compile_stats.csv", "w", newline="\n") as fh:
            fh.write("fraction,median_cz,median_cost\n")
            for fraction, cz, cost in rows:
                fh.write(f"{_fmt(fraction)},{_fmt(cz)},{_fmt(cost)}\n")
    return CompileSweep(rows, compiled)


# -- shot-sampling fidelity ---------------------------------------------------------------

def tv_shot_experiment(trained_theta, circuit: CircuitIR, shot_grid, seeds) -> list[dict]:
    """Total variation between finite-shot and exact output distributions.

    For each shot count, samples the trained circuit once per seed and
    reports the median and mean TV against the exact Born distribution.
    """
    exact = born_probabilities(run_circuit(circuit, trained_theta))
    rows = []
    for n_shots in shot_grid:
        tvs = [
            total_variation(
                counts_to_probs(sample_counts(exact, int(n_shots), s), exact.size), exact
            )
            for s in seeds
        ]
        rows.append(
            {
                "n_shots": int(n_shots),
                "median_tv": float(np.median(tvs)),
                "mean_tv": float(np.mean(tvs)),
            }
        )
    return rows


def sample_from_circuit(circuit: CircuitIR, theta, n_samples: int, seed) -> np.ndarray:
    """Draw outcome integers from a circuit's Born distribution."""
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    probs = born_probabilities(run_circuit(circuit, theta))
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    return np.random.default_rng(seed).choice(probs.size, size=n_samples, p=probs)


def ergodic_samples(
    trace: TrainingTrace,
    circuit: CircuitIR,
    burn_in: int,
    per_iterate: int,
    seed: int,
) -> np.ndarray:
    """Pooled draws, per_iterate from each post-burn-in iterate's model."""
    total = trace.iterations
    if not 0 <= burn_in < total:
        raise ValueError(f"burn_in must be in [0, {total}), got {burn_in}")
    thetas = trace.theta_history()
    chunks = [
        sample_from_circuit(circuit, thetas[t], per_iterate, derive_seed(seed, t))
        for t in range(burn_in + 1, total + 1)
    ]
    return np.concatenate(chunks)


# -- plots ------------------------------------------------------------------------------

def emit_plots(result: RunResult, output_dir, n_samples: int = 1000) -> list[Path]:
    """Write SVG summaries of a run: convergence, threshold adaptation,
    and (for generative models) sampled-versus-data histograms."""
    from matplotlib.figure import Figure  # deferred: keeps core import light

    if not result.traces:
        raise ValueError("no completed traces to plot")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.subplots()
    iters = np.arange(result.median_shifted_cost.size)
    ax.plot(iters, np.maximum(result.median_shifted_cost, 1e-12))
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("median shifted cost")
    ax.set_title(f"{result.spec.problem}: median over {len(result.seeds)} seeds")
    path = out / "cost_convergence.svg"
    fig.savefig(path, format="svg")
    written.append(path)

    trace = result.traces[0]
    if trace.config.algorithm == "pga" and trace.iterations > 0:
        thetas = trace.theta_history()
        flips = np.abs(np.diff(trace.zero_masks.astype(int), axis=0)).sum(axis=0)
        first, second = np.argsort(-flips)[:2]
        fig = Figure(figsize=(6.0, 5.0))
        ax_alpha, ax_theta = fig.subplots(2, 1, sharex=True)
        ax_alpha.plot(np.arange(1, trace.iterations + 1), trace.alphas[1:])
        ax_alpha.set_ylabel("adaptive threshold")
        for k in (int(first), int(second)):
            ax_theta.plot(np.arange(thetas.shape[0]), thetas[:, k], label=f"parameter {k}")
        ax_theta.axhline(0.0, color="gray", lw=0.5)
        ax_theta.set_xlabel("iteration")
        ax_theta.set_ylabel("parameter value")
        ax_theta.legend()
        path = out / "alpha_adaptation.svg"
        fig.savefig(path, format="svg")
        written.append(path)

    if result.spec.problem == "genmodel":
        circuit = build_ansatz(result.spec.n_qubits, result.spec.depth)
        if trace.config.algorithm == "sgld" and trace.iterations > 1:
            burn = min(DEFAULT_BURN_IN, trace.iterations - 1)
            per_iterate = max(1, n_samples // (trace.iterations - burn))
            samples = ergodic_samples(trace, circuit, burn, per_iterate, result.spec.seed)
        else:
            samples = sample_from_circuit(
                circuit, trace.final_theta(), n_samples, derive_seed(result.spec.seed, 97)
            )
        data_values = np.array(read_integer_file(result.spec.dataset))
        fig = Figure(figsize=(6.0, 4.0))
        ax = fig.subplots()
        lo = int(min(samples.min(), data_values.min()))
        hi = int(max(samples.max(), data_values.max()))
        bins = np.arange(lo, hi + 2) - 0.5
        ax.hist(data_values, bins=bins, density=True, alpha=0.5, label="data")
        ax.hist(samples, bins=bins, density=True, alpha=0.5, label="model samples")
        ax.set_xlabel("outcome")
        ax.set_ylabel("frequency")
        ax.legend()
        path = out / "samples_histogram.svg"
        fig.savefig(path, format="svg")
        written.append(path)

    return written
