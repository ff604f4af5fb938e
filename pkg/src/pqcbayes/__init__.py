"""Bayesian training of parameterised quantum circuits.

Exact statevector simulation of {H, Rx, Rz, CZ} circuits; three training
costs (weighted max-cut, transverse-field Ising energy, maximum mean
discrepancy) with exact oracles; shifted-circuit gradients; and three
optimisers over the induced posterior: gradient ascent, proximal gradient
ascent with an adaptive sparsifying threshold, and stochastic gradient
Langevin dynamics. A multi-seed experiment harness and CLI sit on top.
"""

from .ansatz import (
    CircuitIR,
    GateCounts,
    bind_parameters,
    build_ansatz,
    cancel_cz_pairs,
    circuit_from_text,
    circuit_to_text,
    gate_counts,
    prune_and_cancel,
    prune_zero_rotations,
)
from .costs import (
    EmpiricalDist,
    KernelSpec,
    WeightedGraph,
    cut_value,
    decode_int,
    encode_int,
    gaussian_kernel,
    load_graph,
    maxcut_cost,
    maxcut_optimum,
    median_heuristic,
    mmd_cost,
    save_graph,
    tfim_cost,
    tfim_ground_energy,
    total_variation,
)
from .gradients import CostEvaluator, finite_difference_gradient, parameter_shift_gradient
from .harness import (
    ExperimentSpec,
    RunResult,
    compile_stats_experiment,
    emit_plots,
    gen_3regular_weighted,
    init_params,
    load_integer_dataset,
    run_experiment,
    sample_from_circuit,
    sample_tfim_g,
    spec_from_json,
    surrogate_dataset_path,
    tv_shot_experiment,
)
from .optim import (
    ConstantSchedule,
    CustomPrior,
    LaplacePrior,
    StepSchedule,
    TrainConfig,
    TrainingTrace,
    UniformPrior,
    adaptive_alpha,
    ergodic_average,
    ga_step,
    log_prior_gradient,
    pga_step,
    run_training,
    sgld_step,
    soft_threshold,
    stepsize,
    trace_to_csv,
)
from .sim import (
    GateOp,
    StateVector,
    apply_gate,
    born_probabilities,
    expectation_diagonal,
    expectation_tfim,
    init_zero_state,
    run_circuit,
    run_circuit_batch,
    sample_counts,
)

__version__ = "0.1.0"
