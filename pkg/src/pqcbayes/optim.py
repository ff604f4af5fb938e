"""Priors, stepsize schedules, and the three training loops.

Training maximises the log posterior log p(theta) - beta * C(theta):

* gradient ascent ("ga"): theta += eps/beta * grad log p - eps * grad C;
  beta = inf drops the prior term and recovers plain gradient descent on C.
* proximal gradient ascent ("pga"): a gradient step followed by
  soft-thresholding, with the threshold adapted each iteration so that
  exactly K0 parameters are set to exactly 0.0 (magnitude ties can zero
  more; such iterations are recorded as tie events).
* stochastic gradient Langevin dynamics ("sgld"): the gradient ascent step
  plus Gaussian noise of variance 2*eps/beta per component, which samples
  the posterior under a decaying stepsize schedule.

Every run produces a TrainingTrace (theta, exact cost, stepsize, threshold
and zero-mask per iteration) that can be written as CSV and consumed by
ergodic averaging.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .seeds import iteration_rng

ALGORITHMS = ("ga", "pga", "sgld")


# -- priors -------------------------------------------------------------------

class Prior:
    """Marker base class for parameter priors."""


@dataclass(frozen=True)
class UniformPrior(Prior):
    """Flat prior; zero log-density gradient everywhere."""


@dataclass(frozen=True)
class LaplacePrior(Prior):
    """p(theta) proportional to exp(-alpha * sum_k |theta_k|)."""

    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")


@dataclass(frozen=True)
class CustomPrior(Prior):
    """User-supplied log-density gradient theta -> vector."""

    log_density_gradient: Callable[[np.ndarray], np.ndarray]


def log_prior_gradient(prior: Prior, theta) -> np.ndarray:
    """Gradient of log p(theta) for the supported priors.

    The Laplace gradient -alpha * sign(theta) is undefined at exact zeros;
    sparse iterates belong to the proximal update, not to this function.
    """
    theta = np.asarray(theta, dtype=float)
    if isinstance(prior, UniformPrior):
        return np.zeros_like(theta)
    if isinstance(prior, LaplacePrior):
        if np.any(theta == 0.0):
            raise ValueError(
                "Laplace log-prior gradient is undefined at exact zeros; "
                "use proximal gradient ascent for sparse iterates"
            )
        return -prior.alpha * np.sign(theta)
    if isinstance(prior, CustomPrior):
        return np.asarray(prior.log_density_gradient(theta), dtype=float)
    raise TypeError(f"unknown prior {prior!r}")


# -- stepsize schedules ---------------------------------------------------------

@dataclass(frozen=True)
class StepSchedule:
    """Decaying stepsize eps_t = a * (t + b)**(-1/3), t >= 1."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if not self.b >= 0:
            raise ValueError(f"b must be >= 0, got {self.b}")


@dataclass(frozen=True)
class ConstantSchedule:
    """Fixed stepsize, for toy problems and stationary-distribution checks."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")


def stepsize(t: int, schedule) -> float:
    """Stepsize at iteration t (1-based)."""
    if t < 1:
        raise ValueError(f"iterations are 1-based, got t={t}")
    if isinstance(schedule, ConstantSchedule):
        return schedule.eps
    return schedule.a * (t + schedule.b) ** (-1.0 / 3.0)


# -- single update steps ----------------------------------------------------------

def ga_step(theta, grad_cost, grad_logprior, eps: float, beta: float) -> np.ndarray:
    """theta + eps/beta * grad log p - eps * grad C; beta=inf drops the prior."""
    theta = np.asarray(theta, dtype=float)
    grad_cost = np.asarray(grad_cost, dtype=float)
    if math.isinf(beta):
        return theta - eps * grad_cost
    return theta + (eps / beta) * np.asarray(grad_logprior, dtype=float) - eps * grad_cost


def soft_threshold(theta, upsilon: float) -> np.ndarray:
    """Shrink each component toward zero by upsilon; |theta_k| <= upsilon maps to 0.0."""
    if upsilon < 0:
        raise ValueError(f"upsilon must be >= 0, got {upsilon}")
    theta = np.asarray(theta, dtype=float)
    return np.sign(theta) * np.maximum(np.abs(theta) - upsilon, 0.0)


def adaptive_alpha(theta_half, eps: float, k0: int) -> float:
    """Regularisation strength that zeroes the K0 smallest-magnitude components.

    Returns the K0-th smallest |theta_half| divided by eps (0 when K0 = 0);
    with the inclusive soft threshold this yields exactly K0 zeros unless
    magnitudes tie, in which case more may be zeroed.
    """
    theta_half = np.asarray(theta_half, dtype=float)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not 0 <= k0 <= theta_half.size:
        raise ValueError(f"K0 must be in [0, {theta_half.size}], got {k0}")
    if k0 == 0:
        return 0.0
    magnitudes = np.sort(np.abs(theta_half))
    return float(magnitudes[k0 - 1]) / eps


def pga_step(theta, grad_cost, eps: float, k0: int) -> tuple[np.ndarray, float]:
    """Gradient step then soft threshold; returns (new theta, alpha_t).

    The threshold is applied as the K0-th smallest magnitude itself rather
    than (alpha_t * eps) recomputed from the returned alpha_t: the float
    round trip m -> m/eps -> (m/eps)*eps can land below m and miss the
    K0-th component.
    """
    theta_half = np.asarray(theta, dtype=float) - eps * np.asarray(grad_cost, dtype=float)
    if not 0 <= k0 <= theta_half.size:
        raise ValueError(f"K0 must be in [0, {theta_half.size}], got {k0}")
    if k0 == 0:
        return theta_half, 0.0
    threshold = float(np.sort(np.abs(theta_half))[k0 - 1])
    return soft_threshold(theta_half, threshold), threshold / eps


def sgld_step(theta, grad_cost, grad_logprior, eps: float, beta: float, rng) -> np.ndarray:
    """Langevin update: gradient ascent plus N(0, 2*eps/beta) noise per component."""
    if not (math.isfinite(beta) and beta > 0):
        raise ValueError(f"sgld requires finite beta > 0, got {beta}")
    theta = np.asarray(theta, dtype=float)
    drift = ga_step(theta, grad_cost, grad_logprior, eps, beta)
    noise = rng.standard_normal(theta.size)
    return drift + math.sqrt(2.0 * eps / beta) * noise


# -- training loop -----------------------------------------------------------------

@dataclass
class TrainConfig:
    """Which algorithm to run and with what knobs.

    k0 applies to pga only. beta is the cost scaling for ga/sgld; sgld with
    beta = inf degrades to ga (the noise scale is zero in that limit).
    theta history is spilled to a trace CSV instead of kept in memory when
    (iterations + 1) * K exceeds spill_cap and spill_dir is set.
    """

    algorithm: str
    iterations: int
    schedule: StepSchedule | ConstantSchedule = StepSchedule(15.0, 10.0)
    beta: float = math.inf
    k0: int = 0
    seed: int = 0
    prior: Prior = field(default_factory=UniformPrior)
    spill_dir: str | None = None
    spill_cap: int = 50_000_000

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.k0 < 0:
            raise ValueError(f"K0 must be >= 0, got {self.k0}")
        if self.algorithm == "sgld" and not (self.beta > 0):
            raise ValueError(f"sgld requires beta > 0, got {self.beta}")


@dataclass
class TrainingTrace:
    """Per-iteration record of a training run.

    Row 0 is the initial point; rows 1..T are iterations. costs hold the
    exact cost at each theta regardless of the evaluator's mode. alphas and
    zero_masks are populated for pga. thetas is None when the history was
    spilled to theta_path.
    """

    thetas: np.ndarray | None
    costs: np.ndarray
    epsilons: np.ndarray
    alphas: np.ndarray
    zero_masks: np.ndarray | None
    tie_iterations: list[int]
    config: TrainConfig
    wall_time: float
    theta_path: str | None = None

    @property
    def iterations(self) -> int:
        return self.costs.size - 1

    def theta_history(self) -> np.ndarray:
        if self.thetas is not None:
            return self.thetas
        return read_trace_csv(self.theta_path)["thetas"]

    def final_theta(self) -> np.ndarray:
        return self.theta_history()[-1]


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _trace_header(n_params: int) -> str:
    return "iter,cost,epsilon,alpha," + ",".join(f"theta_{k}" for k in range(n_params))


def _trace_row(t: int, cost: float, eps: float, alpha: float, theta: np.ndarray) -> str:
    head = f"{t},{_fmt(cost)},{_fmt(eps)},{_fmt(alpha)}"
    return head + "," + ",".join(_fmt(v) for v in theta)


def trace_to_csv(trace: TrainingTrace, path) -> None:
    """Write the trace table; floats carry 17 significant digits."""
    thetas = trace.theta_history()
    with open(path, "w", newline="\n") as fh:
        fh.write(_trace_header(thetas.shape[1]) + "\n")
        for t in range(trace.costs.size):
            fh.write(
                _trace_row(t, trace.costs[t], trace.epsilons[t], trace.alphas[t], thetas[t])
                + "\n"
            )


def read_trace_csv(path) -> dict:
    """Parse a trace CSV back into arrays."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2:
        raise ValueError(f"{path}: trace has no rows")
    rows = [line.split(",") for line in lines[1:]]
    data = np.array([[float(v) for v in row] for row in rows])
    return {
        "iters": data[:, 0].astype(int),
        "costs": data[:, 1],
        "epsilons": data[:, 2],
        "alphas": data[:, 3],
        "thetas": data[:, 4:],
    }


def run_training(evaluator, config: TrainConfig, theta0) -> TrainingTrace:
    """Iterate the configured step `iterations` times from theta0.

    The evaluator must provide n_params, gradient(theta) and
    cost_exact(theta); the recorded cost is always the exact one. Errors
    from components are re-raised with the iteration index attached.
    """
    theta = np.array(theta0, dtype=float)
    n_params = evaluator.n_params
    if theta.shape != (n_params,):
        raise ValueError(f"theta0 must have {n_params} entries, got shape {theta.shape}")
    if config.algorithm == "pga" and config.k0 > n_params:
        raise ValueError(f"K0 = {config.k0} exceeds K = {n_params}")

    total = config.iterations + 1
    spill = (
        config.spill_dir is not None and total * max(n_params, 1) > config.spill_cap
    )
    sink = None
    theta_path = None
    if spill:
        theta_path = str(Path(config.spill_dir) / "trace_spill.csv")
        sink = open(theta_path, "w", newline="\n")
        sink.write(_trace_header(n_params) + "\n")
    thetas = None if spill else np.empty((total, n_params))
    costs = np.empty(total)
    epsilons = np.full(total, np.nan)
    alphas = np.full(total, np.nan)
    masks = np.zeros((total, n_params), dtype=bool) if config.algorithm == "pga" else None
    ties: list[int] = []
    run_ga = config.algorithm == "ga" or (
        config.algorithm == "sgld" and math.isinf(config.beta)
    )

    start = time.perf_counter()

    def record(t: int, cost: float) -> None:
        costs[t] = cost
        if masks is not None:
            masks[t] = theta == 0.0
        if thetas is not None:
            thetas[t] = theta
        else:
            sink.write(_trace_row(t, cost, epsilons[t], alphas[t], theta) + "\n")

    record(0, evaluator.cost_exact(theta))
    for t in range(1, total):
        try:
            eps = stepsize(t, config.schedule)
            epsilons[t] = eps
            grad = evaluator.gradient(theta)
            if run_ga:
                logp = (
                    np.zeros(n_params)
                    if math.isinf(config.beta)
                    else log_prior_gradient(config.prior, theta)
                )
                theta = ga_step(theta, grad, logp, eps, config.beta)
            elif config.algorithm == "pga":
                theta, alpha = pga_step(theta, grad, eps, config.k0)
                alphas[t] = alpha
                if int(np.count_nonzero(theta == 0.0)) != config.k0:
                    ties.append(t)
            else:
                logp = log_prior_gradient(config.prior, theta)
                rng = iteration_rng(config.seed, t)
                theta = sgld_step(theta, grad, logp, eps, config.beta, rng)
            record(t, evaluator.cost_exact(theta))
        except (ValueError, FloatingPointError) as exc:
            if sink is not None:
                sink.close()
            raise type(exc)(f"training iteration {t}: {exc}") from exc
    if sink is not None:
        sink.close()

    return TrainingTrace(
        thetas=thetas,
        costs=costs,
        epsilons=epsilons,
        alphas=alphas,
        zero_masks=masks,
        tie_iterations=ties,
        config=config,
        wall_time=time.perf_counter() - start,
        theta_path=theta_path,
    )


def ergodic_average(trace: TrainingTrace, burn_in: int, f: Callable):
    """Mean of f(theta_t) over iteration records t = burn_in+1 .. T.

    Returns a float for scalar f, an array for vector f (e.g. Born
    distributions, whose average is again a valid distribution).
    """
    total_iters = trace.iterations
    if not 0 <= burn_in < total_iters:
        raise ValueError(f"burn_in must be in [0, {total_iters}), got {burn_in}")
    thetas = trace.theta_history()
    values = [np.asarray(f(thetas[t]), dtype=float) for t in range(burn_in + 1, total_iters + 1)]
    out = np.mean(np.stack(values, axis=0), axis=0)
    return float(out) if out.ndim == 0 else out
