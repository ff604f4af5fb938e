"""Cost evaluation and gradients for parameterised circuits.

A CostEvaluator pairs a circuit with one of the three costs and an
evaluation mode (exact statevector, or finite shots). Gradients use the
shifted-circuit rule [dC]_k = (C(theta + pi/2 e_k) - C(theta - pi/2 e_k))/2,
valid because Rx/Rz generators have eigenvalues +-1. The MMD cost is
quadratic in the Born distribution, so its exact gradient is assembled from
shifted probability vectors via the chain rule instead of shifted scalar
costs. A central-difference oracle is provided for verification.
"""

from __future__ import annotations

import numpy as np

from .ansatz import CircuitIR
from .costs import (
    EmpiricalDist,
    KernelSpec,
    WeightedGraph,
    cut_value_table,
    kernel_matrix,
)
from .seeds import derive_seed
from .sim import (
    _apply_h,
    _site_sign_sum,
    _zz_chain_diagonal,
    born_probabilities,
    counts_to_probs,
    expectation_tfim,
    expectation_tfim_batch,
    run_circuit,
    run_circuit_batch,
    sample_counts,
)

SHIFT = np.pi / 2.0

# seed-path namespaces, so cost calls and gradient calls never collide
_PATH_COST = 0
_PATH_GRAD = 1


class CostEvaluator:
    """One circuit + one cost + one evaluation mode.

    mode "exact" computes deterministic costs from the full statevector;
    mode "shots" draws n_shots samples per measurement setting (seeded,
    reproducible). `n_circuit_evals` counts every circuit execution,
    including batched rows.
    """

    def __init__(
        self,
        circuit: CircuitIR,
        kind: str,
        *,
        graph: WeightedGraph | None = None,
        g: float | None = None,
        data: EmpiricalDist | None = None,
        kernel: KernelSpec | None = None,
        mode: str = "exact",
        n_shots: int | None = None,
        seed: int = 0,
    ):
        if kind not in ("maxcut", "tfim", "mmd"):
            raise ValueError(f"unknown cost kind {kind!r}")
        if mode not in ("exact", "shots"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "shots":
            if n_shots is None or n_shots < 1:
                raise ValueError("shots mode requires n_shots >= 1")
        self.circuit = circuit
        self.kind = kind
        self.mode = mode
        self.n_shots = n_shots
        self.seed = seed
        self.n_circuit_evals = 0
        self._cost_calls = 0
        self._grad_calls = 0

        n = circuit.n_qubits
        if kind == "maxcut":
            if graph is None:
                raise ValueError("maxcut cost requires a graph")
            if graph.n_nodes != n + 1:
                raise ValueError(
                    f"graph has {graph.n_nodes} nodes; a {n}-qubit circuit labels {n + 1}"
                )
            self.graph = graph
            self._cut_table = cut_value_table(graph)
        elif kind == "tfim":
            if g is None:
                raise ValueError("tfim cost requires a field strength g")
            if n < 2:
                raise ValueError("tfim cost requires at least 2 qubits")
            self.g = float(g)
        else:
            if data is None or kernel is None:
                raise ValueError("mmd cost requires data and a kernel")
            if data.n_outcomes != 1 << n:
                raise ValueError(
                    f"data has {data.n_outcomes} outcomes, circuit produces {1 << n}"
                )
            self.data = data
            self.kernel = kernel
            self._gram = kernel_matrix(data.n_outcomes, kernel.bandwidth)
            self._nu = data.probs
            self._data_term = float(self._nu @ (self._gram @ self._nu))

    @classmethod
    def maxcut(cls, circuit: CircuitIR, graph: WeightedGraph, **kwargs) -> "CostEvaluator":
        return cls(circuit, "maxcut", graph=graph, **kwargs)

    @classmethod
    def tfim(cls, circuit: CircuitIR, g: float, **kwargs) -> "CostEvaluator":
        return cls(circuit, "tfim", g=g, **kwargs)

    @classmethod
    def mmd(
        cls, circuit: CircuitIR, data: EmpiricalDist, kernel: KernelSpec, **kwargs
    ) -> "CostEvaluator":
        return cls(circuit, "mmd", data=data, kernel=kernel, **kwargs)

    @property
    def n_params(self) -> int:
        return self.circuit.n_params

    # -- circuit execution --

    def _state(self, theta):
        self.n_circuit_evals += 1
        return run_circuit(self.circuit, theta)

    def born(self, theta) -> np.ndarray:
        """Exact Born distribution at theta."""
        return born_probabilities(self._state(theta))

    def _amps_batch(self, thetas: np.ndarray) -> np.ndarray:
        self.n_circuit_evals += thetas.shape[0]
        return run_circuit_batch(self.circuit, thetas)

    # -- cost --

    def cost_exact(self, theta) -> float:
        """Deterministic cost from the full statevector, in any mode."""
        state = self._state(theta)
        if self.kind == "maxcut":
            return -float(born_probabilities(state) @ self._cut_table)
        if self.kind == "tfim":
            return expectation_tfim(state, self.g)
        diff = born_probabilities(state) - self._nu
        return float(diff @ (self._gram @ diff))

    def _cost_exact_batch(self, thetas: np.ndarray) -> np.ndarray:
        amps = self._amps_batch(thetas)
        if self.kind == "maxcut":
            probs = amps.real * amps.real + amps.imag * amps.imag
            return -(probs @ self._cut_table)
        if self.kind == "tfim":
            return expectation_tfim_batch(amps, self.circuit.n_qubits, self.g)
        probs = amps.real * amps.real + amps.imag * amps.imag
        diff = probs - self._nu
        return np.einsum("bi,ij,bj->b", diff, self._gram, diff)

    def cost(self, theta) -> float:
        """Cost at theta: exact value, or an unbiased shot-based estimate."""
        if self.mode == "exact":
            return self.cost_exact(theta)
        self._cost_calls += 1
        return self._cost_shots(theta, (_PATH_COST, self._cost_calls))

    def _sample(self, probs: np.ndarray, path: tuple[int, ...]) -> dict[int, int]:
        return sample_counts(probs, self.n_shots, derive_seed(self.seed, *path))

    def _cost_shots(self, theta, path: tuple[int, ...]) -> float:
        state = self._state(theta)
        probs = born_probabilities(state)
        n = self.circuit.n_qubits
        if self.kind == "maxcut":
            counts = self._sample(probs, path + (0,))
            return -sum(c * self._cut_table[z] for z, c in counts.items()) / self.n_shots
        if self.kind == "tfim":
            # setting 0: computational basis for the ZZ chain
            zz_diag = _zz_chain_diagonal(n)
            counts = self._sample(probs, path + (0,))
            zz = sum(c * zz_diag[z] for z, c in counts.items()) / self.n_shots
            # setting 1: Hadamard on every qubit maps each X_i to Z_i
            rotated = state.copy()
            psi = rotated.amplitudes.reshape((2,) * n)
            for q in range(n):
                _apply_h(psi, q)
            x_counts = self._sample(born_probabilities(rotated), path + (1,))
            sign_sum = _site_sign_sum(n)
            x = sum(c * sign_sum[z] for z, c in x_counts.items()) / self.n_shots
            return -zz - self.g * x
        # mmd: U-statistic for the model term, all pairs against the dataset
        if self.n_shots < 2:
            raise ValueError("mmd shot estimate requires n_shots >= 2")
        counts = self._sample(probs, path + (0,))
        c = counts_to_probs(counts, probs.size) * self.n_shots
        m = float(self.n_shots)
        model_term = (c @ (self._gram @ c) - m) / (m * (m - 1.0))
        cross_term = float(c @ (self._gram @ self._nu)) / m
        return model_term - 2.0 * cross_term + self._data_term

    def gradient(self, theta) -> np.ndarray:
        return parameter_shift_gradient(self, theta)


def _shift_rows(theta: np.ndarray) -> np.ndarray:
    """Rows theta + pi/2 e_k for all k, then theta - pi/2 e_k for all k."""
    k = theta.size
    rows = np.tile(theta, (2 * k, 1))
    rows[:k] += SHIFT * np.eye(k)
    rows[k:] -= SHIFT * np.eye(k)
    return rows


def parameter_shift_gradient(evaluator: CostEvaluator, theta) -> np.ndarray:
    """Exact cost gradient from shifted circuits.

    MaxCut and TFIM are linear in the Born distribution / state expectation,
    so the scalar shift formula applies (2K evaluations). MMD is quadratic
    in the distribution: dC_k = 2 dp_k^T K (p - nu) with
    dp_k = (p(theta+) - p(theta-))/2, needing the unshifted p as well
    (2K + 1 evaluations). Shot mode derives one child seed per shifted
    evaluation from the evaluator seed and the component index.
    """
    theta = np.asarray(theta, dtype=float)
    k = evaluator.n_params
    if theta.shape != (k,):
        raise ValueError(f"expected {k} parameters, got shape {theta.shape}")
    if evaluator.kind == "mmd":
        if evaluator.mode != "exact":
            raise NotImplementedError("shot-based mmd gradients are not supported")
        rows = np.vstack([theta[None, :], _shift_rows(theta)])
        amps = evaluator._amps_batch(rows)
        probs = amps.real * amps.real + amps.imag * amps.imag
        residual = evaluator._gram @ (probs[0] - evaluator._nu)
        dp = 0.5 * (probs[1 : k + 1] - probs[k + 1 :])
        return 2.0 * (dp @ residual)
    if evaluator.mode == "exact":
        costs = evaluator._cost_exact_batch(_shift_rows(theta))
        return 0.5 * (costs[:k] - costs[k:])
    evaluator._grad_calls += 1
    call = evaluator._grad_calls
    grad = np.empty(k)
    for i in range(k):
        shifted = theta.copy()
        shifted[i] += SHIFT
        plus = evaluator._cost_shots(shifted, (_PATH_GRAD, call, i, 0))
        shifted[i] -= 2.0 * SHIFT
        minus = evaluator._cost_shots(shifted, (_PATH_GRAD, call, i, 1))
        grad[i] = 0.5 * (plus - minus)
    return grad


def finite_difference_gradient(evaluator, theta, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient oracle, (C(theta+h e_k) - C(theta-h e_k)) / 2h.

    Exact mode only: shot noise of size O(1/sqrt(n_shots)) would swamp O(h)
    differences.
    """
    if getattr(evaluator, "mode", "exact") != "exact":
        raise ValueError("finite differences require an exact-mode evaluator")
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    theta = np.asarray(theta, dtype=float)
    grad = np.empty(theta.size)
    for i in range(theta.size):
        shifted = theta.copy()
        shifted[i] += h
        plus = evaluator.cost(shifted)
        shifted[i] -= 2.0 * h
        minus = evaluator.cost(shifted)
        grad[i] = (plus - minus) / (2.0 * h)
    return grad
