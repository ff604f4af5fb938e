import numpy as np
import pytest

from pqcbayes.ansatz import CircuitIR, build_ansatz
from pqcbayes.costs import EmpiricalDist, KernelSpec, WeightedGraph
from pqcbayes.gradients import (
    CostEvaluator,
    finite_difference_gradient,
    parameter_shift_gradient,
)
from pqcbayes.sim import GateOp, born_probabilities, run_circuit

SINGLE_EDGE = WeightedGraph(2, ((0, 1, 1.0),))


def make_mmd_evaluator(n_qubits=3, depth=1, sigma=1.5, seed=0, **kwargs):
    circuit = build_ansatz(n_qubits, depth)
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(2**n_qubits))
    data = EmpiricalDist(probs, 100)
    return CostEvaluator.mmd(circuit, data, KernelSpec(sigma), **kwargs)


class LinearEvaluator:
    """Synthetic exact-mode evaluator with cost 3 * theta_1."""

    mode = "exact"
    n_params = 3

    def cost(self, theta):
        return 3.0 * float(theta[1])


class TestCostExact:
    def test_maxcut_uniform_born(self):
        # theta = 0 gives the uniform distribution; triangle cuts average to 3
        graph = WeightedGraph(3, ((0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)))
        circuit = build_ansatz(2, 1)
        ev = CostEvaluator.maxcut(circuit, graph)
        assert ev.cost(np.zeros(circuit.n_params)) == pytest.approx(-3.0, abs=1e-12)

    def test_tfim_zero_theta_matches_dense_oracle(self):
        from pqcbayes.costs import tfim_dense_hamiltonian

        circuit = build_ansatz(3, 1)
        ev = CostEvaluator.tfim(circuit, 1.0)
        theta = np.zeros(circuit.n_params)
        state = run_circuit(circuit, theta)
        ham = tfim_dense_hamiltonian(3, 1.0)
        expected = float(np.real(np.vdot(state.amplitudes, ham @ state.amplitudes)))
        assert ev.cost(theta) == pytest.approx(expected, abs=1e-12)
        # the entangler phases null every single-site <X> here
        assert ev.cost(theta) == pytest.approx(0.0, abs=1e-12)

    def test_mmd_matches_cost_fn(self):
        from pqcbayes.costs import mmd_cost

        ev = make_mmd_evaluator()
        theta = np.random.default_rng(1).uniform(-1, 1, ev.n_params)
        model = born_probabilities(run_circuit(ev.circuit, theta))
        assert ev.cost(theta) == pytest.approx(mmd_cost(model, ev.data, ev.kernel), abs=1e-14)

    def test_dimension_checks(self):
        circuit = build_ansatz(2, 1)
        with pytest.raises(ValueError):
            CostEvaluator.maxcut(circuit, SINGLE_EDGE)  # 2-node graph needs 1 qubit
        with pytest.raises(ValueError):
            CostEvaluator.tfim(build_ansatz(1, 1), 0.5)
        ev = CostEvaluator.tfim(circuit, 0.5)
        with pytest.raises(ValueError):
            ev.cost(np.zeros(circuit.n_params + 2))

    def test_exact_mode_bit_for_bit_deterministic(self):
        ev = make_mmd_evaluator()
        theta = np.random.default_rng(3).uniform(-1, 1, ev.n_params)
        assert ev.cost(theta) == ev.cost(theta)


class TestParameterShift:
    def test_single_rx_against_analytic_derivative(self):
        # C(t) = -P(outcome 1) = -(1 - cos t)/2, so dC/dt = -sin(t)/2
        circuit = CircuitIR(1, (GateOp.rx(0, slot=0),), 1)
        ev = CostEvaluator.maxcut(circuit, SINGLE_EDGE)
        for t in (np.pi / 2, 0.3, -1.2):
            grad = parameter_shift_gradient(ev, [t])
            assert grad[0] == pytest.approx(-np.sin(t) / 2, abs=1e-12)

    def test_stationary_point_by_symmetry(self):
        circuit = CircuitIR(1, (GateOp.rx(0, slot=0),), 1)
        ev = CostEvaluator.maxcut(circuit, SINGLE_EDGE)
        assert parameter_shift_gradient(ev, [0.0])[0] == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("kind", ["maxcut", "tfim", "mmd"])
    def test_matches_finite_differences(self, kind):
        rng = np.random.default_rng(7)
        circuit = build_ansatz(4, 2)
        if kind == "maxcut":
            edges = tuple(
                (i, j, rng.uniform()) for i in range(5) for j in range(i + 1, 5)
            )
            ev = CostEvaluator.maxcut(circuit, WeightedGraph(5, edges))
        elif kind == "tfim":
            ev = CostEvaluator.tfim(circuit, 0.8)
        else:
            probs = rng.dirichlet(np.ones(16))
            ev = CostEvaluator.mmd(circuit, EmpiricalDist(probs, 50), KernelSpec(2.0))
        theta = rng.uniform(-np.pi, np.pi, circuit.n_params)
        shift = parameter_shift_gradient(ev, theta)
        diff = finite_difference_gradient(ev, theta, h=1e-5)
        assert np.max(np.abs(shift - diff)) < 1e-6

    def test_mmd_gradient_vanishes_at_data_match(self):
        circuit = build_ansatz(3, 1)
        rng = np.random.default_rng(11)
        theta = rng.uniform(-np.pi, np.pi, circuit.n_params)
        model = born_probabilities(run_circuit(circuit, theta))
        data = EmpiricalDist(model, 485)
        ev = CostEvaluator.mmd(circuit, data, KernelSpec(1.0))
        grad = parameter_shift_gradient(ev, theta)
        assert np.linalg.norm(grad) < 1e-8

    def test_eval_count_is_2k_for_linear_costs(self):
        circuit = build_ansatz(3, 1)
        k = circuit.n_params
        for ev in (
            CostEvaluator.tfim(circuit, 0.5),
            CostEvaluator.maxcut(circuit, _random_graph(4, seed=0)),
        ):
            theta = np.zeros(k)
            before = ev.n_circuit_evals
            parameter_shift_gradient(ev, theta)
            assert ev.n_circuit_evals - before == 2 * k

    def test_mmd_eval_count_is_2k_plus_1(self):
        ev = make_mmd_evaluator()
        before = ev.n_circuit_evals
        parameter_shift_gradient(ev, np.zeros(ev.n_params))
        assert ev.n_circuit_evals - before == 2 * ev.n_params + 1

    def test_shot_mode_mmd_gradient_unsupported(self):
        ev = make_mmd_evaluator(mode="shots", n_shots=100, seed=1)
        with pytest.raises(NotImplementedError):
            parameter_shift_gradient(ev, np.zeros(ev.n_params))


class TestFiniteDifference:
    def test_linear_cost_is_exact(self):
        grad = finite_difference_gradient(LinearEvaluator(), np.array([0.2, -0.4, 1.0]))
        assert np.allclose(grad, [0.0, 3.0, 0.0], atol=1e-9)

    def test_truncation_error_shrinks_quadratically(self):
        circuit = build_ansatz(2, 1)
        ev = CostEvaluator.tfim(circuit, 0.6)
        theta = np.random.default_rng(13).uniform(-1, 1, circuit.n_params)
        exact = parameter_shift_gradient(ev, theta)
        err_h = np.max(np.abs(finite_difference_gradient(ev, theta, h=1e-3) - exact))
        err_half = np.max(np.abs(finite_difference_gradient(ev, theta, h=5e-4) - exact))
        assert err_h / err_half == pytest.approx(4.0, rel=0.35)

    def test_rejects_shots_mode(self):
        circuit = build_ansatz(2, 1)
        ev = CostEvaluator.tfim(circuit, 0.5, mode="shots", n_shots=100, seed=0)
        with pytest.raises(ValueError):
            finite_difference_gradient(ev, np.zeros(circuit.n_params))

    def test_rejects_bad_h(self):
        with pytest.raises(ValueError):
            finite_difference_gradient(LinearEvaluator(), np.zeros(3), h=0.0)


def _random_graph(n_nodes, seed):
    rng = np.random.default_rng(seed)
    edges = tuple(
        (i, j, rng.uniform()) for i in range(n_nodes) for j in range(i + 1, n_nodes)
    )
    return WeightedGraph(n_nodes, edges)


class TestShotMode:
    def test_maxcut_estimate_within_three_standard_errors(self):
        circuit = build_ansatz(3, 1)
        graph = _random_graph(4, seed=5)
        exact_ev = CostEvaluator.maxcut(circuit, graph)
        theta = np.random.default_rng(5).uniform(-np.pi, np.pi, circuit.n_params)
        exact = exact_ev.cost(theta)
        n_shots = 10**6
        shot_ev = CostEvaluator.maxcut(circuit, graph, mode="shots", n_shots=n_shots, seed=9)
        estimate = shot_ev.cost(theta)
        probs = born_probabilities(run_circuit(circuit, theta))
        from pqcbayes.costs import cut_value_table

        table = cut_value_table(graph)
        variance = float(probs @ table**2 - (probs @ table) ** 2)
        assert abs(estimate - exact) < 3 * np.sqrt(variance / n_shots)

    def test_same_seed_reproducible_fresh_evaluator(self):
        circuit = build_ansatz(3, 1)
        theta = np.full(circuit.n_params, 0.3)

        def run():
            ev = CostEvaluator.tfim(circuit, 0.7, mode="shots", n_shots=500, seed=123)
            return ev.cost(theta), parameter_shift_gradient(ev, theta)

        (c1, g1), (c2, g2) = run(), run()
        assert c1 == c2
        assert np.array_equal(g1, g2)

    def test_repeated_calls_use_fresh_randomness(self):
        circuit = build_ansatz(3, 1)
        ev = CostEvaluator.tfim(circuit, 0.7, mode="shots", n_shots=200, seed=3)
        theta = np.full(circuit.n_params, 0.3)
        assert ev.cost(theta) != ev.cost(theta)

    def test_gradient_unbiased_for_maxcut(self):
        # mean of 200 independent shot-gradient estimates vs exact, per component
        circuit = build_ansatz(3, 1)
        graph = _random_graph(4, seed=2)
        exact = parameter_shift_gradient(
            CostEvaluator.maxcut(circuit, graph), np.full(circuit.n_params, 0.4)
        )
        theta = np.full(circuit.n_params, 0.4)
        ev = CostEvaluator.maxcut(circuit, graph, mode="shots", n_shots=1000, seed=77)
        estimates = np.array([parameter_shift_gradient(ev, theta) for _ in range(200)])
        mean = estimates.mean(axis=0)
        stderr = estimates.std(axis=0, ddof=1) / np.sqrt(estimates.shape[0])
        assert np.all(np.abs(mean - exact) < 4 * stderr + 1e-12)

    def test_tfim_shot_estimate_converges(self):
        circuit = build_ansatz(3, 1)
        ev_exact = CostEvaluator.tfim(circuit, 0.9)
        theta = np.random.default_rng(8).uniform(-1, 1, circuit.n_params)
        exact = ev_exact.cost(theta)
        ev = CostEvaluator.tfim(circuit, 0.9, mode="shots", n_shots=200_000, seed=4)
        assert ev.cost(theta) == pytest.approx(exact, abs=0.05)

    def test_mmd_shot_estimate_unbiased(self):
        ev_exact = make_mmd_evaluator(seed=21)
        theta = np.random.default_rng(2).uniform(-1, 1, ev_exact.n_params)
        exact = ev_exact.cost(theta)
        shot_ev = CostEvaluator.mmd(
            ev_exact.circuit, ev_exact.data, ev_exact.kernel, mode="shots", n_shots=2000, seed=6
        )
        estimates = [shot_ev.cost(theta) for _ in range(100)]
        stderr = np.std(estimates, ddof=1) / 10.0
        assert abs(np.mean(estimates) - exact) < 4 * stderr + 1e-12
