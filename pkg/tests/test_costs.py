import itertools

import numpy as np
import pytest

from pqcbayes.ansatz import CircuitIR
from pqcbayes.costs import (
    EmpiricalDist,
    KernelSpec,
    WeightedGraph,
    cut_value,
    cut_value_table,
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
    tfim_dense_hamiltonian,
    tfim_ground_energy,
    total_variation,
)
from pqcbayes.sim import GateOp, born_probabilities, init_zero_state, run_circuit

from oracles import random_bound_gates

TRIANGLE = WeightedGraph(3, ((0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)))


def brute_force_cut(graph, z):
    labels = [0] + [int(c) for c in z]
    return sum(w for i, j, w in graph.edges if labels[i] != labels[j])


class TestWeightedGraph:
    def test_normalizes_edge_order(self):
        graph = WeightedGraph(3, ((2, 0, 0.5),))
        assert graph.edges == ((0, 2, 0.5),)

    def test_rejects_self_loops_and_duplicates(self):
        with pytest.raises(ValueError):
            WeightedGraph(3, ((1, 1, 0.5),))
        with pytest.raises(ValueError):
            WeightedGraph(3, ((0, 1, 0.5), (1, 0, 0.2)))

    def test_rejects_bad_range(self):
        with pytest.raises(ValueError):
            WeightedGraph(2, ((0, 2, 1.0),))


class TestCutValue:
    def test_all_same_label(self):
        assert cut_value(TRIANGLE, "00") == 0.0

    def test_examples_match_enumeration(self):
        assert cut_value(TRIANGLE, "01") == 5.0
        assert cut_value(TRIANGLE, "10") == 4.0
        for z in ("00", "01", "10", "11"):
            assert cut_value(TRIANGLE, z) == brute_force_cut(TRIANGLE, z)

    def test_table_matches_per_string_values(self):
        rng = np.random.default_rng(4)
        edges = [(i, j, rng.uniform()) for i, j in itertools.combinations(range(5), 2)]
        graph = WeightedGraph(5, tuple(edges))
        table = cut_value_table(graph)
        for z in range(16):
            assert table[z] == pytest.approx(cut_value(graph, encode_int(z, 4)))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            cut_value(TRIANGLE, "0")


class TestMaxcutCost:
    def test_uniform_distribution(self):
        assert maxcut_cost(TRIANGLE, np.full(4, 0.25)) == pytest.approx(-3.0)

    def test_point_mass_on_best(self):
        assert maxcut_cost(TRIANGLE, [0, 1.0, 0, 0]) == pytest.approx(-5.0)

    def test_zero_weights(self):
        graph = WeightedGraph(3, ((0, 1, 0.0), (1, 2, 0.0)))
        assert maxcut_cost(graph, np.full(4, 0.25)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            maxcut_cost(TRIANGLE, np.full(8, 0.125))


class TestMaxcutOptimum:
    def test_triangle(self):
        assert maxcut_optimum(TRIANGLE) == ("01", 5.0)

    def test_single_edge(self):
        graph = WeightedGraph(2, ((0, 1, 0.7),))
        assert maxcut_optimum(graph) == ("1", 0.7)

    def test_tie_break_smallest_index(self):
        graph = WeightedGraph(3, ((0, 1, 0.0), (0, 2, 0.0)))
        assert maxcut_optimum(graph) == ("00", 0.0)

    def test_size_cap(self):
        graph = WeightedGraph(21, ((0, 1, 1.0),))
        with pytest.raises(ValueError):
            maxcut_optimum(graph)

    def test_cost_bounded_by_optimum(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            edges = [(i, j, rng.uniform()) for i, j in itertools.combinations(range(6), 2)]
            graph = WeightedGraph(6, tuple(edges))
            _, best = maxcut_optimum(graph)
            probs = rng.dirichlet(np.ones(32))
            assert maxcut_cost(graph, probs) >= -best - 1e-12


class TestTfim:
    def test_classical_limit_states(self):
        assert tfim_cost(init_zero_state(3), 0.0) == pytest.approx(-2.0)
        ones = init_zero_state(2)
        ones.amplitudes[:] = [0, 0, 0, 1]
        assert tfim_cost(ones, 0.0) == pytest.approx(-1.0)

    def test_plus_states_at_unit_field(self):
        circuit = CircuitIR(3, tuple(GateOp.h(q) for q in range(3)), 0)
        assert tfim_cost(run_circuit(circuit), 1.0) == pytest.approx(-3.0, abs=1e-12)

    def test_ground_energy_classical_limit(self):
        assert tfim_ground_energy(3, 0.0) == pytest.approx(-2.0)

    def test_two_qubit_closed_form(self):
        rng = np.random.default_rng(19)
        for g in rng.uniform(-3, 3, 20):
            assert tfim_ground_energy(2, g) == pytest.approx(
                -np.sqrt(4 * g * g + 1), abs=1e-9
            )

    def test_two_qubit_special_case(self):
        assert tfim_ground_energy(2, 1.0) == pytest.approx(-np.sqrt(5), abs=1e-9)

    def test_size_cap(self):
        with pytest.raises(ValueError):
            tfim_ground_energy(13, 0.5)
        with pytest.raises(ValueError):
            tfim_dense_hamiltonian(1, 0.5)

    def test_variational_bound(self):
        rng = np.random.default_rng(23)
        for n in range(2, 7):
            g = rng.uniform(-2, 2)
            floor = tfim_ground_energy(n, g)
            for _ in range(3):
                circuit = CircuitIR(n, tuple(random_bound_gates(rng, n, 30)), 0)
                state = run_circuit(circuit)
                assert tfim_cost(state, g) >= floor - 1e-9


class TestGaussianKernel:
    def test_unit_diagonal(self):
        assert gaussian_kernel(5, 5, 0.3) == 1.0

    def test_known_value(self):
        assert gaussian_kernel(0, 1, 1.0) == pytest.approx(np.exp(-0.5), abs=1e-12)

    def test_symmetry(self):
        assert gaussian_kernel(2, 9, 1.7) == gaussian_kernel(9, 2, 1.7)

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            gaussian_kernel(0, 1, 0.0)
        with pytest.raises(ValueError):
            KernelSpec(-1.0)


class TestMedianHeuristic:
    def test_three_points(self):
        assert median_heuristic([1, 2, 4]) == 2.0  # gaps {1, 3, 2}

    def test_single_pair(self):
        assert median_heuristic([0, 2]) == 2.0

    def test_all_equal_is_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            median_heuristic([5, 5, 5])

    def test_lower_median_for_even_pair_count(self):
        # pairs of [0, 1, 3, 10]: {1, 3, 10, 2, 9, 7} sorted {1,2,3,7,9,10}
        assert median_heuristic([0, 1, 3, 10]) == 3.0


class TestMmdCost:
    def test_identical_distributions(self):
        probs = np.array([0.25, 0.25, 0.5, 0.0])
        data = EmpiricalDist(probs, 100)
        assert abs(mmd_cost(probs, data, KernelSpec(1.0))) < 1e-12

    def test_point_masses_one_apart(self):
        model = np.array([1.0, 0.0])
        data = EmpiricalDist(np.array([0.0, 1.0]), 10)
        expected = 2.0 - 2.0 * np.exp(-0.5)
        assert mmd_cost(model, data, KernelSpec(1.0)) == pytest.approx(expected, abs=1e-12)

    def test_coincident_point_masses(self):
        model = np.array([1.0, 0.0])
        data = EmpiricalDist(np.array([1.0, 0.0]), 10)
        assert mmd_cost(model, data, KernelSpec(1.0)) == 0.0

    def test_nonnegative_and_separating(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            size = 2 ** int(rng.integers(1, 7))
            p = rng.dirichlet(np.ones(size))
            q = rng.dirichlet(np.ones(size))
            value = mmd_cost(p, EmpiricalDist(q, 50), KernelSpec(2.0))
            assert value >= -1e-12
            if np.max(np.abs(p - q)) > 1e-6:
                assert value > 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mmd_cost(np.array([1.0, 0.0]), EmpiricalDist(np.array([1.0, 0, 0, 0]), 5), KernelSpec(1.0))


class TestTotalVariation:
    def test_identical(self):
        assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0

    def test_disjoint(self):
        assert total_variation([1, 0], [0, 1]) == 1.0

    def test_arithmetic(self):
        assert total_variation([0.75, 0.25], [0.5, 0.5]) == pytest.approx(0.25)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            total_variation([1.0], [0.5, 0.5])

    def test_metric_properties(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            p, q, r = (rng.dirichlet(np.ones(8)) for _ in range(3))
            assert total_variation(p, q) == pytest.approx(total_variation(q, p))
            assert total_variation(p, p) == 0.0
            assert total_variation(p, r) <= total_variation(p, q) + total_variation(q, r) + 1e-12
            assert 0.0 <= total_variation(p, q) <= 1.0


class TestEncodeDecode:
    def test_zero(self):
        assert encode_int(0, 8) == "00000000"

    def test_131(self):
        assert encode_int(131, 8) == "10000011"

    def test_roundtrip_all_bytes(self):
        for z in range(256):
            assert decode_int(encode_int(z, 8)) == z

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            encode_int(256, 8)
        with pytest.raises(ValueError):
            encode_int(-1, 8)
        with pytest.raises(ValueError):
            decode_int("01x")


class TestGraphFiles:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "graph.txt"
        save_graph(TRIANGLE, path)
        assert load_graph(path) == TRIANGLE

    def test_parse_error_names_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3\n0 1 x\n")
        with pytest.raises(ValueError, match="line 2"):
            load_graph(path)
