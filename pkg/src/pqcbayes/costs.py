"""Training costs and their exact oracles.

Three costs map a circuit's output to a real number: weighted max-cut score
(expected negative cut weight under the Born distribution), transverse-field
Ising energy, and maximum mean discrepancy against an integer dataset. Each
comes with an independent oracle (exhaustive cut search, dense
diagonalization, closed-form kernels) used to shift and validate training
results. Bitstrings are MSB-first, matching the simulator's index
convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sim import StateVector, _check_prob_dist, expectation_tfim

MAXCUT_ORACLE_MAX_NODES = 20
TFIM_ORACLE_MAX_QUBITS = 12


# -- bitstring <-> integer ----------------------------------------------------

def encode_int(z: int, n_bits: int) -> str:
    """MSB-first binary expansion of z as a string of n_bits characters."""
    if n_bits < 1:
        raise ValueError(f"n_bits must be >= 1, got {n_bits}")
    if not 0 <= z < (1 << n_bits):
        raise ValueError(f"{z} is out of range for {n_bits} bits")
    return format(z, f"0{n_bits}b")


def decode_int(bits: str) -> int:
    """Inverse of encode_int."""
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"not a bitstring: {bits!r}")
    return int(bits, 2)


# -- weighted max-cut ---------------------------------------------------------

@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph; edges are stored as (i, j, w) with i < j."""

    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError(f"need at least 2 nodes, got {self.n_nodes}")
        normalized = []
        seen = set()
        for i, j, w in self.edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not 0 <= i < self.n_nodes or not 0 <= j < self.n_nodes:
                raise ValueError(f"edge ({i}, {j}) out of range")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            if not math.isfinite(w):
                raise ValueError(f"non-finite weight on edge ({i}, {j})")
            normalized.append((i, j, float(w)))
        object.__setattr__(self, "edges", tuple(normalized))


def cut_value(graph: WeightedGraph, z: str) -> float:
    """Total weight of edges cut by the labelling `0` + z (node 0 is fixed to 0)."""
    if len(z) != graph.n_nodes - 1 or any(c not in "01" for c in z):
        raise ValueError(
            f"labelling must be a bitstring of length {graph.n_nodes - 1}, got {z!r}"
        )
    labels = "0" + z
    return float(sum(w for i, j, w in graph.edges if labels[i] != labels[j]))


def cut_value_table(graph: WeightedGraph) -> np.ndarray:
    """Cut values for every labelling, indexed by the integer value of z."""
    n_bits = graph.n_nodes - 1
    size = 1 << n_bits
    z = np.arange(size)
    cut = np.zeros(size)
    for i, j, w in graph.edges:
        # node m (m >= 1) is labelled by bit m-1 of z, MSB-first
        label_i = 0 if i == 0 else (z >> (n_bits - i)) & 1
        label_j = (z >> (n_bits - j)) & 1
        cut += w * (label_i != label_j)
    return cut


def maxcut_cost(graph: WeightedGraph, dist) -> float:
    """Expected negative cut value under an outcome distribution."""
    probs = _check_prob_dist(dist)
    if probs.size != 1 << (graph.n_nodes - 1):
        raise ValueError(
            f"distribution has {probs.size} outcomes, expected {1 << (graph.n_nodes - 1)}"
        )
    return -float(probs @ cut_value_table(graph))


def maxcut_optimum(graph: WeightedGraph) -> tuple[str, float]:
    """Exhaustive best cut; ties broken by the smallest labelling index."""
    if graph.n_nodes > MAXCUT_ORACLE_MAX_NODES:
        raise ValueError(
            f"exhaustive search capped at {MAXCUT_ORACLE_MAX_NODES} nodes, got {graph.n_nodes}"
        )
    table = cut_value_table(graph)
    best = int(np.argmax(table))
    return encode_int(best, graph.n_nodes - 1), float(table[best])


# -- transverse-field Ising model ----------------------------------------------

def tfim_cost(state: StateVector, g: float) -> float:
    """Energy of a state under the open-chain TFIM Hamiltonian."""
    return expectation_tfim(state, g)


def tfim_dense_hamiltonian(n_qubits: int, g: float) -> np.ndarray:
    """Explicit 2**n x 2**n matrix -sum Z_i Z_{i+1} - g sum X_i (test oracle)."""
    if n_qubits < 2:
        raise ValueError("need at least 2 qubits")
    if n_qubits > TFIM_ORACLE_MAX_QUBITS:
        raise ValueError(
            f"dense Hamiltonian capped at {TFIM_ORACLE_MAX_QUBITS} qubits, got {n_qubits}"
        )
    z = np.array([[1.0, 0.0], [0.0, -1.0]])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    eye = np.eye(2)

    def chain(op: np.ndarray, site: int, op2: np.ndarray | None = None, site2: int | None = None):
        acc = np.ones((1, 1))
        for q in range(n_qubits):
            factor = op if q == site else (op2 if q == site2 else eye)
            acc = np.kron(acc, factor)
        return acc

    dim = 1 << n_qubits
    ham = np.zeros((dim, dim))
    for i in range(n_qubits - 1):
        ham -= chain(z, i, z, i + 1)
    for i in range(n_qubits):
        ham -= g * chain(x, i)
    return ham


def tfim_ground_energy(n_qubits: int, g: float) -> float:
    """Smallest eigenvalue of the dense TFIM Hamiltonian."""
    ham = tfim_dense_hamiltonian(n_qubits, g)
    return float(np.linalg.eigvalsh(ham)[0])


# -- maximum mean discrepancy ----------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel bandwidth for integer-valued outcomes."""

    bandwidth: float

    def __post_init__(self):
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be finite and positive, got {self.bandwidth}")


@dataclass(frozen=True)
class EmpiricalDist:
    """Outcome distribution of an integer dataset, with its sample count."""

    probs: np.ndarray
    source_size: int

    def __post_init__(self):
        probs = _check_prob_dist(self.probs)
        object.__setattr__(self, "probs", probs)
        if self.source_size < 1:
            raise ValueError(f"source_size must be >= 1, got {self.source_size}")

    @property
    def n_outcomes(self) -> int:
        return self.probs.size


def gaussian_kernel(z: int, z_other: int, sigma: float) -> float:
    """k(z, z') = exp(-(z - z')^2 / (2 sigma^2)) on integers."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    diff = float(z) - float(z_other)
    return math.exp(-diff * diff / (2.0 * sigma * sigma))


def kernel_matrix(n_outcomes: int, sigma: float) -> np.ndarray:
    """Gaussian kernel Gram matrix over outcomes 0..n_outcomes-1."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    z = np.arange(n_outcomes, dtype=float)
    diff = z[:, None] - z[None, :]
    return np.exp(-(diff * diff) / (2.0 * sigma * sigma))


def median_heuristic(data) -> float:
    """Kernel bandwidth: lower median of pairwise absolute differences.

    Raises on a degenerate bandwidth (zero median), which includes the
    all-equal case.
    """
    values = np.asarray(data, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("need at least 2 data points")
    diffs = np.abs(values[:, None] - values[None, :])
    pairwise = diffs[np.triu_indices(values.size, k=1)]
    pairwise.sort()
    sigma = float(pairwise[(pairwise.size - 1) // 2])
    if sigma == 0.0:
        raise ValueError("degenerate bandwidth: median pairwise distance is zero")
    return sigma


def mmd_cost(model, data: EmpiricalDist, kernel: KernelSpec) -> float:
    """Squared maximum mean discrepancy between model and data distributions.

    Computed as the exact double sum over the full outcome space,
    (p - nu)^T K (p - nu) >= 0, zero iff the distributions coincide.
    """
    probs = _check_prob_dist(model)
    if probs.size != data.n_outcomes:
        raise ValueError(
            f"model has {probs.size} outcomes, data has {data.n_outcomes}"
        )
    gram = kernel_matrix(probs.size, kernel.bandwidth)
    diff = probs - data.probs
    return float(diff @ (gram @ diff))


def total_variation(p, q) -> float:
    """Total variation distance (1/2) sum_z |p_z - q_z|, in [0, 1]."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


# -- graph files ---------------------------------------------------------------
#
# First line: number of nodes. Each following line: `i j w`.

def save_graph(graph: WeightedGraph, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{graph.n_nodes}\n")
        for i, j, w in graph.edges:
            fh.write(f"{i} {j} {w!r}\n")


def load_graph(path) -> WeightedGraph:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty graph file")
    try:
        n_nodes = int(lines[0])
    except ValueError as exc:
        raise ValueError(f"{path}: line 1: expected node count, got {lines[0]!r}") from exc
    edges = []
    for lineno, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if len(parts) != 3:
            raise ValueError(f"{path}: line {lineno}: expected `i j w`, got {raw!r}")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    return WeightedGraph(n_nodes, tuple(edges))
