"""Independent dense-matrix oracles for cross-checking the simulator.

Everything here builds explicit 2**n x 2**n matrices (kron chains, matrix
exponentials), the slow-but-obviously-correct path the library avoids.
Qubit 0 is the most significant bit, i.e. the first kron factor.
"""

import numpy as np
from scipy.linalg import expm

from pqcbayes.sim import GateOp

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
P1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)


def gate_matrix(kind: str, angle=None) -> np.ndarray:
    if kind == "H":
        return HADAMARD
    if kind == "RX":
        return expm(-0.5j * angle * PAULI_X)
    if kind == "RZ":
        return expm(-0.5j * angle * PAULI_Z)
    raise ValueError(kind)


def embed_single(mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    acc = np.ones((1, 1), dtype=complex)
    for q in range(n):
        acc = np.kron(acc, mat if q == qubit else np.eye(2))
    return acc


def embed_cz(q1: int, q2: int, n: int) -> np.ndarray:
    both_one = np.ones((1, 1), dtype=complex)
    for q in range(n):
        both_one = np.kron(both_one, P1 if q in (q1, q2) else np.eye(2))
    return np.eye(1 << n) - 2.0 * both_one


def circuit_unitary(circuit, theta=None) -> np.ndarray:
    """Full unitary of a circuit as an ordered dense matrix product."""
    n = circuit.n_qubits
    acc = np.eye(1 << n, dtype=complex)
    for gate in circuit.gates:
        if gate.kind == "CZ":
            full = embed_cz(gate.qubits[0], gate.qubits[1], n)
        else:
            angle = theta[gate.param_slot] if gate.param_slot is not None else gate.angle
            full = embed_single(gate_matrix(gate.kind, angle), gate.qubits[0], n)
        acc = full @ acc
    return acc


def random_bound_gates(rng, n_qubits: int, n_gates: int):
    """Random bound gate sequence over the supported gate set."""
    gates = []
    for _ in range(n_gates):
        kind = rng.choice(["H", "RX", "RZ", "CZ"])
        if kind == "CZ" and n_qubits >= 2:
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append(GateOp.cz(int(a), int(b)))
        elif kind == "H":
            gates.append(GateOp.h(int(rng.integers(n_qubits))))
        else:
            angle = float(rng.uniform(-np.pi, np.pi))
            q = int(rng.integers(n_qubits))
            gates.append(GateOp(kind if kind != "CZ" else "RX", (q,), None, angle))
    return gates
