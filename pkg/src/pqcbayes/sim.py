"""Dense statevector simulation of small qubit registers.

Supports the gate set {H, Rx, Rz, CZ}. Qubit 0 is the MOST significant bit
of a computational-basis index, so |q0 q1 ... q_{n-1}> has integer index
sum_j q_j * 2**(n-1-j), i.e. a measured bitstring reads left to right.

Gates act on a dense complex128 array viewed with one axis per qubit, so a
single-qubit gate costs O(2**n); no 2**n x 2**n matrices are ever built
outside of test oracles. `run_circuit_batch` evaluates one circuit at many
parameter vectors along a leading batch axis with elementwise arithmetic
identical to the single-state path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Callable

import numpy as np

if TYPE_CHECKING:
    from .ansatz import CircuitIR

# Memory cap: 2**24 complex128 amplitudes is 256 MiB.
MAX_QUBITS = 24

GATE_KINDS = ("H", "RX", "RZ", "CZ")
ROTATION_KINDS = ("RX", "RZ")

_SQRT2_INV = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class GateOp:
    """One gate: kind, target qubit(s), and for rotations either an unbound
    parameter slot or a bound angle (exactly one of the two)."""

    kind: str
    qubits: tuple[int, ...]
    param_slot: int | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n_targets = 2 if self.kind == "CZ" else 1
        if len(self.qubits) != n_targets:
            raise ValueError(f"{self.kind} acts on {n_targets} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"duplicate qubit index in {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise IndexError(f"negative qubit index in {self.qubits}")
        if self.kind in ROTATION_KINDS:
            if (self.param_slot is None) == (self.angle is None):
                raise ValueError(
                    f"{self.kind} carries exactly one of param_slot or angle"
                )
            if self.param_slot is not None and self.param_slot < 0:
                raise ValueError(f"negative param_slot {self.param_slot}")
        elif self.param_slot is not None or self.angle is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    @property
    def is_rotation(self) -> bool:
        return self.kind in ROTATION_KINDS

    @classmethod
    def h(cls, qubit: int) -> "GateOp":
        return cls("H", (qubit,))

    @classmethod
    def rx(cls, qubit: int, slot: int | None = None, angle: float | None = None) -> "GateOp":
        return cls("RX", (qubit,), slot, angle)

    @classmethod
    def rz(cls, qubit: int, slot: int | None = None, angle: float | None = None) -> "GateOp":
        return cls("RZ", (qubit,), slot, angle)

    @classmethod
    def cz(cls, qubit_a: int, qubit_b: int) -> "GateOp":
        return cls("CZ", (qubit_a, qubit_b))


@dataclass
class StateVector:
    """Amplitudes of an n-qubit pure state, indexed MSB-first by qubit 0."""

    n_qubits: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


def init_zero_state(n_qubits: int) -> StateVector:
    """Prepare |0...0> on `n_qubits` qubits (1 <= n_qubits <= MAX_QUBITS)."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


# -- in-place gate kernels on a [2]*n tensor view ---------------------------

def _apply_h(psi: np.ndarray, q: int) -> None:
    pq = np.moveaxis(psi, q, 0)
    a = pq[0].copy()
    b = pq[1]
    pq[0] = (a + b) * _SQRT2_INV
    pq[1] = (a - b) * _SQRT2_INV


def _apply_rx(psi: np.ndarray, q: int, angle: float) -> None:
    c = np.cos(angle / 2.0)
    s = -1j * np.sin(angle / 2.0)
    pq = np.moveaxis(psi, q, 0)
    a = pq[0].copy()
    b = pq[1]
    pq[0] = c * a + s * b
    pq[1] = s * a + c * b


def _apply_rz(psi: np.ndarray, q: int, angle: float) -> None:
    pq = np.moveaxis(psi, q, 0)
    pq[0] *= np.exp(-0.5j * angle)
    pq[1] *= np.exp(0.5j * angle)


def _apply_cz(psi: np.ndarray, q1: int, q2: int) -> None:
    idx: list = [slice(None)] * psi.ndim
    idx[q1] = 1
    idx[q2] = 1
    psi[tuple(idx)] *= -1.0


def _apply_gate_view(psi: np.ndarray, gate: GateOp, angle: float | None) -> None:
    if gate.kind == "H":
        _apply_h(psi, gate.qubits[0])
    elif gate.kind == "RX":
        _apply_rx(psi, gate.qubits[0], angle)
    elif gate.kind == "RZ":
        _apply_rz(psi, gate.qubits[0], angle)
    else:
        _apply_cz(psi, gate.qubits[0], gate.qubits[1])


def apply_gate(state: StateVector, gate: GateOp, angle: float | None = None) -> StateVector:
    """Return the state transformed by one gate; the input is not mutated.

    Rx(t) = exp(-i t X / 2), Rz(t) = exp(-i t Z / 2), CZ = diag(1,1,1,-1).
    An angle must be supplied (either on the gate or via `angle`) iff the
    gate is a rotation, and never twice.
    """
    if gate.is_rotation:
        if angle is not None and gate.angle is not None:
            raise ValueError("angle supplied twice (bound gate plus explicit angle)")
        eff_angle = angle if angle is not None else gate.angle
        if eff_angle is None:
            raise ValueError(f"{gate.kind} requires an angle")
    else:
        if angle is not None:
            raise ValueError(f"{gate.kind} takes no angle")
        eff_angle = None
    if any(q >= state.n_qubits for q in gate.qubits):
        raise IndexError(f"qubit index {gate.qubits} out of range for {state.n_qubits} qubits")
    out = state.copy()
    psi = out.amplitudes.reshape((2,) * state.n_qubits)
    _apply_gate_view(psi, gate, eff_angle)
    return out


def run_circuit(circuit: "CircuitIR", theta=None) -> StateVector:
    """Apply a circuit to |0...0>, binding parameter slots from `theta`.

    `theta` must have exactly circuit.n_params entries (omit it for bound
    circuits). Deterministic: identical inputs give identical amplitudes.
    """
    theta = np.zeros(0) if theta is None else np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_params,):
        raise ValueError(
            f"expected {circuit.n_params} parameters, got shape {theta.shape}"
        )
    state = init_zero_state(circuit.n_qubits)
    psi = state.amplitudes.reshape((2,) * circuit.n_qubits)
    for gate in circuit.gates:
        angle = theta[gate.param_slot] if gate.param_slot is not None else gate.angle
        _apply_gate_view(psi, gate, angle)
    return state


# -- batched evaluation ------------------------------------------------------

def _batch_apply_h(psi: np.ndarray, q: int) -> None:
    pq = np.moveaxis(psi, 1 + q, 1)
    a = pq[:, 0].copy()
    b = pq[:, 1]
    pq[:, 0] = (a + b) * _SQRT2_INV
    pq[:, 1] = (a - b) * _SQRT2_INV


def _batch_apply_rx(psi: np.ndarray, q: int, angles: np.ndarray) -> None:
    shape = (psi.shape[0],) + (1,) * (psi.ndim - 2)
    c = np.cos(angles / 2.0).reshape(shape)
    s = (-1j * np.sin(angles / 2.0)).reshape(shape)
    pq = np.moveaxis(psi, 1 + q, 1)
    a = pq[:, 0].copy()
    b = pq[:, 1]
    pq[:, 0] = c * a + s * b
    pq[:, 1] = s * a + c * b


def _batch_apply_rz(psi: np.ndarray, q: int, angles: np.ndarray) -> None:
    shape = (psi.shape[0],) + (1,) * (psi.ndim - 2)
    pq = np.moveaxis(psi, 1 + q, 1)
    pq[:, 0] *= np.exp(-0.5j * angles).reshape(shape)
    pq[:, 1] *= np.exp(0.5j * angles).reshape(shape)


def run_circuit_batch(circuit: "CircuitIR", thetas: np.ndarray) -> np.ndarray:
    """Run one circuit at B parameter vectors; returns amplitudes (B, 2**n).

    Row b equals run_circuit(circuit, thetas[b]).amplitudes bit for bit
    (all kernels are elementwise per row).
    """
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 2 or thetas.shape[1] != circuit.n_params:
        raise ValueError(
            f"expected shape (B, {circuit.n_params}), got {thetas.shape}"
        )
    n = circuit.n_qubits
    batch = thetas.shape[0]
    amps = np.zeros((batch, 1 << n), dtype=np.complex128)
    amps[:, 0] = 1.0
    psi = amps.reshape((batch,) + (2,) * n)
    for gate in circuit.gates:
        if gate.kind == "H":
            _batch_apply_h(psi, gate.qubits[0])
        elif gate.kind == "CZ":
            idx: list = [slice(None)] * psi.ndim
            idx[1 + gate.qubits[0]] = 1
            idx[1 + gate.qubits[1]] = 1
            psi[tuple(idx)] *= -1.0
        else:
            if gate.param_slot is not None:
                angles = thetas[:, gate.param_slot]
            else:
                angles = np.full(batch, gate.angle)
            if gate.kind == "RX":
                _batch_apply_rx(psi, gate.qubits[0], angles)
            else:
                _batch_apply_rz(psi, gate.qubits[0], angles)
    return amps


# -- measurement -------------------------------------------------------------

def born_probabilities(state: StateVector) -> np.ndarray:
    """Outcome distribution p_z = |amplitude_z|^2."""
    a = state.amplitudes
    return a.real * a.real + a.imag * a.imag


def _check_prob_dist(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("probability vector must be 1-D and non-empty")
    if np.any(probs < -1e-12):
        raise ValueError("negative probability entry")
    if abs(float(probs.sum()) - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {probs.sum()}, not 1")
    return probs


def sample_counts(dist, n_shots: int, seed) -> dict[int, int]:
    """Draw n_shots i.i.d. categorical outcomes; returns {outcome: count}.

    Only nonzero counts appear. Reproducible: the same (dist, n_shots, seed)
    always gives the same counts.
    """
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    probs = _check_prob_dist(dist)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(n_shots, probs)
    return {int(z): int(c) for z, c in enumerate(counts) if c}


def counts_to_probs(counts: dict[int, int], n_outcomes: int) -> np.ndarray:
    """Empirical distribution of shot counts over [0, n_outcomes)."""
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("empty counts")
    probs = np.zeros(n_outcomes)
    for z, c in counts.items():
        probs[z] = c
    return probs / total


def expectation_diagonal(dist, f: Callable[[int], float]) -> float:
    """Expectation of an outcome function under a distribution: sum_z p_z f(z)."""
    probs = _check_prob_dist(dist)
    values = np.array([f(z) for z in range(probs.size)], dtype=float)
    return float(probs @ values)


# -- transverse-field Ising energy -------------------------------------------

@lru_cache(maxsize=None)
def _zz_chain_diagonal(n_qubits: int) -> np.ndarray:
    """Diagonal of sum_i Z_i Z_{i+1} over the open chain, per basis index."""
    idx = np.arange(1 << n_qubits)
    total = np.zeros(idx.size, dtype=np.int64)
    for i in range(n_qubits - 1):
        differ = ((idx >> (n_qubits - 1 - i)) ^ (idx >> (n_qubits - 2 - i))) & 1
        total += 1 - 2 * differ
    out = total.astype(float)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _site_sign_sum(n_qubits: int) -> np.ndarray:
    """Diagonal of sum_i Z_i: n minus twice the popcount of each index."""
    idx = np.arange(1 << n_qubits)
    total = np.zeros(idx.size, dtype=np.int64)
    for i in range(n_qubits):
        total += 1 - 2 * ((idx >> (n_qubits - 1 - i)) & 1)
    out = total.astype(float)
    out.setflags(write=False)
    return out


def expectation_tfim(state: StateVector, g: float) -> float:
    """<state| -sum_i Z_i Z_{i+1} - g sum_i X_i |state> for the open chain."""
    n = state.n_qubits
    if n < 2:
        raise ValueError("transverse-field Ising energy needs at least 2 qubits")
    probs = born_probabilities(state)
    zz = float(probs @ _zz_chain_diagonal(n))
    psi = state.amplitudes.reshape((2,) * n)
    x_total = 0.0
    for q in range(n):
        pq = np.moveaxis(psi, q, 0)
        x_total += 2.0 * float(np.real(np.vdot(pq[0], pq[1])))
    return -zz - g * x_total


def expectation_tfim_batch(amps: np.ndarray, n_qubits: int, g: float) -> np.ndarray:
    """Row-wise TFIM energies for batched amplitudes of shape (B, 2**n)."""
    if n_qubits < 2:
        raise ValueError("transverse-field Ising energy needs at least 2 qubits")
    probs = amps.real * amps.real + amps.imag * amps.imag
    zz = probs @ _zz_chain_diagonal(n_qubits)
    psi = amps.reshape((amps.shape[0],) + (2,) * n_qubits)
    x_total = np.zeros(amps.shape[0])
    for q in range(n_qubits):
        pq = np.moveaxis(psi, 1 + q, 1)
        lo = pq[:, 0].reshape(amps.shape[0], -1)
        hi = pq[:, 1].reshape(amps.shape[0], -1)
        x_total += 2.0 * np.real(np.einsum("bi,bi->b", lo.conj(), hi))
    return -zz - g * x_total
