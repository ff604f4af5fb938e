"""Layered hardware-efficient circuits and the compile pass.

The ansatz on n qubits with depth L is a Hadamard wall, then L blocks of
per-qubit Rx and Rz rotations followed by a linear CZ chain, then one final
Rx+Rz layer, for K = 2n(L+1) parameters. The compile pass deletes rotations
bound to an exactly zero angle and then cancels redundant CZ pairs; it
preserves the output distribution exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sim import GateOp


@dataclass(frozen=True)
class CircuitIR:
    """Ordered gate list over n qubits with K unbound parameter slots.

    Slots must be exactly {0, ..., K-1}, each used once; a bound circuit has
    K = 0 and carries angles on its rotations instead.
    """

    n_qubits: int
    gates: tuple[GateOp, ...]
    n_params: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        slots = []
        for gate in self.gates:
            if any(q >= self.n_qubits for q in gate.qubits):
                raise IndexError(
                    f"gate {gate.kind}{gate.qubits} out of range for {self.n_qubits} qubits"
                )
            if gate.param_slot is not None:
                slots.append(gate.param_slot)
        if sorted(slots) != list(range(self.n_params)):
            raise ValueError(
                f"parameter slots must be exactly 0..{self.n_params - 1}, each once"
            )

    @property
    def is_bound(self) -> bool:
        return self.n_params == 0


@dataclass(frozen=True)
class GateCounts:
    cz: int
    rx: int
    rz: int
    h: int


def build_ansatz(n_qubits: int, depth: int) -> CircuitIR:
    """Hadamard wall + depth x [Rx layer, Rz layer, CZ chain] + final Rx+Rz layer.

    K = 2 * n_qubits * (depth + 1); CZ count = depth * (n_qubits - 1).
    Slots are assigned in gate order.
    """
    if n_qubits < 1:
        raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    gates = [GateOp.h(q) for q in range(n_qubits)]
    slot = 0

    def rotation_layer():
        nonlocal slot
        for q in range(n_qubits):
            gates.append(GateOp.rx(q, slot))
            slot += 1
        for q in range(n_qubits):
            gates.append(GateOp.rz(q, slot))
            slot += 1

    for _ in range(depth):
        rotation_layer()
        for i in range(n_qubits - 1):
            gates.append(GateOp.cz(i, i + 1))
    rotation_layer()
    return CircuitIR(n_qubits, tuple(gates), slot)


def _bound_angle(gate: GateOp, theta: np.ndarray) -> float:
    return float(theta[gate.param_slot]) if gate.param_slot is not None else gate.angle


def bind_parameters(circuit: CircuitIR, theta) -> CircuitIR:
    """Substitute angles for every parameter slot; the result has K = 0."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_params,):
        raise ValueError(f"expected {circuit.n_params} parameters, got shape {theta.shape}")
    gates = [
        GateOp(g.kind, g.qubits, None, _bound_angle(g, theta)) if g.is_rotation else g
        for g in circuit.gates
    ]
    return CircuitIR(circuit.n_qubits, tuple(gates), 0)


def prune_zero_rotations(circuit: CircuitIR, theta) -> CircuitIR:
    """Bind angles, then delete every rotation whose angle is exactly 0.0.

    The proximal update produces exact zeros, so equality (not a tolerance)
    is the deletion test. Other gates keep their order; the result is bound.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_params,):
        raise ValueError(f"expected {circuit.n_params} parameters, got shape {theta.shape}")
    gates = []
    for gate in circuit.gates:
        if gate.is_rotation:
            angle = _bound_angle(gate, theta)
            if angle == 0.0:
                continue
            gates.append(GateOp(gate.kind, gate.qubits, None, angle))
        else:
            gates.append(gate)
    return CircuitIR(circuit.n_qubits, tuple(gates), 0)


def cancel_cz_pairs(circuit: CircuitIR) -> CircuitIR:
    """Delete pairs of identical CZ gates until a fixpoint.

    A pair cancels when every intervening gate either acts on disjoint
    qubits or is itself a CZ (all CZs are diagonal, so they commute with
    each other); any H/Rx/Rz on a shared qubit blocks the pair. The output
    statevector is identical to the input's (CZ only flips amplitude signs,
    so removing an even number of flips is exact).
    """
    if circuit.n_params:
        raise ValueError("cancel_cz_pairs requires a bound circuit")
    gates = list(circuit.gates)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(gates):
            gate = gates[i]
            if gate.kind != "CZ":
                i += 1
                continue
            pair = frozenset(gate.qubits)
            matched = False
            j = i + 1
            while j < len(gates):
                other = gates[j]
                if other.kind == "CZ":
                    if frozenset(other.qubits) == pair:
                        del gates[j]
                        del gates[i]
                        matched = changed = True
                        break
                    j += 1
                    continue
                if pair & set(other.qubits):
                    break
                j += 1
            if not matched:
                i += 1
    return CircuitIR(circuit.n_qubits, tuple(gates), 0)


def prune_and_cancel(circuit: CircuitIR, theta) -> CircuitIR:
    """Full compile pass: prune exact-zero rotations, then cancel CZ pairs."""
    return cancel_cz_pairs(prune_zero_rotations(circuit, theta))


def gate_counts(circuit: CircuitIR) -> GateCounts:
    """Exact tally of gates by kind."""
    kinds = [g.kind for g in circuit.gates]
    return GateCounts(
        cz=kinds.count("CZ"),
        rx=kinds.count("RX"),
        rz=kinds.count("RZ"),
        h=kinds.count("H"),
    )


# -- text serialization -------------------------------------------------------
#
# One gate per line: `H q`, `CZ q1 q2`, `RX q third`, `RZ q third` where the
# third token is an unbound slot (integer literal) or a bound angle (float
# literal; always written with a '.' or exponent, so the two never collide).

def circuit_to_text(circuit: CircuitIR) -> str:
    lines = []
    for gate in circuit.gates:
        if gate.kind == "H":
            lines.append(f"H {gate.qubits[0]}")
        elif gate.kind == "CZ":
            lines.append(f"CZ {gate.qubits[0]} {gate.qubits[1]}")
        else:
            third = str(gate.param_slot) if gate.param_slot is not None else repr(gate.angle)
            lines.append(f"{gate.kind} {gate.qubits[0]} {third}")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str, n_qubits: int | None = None) -> CircuitIR:
    """Parse the line format above; n_qubits defaults to max index + 1."""
    gates: list[GateOp] = []
    max_qubit = -1
    slots: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts:
            raise ValueError(f"line {lineno}: empty line")
        kind = parts[0].upper()
        try:
            if kind == "H":
                if len(parts) != 2:
                    raise ValueError("expected `H q`")
                gates.append(GateOp.h(int(parts[1])))
            elif kind == "CZ":
                if len(parts) != 3:
                    raise ValueError("expected `CZ q1 q2`")
                gates.append(GateOp.cz(int(parts[1]), int(parts[2])))
            elif kind in ("RX", "RZ"):
                if len(parts) != 3:
                    raise ValueError(f"expected `{kind} q slot|angle`")
                qubit = int(parts[1])
                try:
                    third: int | float = int(parts[2])
                except ValueError:
                    third = float(parts[2])
                if isinstance(third, int):
                    gates.append(GateOp(kind, (qubit,), third, None))
                    slots.append(third)
                else:
                    gates.append(GateOp(kind, (qubit,), None, third))
            else:
                raise ValueError(f"unknown gate {parts[0]!r}")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        max_qubit = max(max_qubit, *gates[-1].qubits)
    if n_qubits is None:
        if max_qubit < 0:
            raise ValueError("empty circuit text requires an explicit n_qubits")
        n_qubits = max_qubit + 1
    n_params = max(slots) + 1 if slots else 0
    return CircuitIR(n_qubits, tuple(gates), n_params)
