"""Resource-state preparation: GHZ, W, and the leader-aware state.

The leader-aware state is a W state over the end-nodes' qubits enriched with
ceil(log2 n) orchestrator-held ancillas. A chain of CNOTs copies the binary
index of the (future) winner into the ancilla block, so measuring the W
qubits elects a unique winner while the ancillas collapse to its codeword.

Register layout for n end-nodes: W qubits 0..n-1 (qubit i-1 belongs to
end-node N_i), ancillas n..n+m-1 (a_j at index n+j, least significant first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .statevector import (
    HADAMARD,
    IDENTITY,
    PAULI_X,
    PAULI_Z,
    StateVector,
    apply_cnot,
    apply_single,
)

_SINGLE_QUBIT_GATES = {"I": IDENTITY, "H": HADAMARD, "X": PAULI_X, "Z": PAULI_Z}


def ancilla_count(n: int) -> int:
    """Number of ancilla qubits needed to address n end-nodes."""
    if n < 1:
        raise ValueError("need at least one end-node")
    return 0 if n == 1 else math.ceil(math.log2(n))


@dataclass(frozen=True)
class LeaderAwareLayout:
    """Qubit indexing for the leader-aware register of n end-nodes."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one end-node")

    @property
    def m(self) -> int:
        return ancilla_count(self.n)

    @property
    def num_qubits(self) -> int:
        return self.n + self.m

    def w_qubit(self, node: int) -> int:
        """Register index of end-node ``node``'s W qubit (nodes are 1-based)."""
        if not 1 <= node <= self.n:
            raise ValueError(f"end-node index must be in 1..{self.n}, got {node}")
        return node - 1

    def ancilla_qubit(self, j: int) -> int:
        if not 0 <= j < self.m:
            raise ValueError(f"ancilla index must be in 0..{self.m - 1}, got {j}")
        return self.n + j

    @property
    def w_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def ancilla_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n, self.n + self.m))

    @classmethod
    def from_total_qubits(cls, total: int) -> LeaderAwareLayout:
        """Recover the layout from a register size (n + ancilla_count(n) is injective)."""
        n = 1
        while n + ancilla_count(n) < total:
            n += 1
        if n + ancilla_count(n) != total:
            raise ValueError(f"no end-node count yields a {total}-qubit register")
        return cls(n)


@dataclass(frozen=True)
class GateOp:
    """One circuit entry: gate kind, target, and optional control."""

    kind: str
    target: int
    control: int | None = None


@dataclass
class GateList:
    """Ordered gate sequence over a register of declared width."""

    num_qubits: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self) -> None:
        for op in self.ops:
            self._validate(op)

    def _validate(self, op: GateOp) -> None:
        if op.kind == "CX":
            if op.control is None:
                raise ValueError("CX entry requires a control index")
            if op.control == op.target:
                raise ValueError("CX control and target must differ")
            indices = (op.control, op.target)
        elif op.kind in _SINGLE_QUBIT_GATES:
            if op.control is not None:
                raise ValueError(f"{op.kind} entry takes no control")
            indices = (op.target,)
        else:
            raise ValueError(f"unknown gate kind {op.kind!r}")
        for q in indices:
            if not 0 <= q < self.num_qubits:
                raise ValueError(
                    f"index {q} outside register of width {self.num_qubits}"
                )

    def apply(self, state: StateVector) -> StateVector:
        """Simulate the gate sequence onto ``state``."""
        if state.num_qubits != self.num_qubits:
            raise ValueError(
                f"state has {state.num_qubits} qubits, circuit declares {self.num_qubits}"
            )
        for op in self.ops:
            if op.kind == "CX":
                state = apply_cnot(state, op.control, op.target)
            else:
                state = apply_single(state, op.target, _SINGLE_QUBIT_GATES[op.kind])
        return state

    def to_text(self) -> str:
        """Line-oriented export: ``QUBITS <count>`` header, one gate per line."""
        lines = [f"QUBITS {self.num_qubits}"]
        for op in self.ops:
            if op.kind == "CX":
                lines.append(f"CX {op.control} {op.target}")
            else:
                lines.append(f"{op.kind} {op.target}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> GateList:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("QUBITS "):
            raise ValueError("gate list must start with a 'QUBITS <count>' header")
        num_qubits = int(lines[0].split()[1])
        ops = []
        for ln in lines[1:]:
            parts = ln.split()
            if parts[0] == "CX":
                if len(parts) != 3:
                    raise ValueError(f"malformed CX line: {ln!r}")
                ops.append(GateOp("CX", target=int(parts[2]), control=int(parts[1])))
            elif parts[0] in _SINGLE_QUBIT_GATES and len(parts) == 2:
                ops.append(GateOp(parts[0], target=int(parts[1])))
            else:
                raise ValueError(f"malformed gate line: {ln!r}")
        return cls(num_qubits, ops)


def prepare_ghz(q: int) -> StateVector:
    """(|0...0> + |1...1>)/sqrt(2) over q qubits."""
    if q < 2:
        raise ValueError("GHZ state needs at least two qubits")
    amps = np.zeros(1 << q, dtype=complex)
    amps[0] = amps[-1] = 1.0 / math.sqrt(2.0)
    return StateVector(q, amps)


def prepare_w(n: int) -> StateVector:
    """Equal superposition of all one-hot basis states over n qubits."""
    if n < 1:
        raise ValueError("W state needs at least one qubit")
    amps = np.zeros(1 << n, dtype=complex)
    for i in range(n):
        amps[1 << (n - 1 - i)] = 1.0 / math.sqrt(n)
    return StateVector(n, amps)


def leader_aware_circuit(n: int) -> GateList:
    """CNOT chain copying each end-node's index into the ancilla block.

    For end-node N_i, every set bit j of i-1 adds one CNOT controlled by
    N_i's W qubit targeting ancilla a_j. Emission order is ascending i,
    then ascending j.
    """
    layout = LeaderAwareLayout(n)
    ops = []
    for i in range(1, n + 1):
        code = i - 1
        for j in range(layout.m):
            if (code >> j) & 1:
                ops.append(
                    GateOp("CX", control=layout.w_qubit(i), target=layout.ancilla_qubit(j))
                )
    return GateList(layout.num_qubits, ops)


def prepare_leader_aware(n: int) -> StateVector:
    """The contention resource: n one-hot W terms, each tagged with the
    winner's binary index on the ancillas.

    Built directly from the amplitude pattern; ``leader_aware_circuit(n)``
    applied to W tensor |0...0> produces the same state (checked in tests).
    """
    layout = LeaderAwareLayout(n)
    total = layout.num_qubits
    amps = np.zeros(1 << total, dtype=complex)
    for i in range(1, n + 1):
        index = 1 << (total - 1 - layout.w_qubit(i))
        code = i - 1
        for j in range(layout.m):
            if (code >> j) & 1:
                index |= 1 << (total - 1 - layout.ancilla_qubit(j))
        amps[index] = 1.0 / math.sqrt(n)
    return StateVector(total, amps)
