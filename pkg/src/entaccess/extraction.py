"""Distributed EPR extraction from a shared GHZ state.

Each node holds one GHZ qubit. A bit sequence with exactly two ones marks
the winning pair; every other node (a loser) vacates the state with a
single Hadamard-basis measurement on its own qubit. The winners are then
left holding a Bell pair: |Phi+> when the losers' outcomes have even
parity, |Phi-> when odd, so one parity-conditioned Z repairs the pair.

Everything here is local: single-qubit gates and single-qubit measurements
only, plus the classical outcome bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .statevector import (
    Basis,
    HADAMARD,
    IDENTITY,
    PAULI_Z,
    Gate,
    MeasurementRecord,
    RandomSource,
    StateVector,
    apply_single,
    measure,
)

BELL_PHI_PLUS = StateVector(2, np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0))
BELL_PHI_MINUS = StateVector(2, np.array([1.0, 0.0, 0.0, -1.0]) / math.sqrt(2.0))


@dataclass(frozen=True)
class PSequence:
    """Per-node bit sequence selecting the extraction unitaries.

    Exactly two bits are 1; those positions mark the pair that keeps the
    entanglement. Bit i belongs to node N_i (the orchestrator is index 0).
    """

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("sequence entries must be bits")
        if sum(self.bits) != 2:
            raise ValueError("exactly two entries must be 1")

    def __len__(self) -> int:
        return len(self.bits)

    @classmethod
    def for_pair(cls, a: int, b: int, n: int) -> PSequence:
        """Sequence over nodes 0..n with ones at positions a and b."""
        if a == b:
            raise ValueError("pair members must differ")
        bits = [0] * (n + 1)
        for q in (a, b):
            if not 0 <= q <= n:
                raise ValueError(f"node index {q} out of range 0..{n}")
            bits[q] = 1
        return cls(tuple(bits))

    @property
    def pair(self) -> tuple[int, int]:
        """The two winner indices, ascending."""
        winners = tuple(i for i, b in enumerate(self.bits) if b == 1)
        return winners  # length 2 by the invariant

    @property
    def losers(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b == 0)


@dataclass(frozen=True)
class ExtractionResult:
    """Outcome of one extraction run.

    ``outcomes`` maps each loser index to its measurement bit; ``parity`` is
    their XOR. The pair qubits of ``state`` hold |Phi+> when parity is 0 and
    |Phi-> when 1 (losers stay in the register, pinned). ``operations`` logs
    every quantum operation performed, each touching a single qubit.
    """

    pair: tuple[int, int]
    outcomes: dict[int, int]
    parity: int
    state: StateVector
    records: tuple[MeasurementRecord, ...]
    operations: tuple[tuple[str, int], ...]


def build_p_sequence(winner: int, n: int) -> PSequence:
    """Pair the orchestrator (node 0) with the contention winner."""
    if not 1 <= winner <= n:
        raise ValueError(f"winner must be an end-node index in 1..{n}, got {winner}")
    return PSequence.for_pair(0, winner, n)


def unitary_for(p_bit: int) -> Gate:
    """Local gate a node applies to its GHZ qubit: H for losers, I for winners."""
    if p_bit == 0:
        return HADAMARD
    if p_bit == 1:
        return IDENTITY
    raise ValueError(f"sequence entry must be a bit, got {p_bit!r}")


def apply_up(state: StateVector, p: PSequence) -> StateVector:
    """Apply every node's local extraction unitary to its own qubit."""
    if state.num_qubits != len(p):
        raise ValueError(
            f"state has {state.num_qubits} qubits but sequence covers {len(p)} nodes"
        )
    for qubit, bit in enumerate(p.bits):
        if bit == 0:
            state = apply_single(state, qubit, HADAMARD)
    return state


def extract_epr(ghz: StateVector, p: PSequence, rng: RandomSource) -> ExtractionResult:
    """Measure every loser qubit in the Hadamard basis, leaving the pair a Bell state.

    The Hadamard-basis measurement is each loser's local unitary and
    computational readout folded into one step; ``apply_up`` followed by
    computational measurements gives identical statistics (checked in tests).
    """
    if ghz.num_qubits != len(p):
        raise ValueError(
            f"state has {ghz.num_qubits} qubits but sequence covers {len(p)} nodes"
        )
    state = ghz
    outcomes: dict[int, int] = {}
    records = []
    operations = []
    for qubit in p.losers:
        record, state = measure(state, qubit, Basis.HADAMARD, rng)
        outcomes[qubit] = record.outcome
        records.append(record)
        operations.append(("measure_hadamard", qubit))
    parity = reduce(lambda acc, g: acc ^ g, outcomes.values(), 0)
    return ExtractionResult(
        pair=p.pair,
        outcomes=outcomes,
        parity=parity,
        state=state,
        records=tuple(records),
        operations=tuple(operations),
    )


def parity_correct(state: StateVector, parity: int, qubit: int) -> StateVector:
    """Z on ``qubit`` iff the losers' outcome parity is odd; turns |Phi-> into |Phi+>."""
    if parity not in (0, 1):
        raise ValueError("parity must be a bit")
    if parity == 1:
        state = apply_single(state, qubit, PAULI_Z)
    return state


def bell_pair_reference(
    num_qubits: int, pair: tuple[int, int], pinned: dict[int, int], minus: bool = False
) -> StateVector:
    """Full-register state with |Phi+-> on ``pair`` and every other qubit pinned.

    Used to check extraction results, where losers sit collapsed in the
    register next to the extracted pair.
    """
    a, b = pair
    amps = np.zeros(1 << num_qubits, dtype=complex)
    base = 0
    for qubit, bit in pinned.items():
        if bit:
            base |= 1 << (num_qubits - 1 - qubit)
    ones = (1 << (num_qubits - 1 - a)) | (1 << (num_qubits - 1 - b))
    amps[base] = 1.0 / math.sqrt(2.0)
    amps[base | ones] = (-1.0 if minus else 1.0) / math.sqrt(2.0)
    return StateVector(num_qubits, amps)
