"""Exact dense state-vector simulation over a labeled qubit register.

Conventions:
- Qubit 0 is the leftmost label in ket notation, i.e. the most significant
  bit of a basis-state index.
- Measured qubits stay in the register, pinned to their outcome, so indices
  remain stable across a protocol run.
- All operations are pure: they return new StateVector instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

NORM_TOL = 1e-10      # norm / fidelity assertions
UNITARY_TOL = 1e-12   # constant gate matrices
_BRANCH_EPS = 1e-12   # probability below which a branch is treated as impossible


class Basis(Enum):
    COMPUTATIONAL = "computational"
    HADAMARD = "hadamard"


@dataclass(frozen=True, eq=False)
class Gate:
    """A single-qubit gate: a name plus its 2x2 unitary matrix."""

    name: str
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"gate matrix must be 2x2, got {m.shape}")
        if not np.allclose(m.conj().T @ m, np.eye(2), atol=UNITARY_TOL):
            raise ValueError(f"gate {self.name!r} is not unitary")
        object.__setattr__(self, "matrix", m)


_SQ2 = 1.0 / math.sqrt(2.0)
IDENTITY = Gate("I", np.eye(2))
HADAMARD = Gate("H", np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]]))
PAULI_X = Gate("X", np.array([[0.0, 1.0], [1.0, 0.0]]))
PAULI_Z = Gate("Z", np.array([[1.0, 0.0], [0.0, -1.0]]))


@dataclass(frozen=True)
class StateVector:
    """Pure state over ``num_qubits`` labeled qubits (register indices 0..n-1)."""

    num_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError("state needs at least one qubit")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 1 << self.num_qubits:
            raise ValueError(
                f"expected {1 << self.num_qubits} amplitudes, got {amps.shape[0]}"
            )
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: sum |amp|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis_state(cls, bits: Sequence[int]) -> StateVector:
        """Computational basis state |bits[0] bits[1] ...> (qubit 0 leftmost)."""
        n = len(bits)
        amps = np.zeros(1 << n, dtype=complex)
        amps[_bits_to_index(bits)] = 1.0
        return cls(n, amps)

    @classmethod
    def qubit(cls, alpha: complex, beta: complex) -> StateVector:
        """Single-qubit state alpha|0> + beta|1>; (alpha, beta) must be normalized."""
        return cls(1, np.array([alpha, beta], dtype=complex))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape([2] * self.num_qubits)

    def _check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < self.num_qubits:
            raise IndexError(f"qubit {qubit} out of range for {self.num_qubits} qubits")


@dataclass(frozen=True)
class MeasurementRecord:
    """One projective measurement: which qubit, which basis, what came out."""

    qubit: int
    basis: Basis
    outcome: int
    probability: float


class RandomSource:
    """Deterministic stream of uniform reals; identical seed, identical stream."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be a non-negative integer")
        self.seed = seed
        self._gen = np.random.default_rng(seed)

    def random(self) -> float:
        """Next uniform real in [0, 1)."""
        return float(self._gen.random())

    def bit(self) -> int:
        """Next fair random bit, derived from the uniform stream."""
        return 1 if self.random() < 0.5 else 0


def _bits_to_index(bits: Sequence[int]) -> int:
    index = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bit values must be 0 or 1, got {b!r}")
        index = (index << 1) | b
    return index


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    """Joint register with a's qubits first (most significant index bits)."""
    return StateVector(a.num_qubits + b.num_qubits, np.kron(a.amplitudes, b.amplitudes))


def product_state(qubit_states: Sequence[Sequence[complex]]) -> StateVector:
    """Product state from per-qubit (alpha, beta) pairs, qubit 0 first."""
    amps = np.array([1.0], dtype=complex)
    for pair in qubit_states:
        amps = np.kron(amps, np.asarray(pair, dtype=complex).reshape(2))
    return StateVector(len(qubit_states), amps)


def apply_single(state: StateVector, qubit: int, gate: Gate) -> StateVector:
    """Apply a 2x2 gate to one qubit."""
    state._check_qubit(qubit)
    psi = np.moveaxis(state._tensor(), qubit, -1)
    psi = psi @ gate.matrix.T
    psi = np.moveaxis(psi, -1, qubit)
    return StateVector(state.num_qubits, psi.reshape(-1))


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Flip ``target`` on basis states where ``control`` is 1."""
    if control == target:
        raise ValueError("control and target must differ")
    state._check_qubit(control)
    state._check_qubit(target)
    psi = state._tensor().copy()
    n = state.num_qubits

    def block(c: int, t: int) -> tuple:
        idx: list = [slice(None)] * n
        idx[control], idx[target] = c, t
        return tuple(idx)

    psi[block(1, 0)], psi[block(1, 1)] = psi[block(1, 1)].copy(), psi[block(1, 0)].copy()
    return StateVector(n, psi.reshape(-1))


def _branch_probability(state: StateVector, qubit: int, outcome: int) -> float:
    psi = np.moveaxis(state._tensor(), qubit, 0)
    return float(np.sum(np.abs(psi[outcome]) ** 2))


def _project(state: StateVector, qubit: int, outcome: int) -> tuple[float, StateVector]:
    """Collapse ``qubit`` onto ``outcome``; errors on an impossible branch."""
    prob = _branch_probability(state, qubit, outcome)
    if prob <= _BRANCH_EPS:
        raise ValueError(
            f"zero-probability branch: qubit {qubit} -> {outcome} (p = {prob!r})"
        )
    psi = state._tensor().copy()
    idx: list = [slice(None)] * state.num_qubits
    idx[qubit] = 1 - outcome
    psi[tuple(idx)] = 0.0
    return prob, StateVector(state.num_qubits, psi.reshape(-1) / math.sqrt(prob))


def measure(
    state: StateVector, qubit: int, basis: Basis, rng: RandomSource
) -> tuple[MeasurementRecord, StateVector]:
    """Projective measurement of one qubit; the qubit stays in the register.

    Hadamard-basis measurement applies H to the qubit and then measures
    computationally; the returned post-state carries that H.
    """
    state._check_qubit(qubit)
    if basis is Basis.HADAMARD:
        state = apply_single(state, qubit, HADAMARD)
    p0 = _branch_probability(state, qubit, 0)
    outcome = 0 if rng.random() < p0 else 1
    # float noise can leave a ~1e-17 weight on a branch that is really
    # impossible; never sample it
    if (p0 if outcome == 0 else 1.0 - p0) <= _BRANCH_EPS:
        outcome = 1 - outcome
    prob, post = _project(state, qubit, outcome)
    return MeasurementRecord(qubit, basis, outcome, prob), post


def enumerate_branches(
    state: StateVector, qubits: Sequence[int], bases: Sequence[Basis]
) -> list[tuple[tuple[int, ...], float, StateVector]]:
    """All joint measurement branches over ``qubits``, zero-probability ones omitted.

    Returns (outcome bit-vector, probability, post-state) triples; the
    probabilities of the returned branches sum to 1.
    """
    if len(set(qubits)) != len(qubits):
        raise ValueError("qubits must be distinct")
    if len(bases) != len(qubits):
        raise ValueError("one basis per measured qubit required")
    branches: list[tuple[tuple[int, ...], float, StateVector]] = [((), 1.0, state)]
    for qubit, basis in zip(qubits, bases):
        expanded = []
        for outcomes, prob, st in branches:
            work = apply_single(st, qubit, HADAMARD) if basis is Basis.HADAMARD else st
            for outcome in (0, 1):
                p = _branch_probability(work, qubit, outcome)
                if p <= _BRANCH_EPS:
                    continue
                _, post = _project(work, qubit, outcome)
                expanded.append((outcomes + (outcome,), prob * p, post))
        branches = expanded
    return branches


def fidelity(state: StateVector, reference: StateVector) -> float:
    """Squared overlap |<reference|state>|^2."""
    if state.num_qubits != reference.num_qubits:
        raise ValueError(
            f"dimension mismatch: {state.num_qubits} vs {reference.num_qubits} qubits"
        )
    return float(abs(np.vdot(reference.amplitudes, state.amplitudes)) ** 2)


def marginal_distribution(
    state: StateVector, qubits: Sequence[int]
) -> dict[tuple[int, ...], float]:
    """Computational-basis outcome probabilities on a subset of qubits."""
    if len(set(qubits)) != len(qubits):
        raise ValueError("qubits must be distinct")
    for q in qubits:
        state._check_qubit(q)
    probs = (np.abs(state._tensor()) ** 2).astype(float)
    keep = list(qubits)
    drop = tuple(i for i in range(state.num_qubits) if i not in keep)
    if drop:
        probs = probs.sum(axis=drop)
    # remaining axes are the kept qubits in register order; reorder as requested
    order = [sorted(keep).index(q) for q in keep]
    probs = probs.transpose(order)
    table: dict[tuple[int, ...], float] = {}
    for flat_index, p in enumerate(probs.reshape(-1)):
        bits = tuple((flat_index >> (len(keep) - 1 - k)) & 1 for k in range(len(keep)))
        table[bits] = float(p)
    return table


def haar_qubit(rng: RandomSource) -> StateVector:
    """Single-qubit state drawn uniformly from the Bloch sphere."""
    cos_theta = 2.0 * rng.random() - 1.0
    phi = 2.0 * math.pi * rng.random()
    half = 0.5 * math.acos(cos_theta)
    return StateVector.qubit(math.cos(half), np.exp(1j * phi) * math.sin(half))
