"""Session driver and batch experiments over the slot protocols.

A session is a seeded sequence of trials; each trial regenerates fresh GHZ
and leader-aware resources for every slot of a configurable uplink/downlink
pattern and appends one structured trace record per slot. Trials use
derived seeds (seed XOR trial index), so they can run in parallel while the
merged trace stays byte-identical to a serial run.

Also here: the exhaustive branch enumerator, which walks every measurement
branch of a slot using only the simulator primitives. It is the oracle the
sampled protocol path is verified against (delivery fidelity on every
branch, and winner-identity posteriors for the anonymity checks).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

from scipy import stats as _scipy_stats

from .circuits import LeaderAwareLayout, prepare_ghz, prepare_leader_aware
from .extraction import apply_up, build_p_sequence
from .protocol import (
    ProtocolError,
    SlotReport,
    SlotType,
    contend,
    decode_ancilla,
    run_downlink_slot,
    run_uplink_slot,
    teleport_receive,
)
from .statevector import (
    Basis,
    HADAMARD,
    RandomSource,
    StateVector,
    apply_cnot,
    apply_single,
    enumerate_branches,
    fidelity,
    product_state,
    tensor_product,
)

DEFAULT_SLOT_PATTERN = (SlotType.DOWNLINK, SlotType.UPLINK)

# Generic probe payload for exhaustive checks: unequal magnitudes catch bit
# flips, the complex phase catches sign errors.
_PROBE_PAYLOAD = StateVector.qubit(0.6, 0.8j)


class PayloadPolicy(Enum):
    HAAR_RANDOM = "haar"
    FIXED_BASIS = "basis"


@dataclass(frozen=True)
class SessionConfig:
    n: int
    seed: int
    slots: tuple[SlotType, ...] = DEFAULT_SLOT_PATTERN
    trials: int = 1
    payload_policy: PayloadPolicy = PayloadPolicy.HAAR_RANDOM

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one end-node")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if not self.slots:
            raise ValueError("slot pattern must not be empty")


@dataclass
class SessionStats:
    """Aggregates over one session's trace."""

    n: int
    trials: int
    slot_counts: dict[str, int]
    winner_hist: dict[str, dict[int, int]]
    chi_square: dict[str, tuple[float, float] | None]
    fidelity_min: float
    fidelity_mean: float
    fidelity_max: float
    classical_bits: dict[str, int]
    traffic_uniform: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "slot_counts": self.slot_counts,
            "winner_hist": {
                st: {str(k): v for k, v in hist.items()}
                for st, hist in self.winner_hist.items()
            },
            "chi_square": {
                st: None if cs is None else {"stat": cs[0], "p_value": cs[1]}
                for st, cs in self.chi_square.items()
            },
            "fidelity": {
                "min": self.fidelity_min,
                "mean": self.fidelity_mean,
                "max": self.fidelity_max,
            },
            "classical_bits": self.classical_bits,
            "traffic_uniform": self.traffic_uniform,
        }


def _fixed_payloads(n: int) -> list[StateVector]:
    return [StateVector.qubit(0.0, 1.0) for _ in range(n)]


def _run_trial(config: SessionConfig, trial: int) -> list[dict]:
    rng = RandomSource(config.seed ^ trial)
    payloads = None
    if config.payload_policy is PayloadPolicy.FIXED_BASIS:
        payloads = _fixed_payloads(config.n)
    records = []
    base = trial * len(config.slots)
    for k, slot_type in enumerate(config.slots):
        if slot_type is SlotType.UPLINK:
            report = run_uplink_slot(config.n, payloads, rng)
        else:
            report = run_downlink_slot(config.n, payloads, rng)
        records.append(report.to_record(base + k))
    return records


def _trial_worker(args: tuple[SessionConfig, int]) -> list[dict]:
    return _run_trial(*args)


def run_session(config: SessionConfig, jobs: int = 1) -> tuple[SessionStats, list[dict]]:
    """Run the configured trials and return (stats, trace records).

    ``jobs`` > 1 distributes trials over processes; the trace is merged in
    trial order, so the output does not depend on the worker count.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    trial_args = [(config, t) for t in range(config.trials)]
    if jobs == 1 or config.trials == 1:
        per_trial = [_run_trial(*a) for a in trial_args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_trial = list(pool.map(_trial_worker, trial_args))
    records = [rec for chunk in per_trial for rec in chunk]
    return _aggregate(config, records), records


def _record_bits(record: dict) -> int:
    return sum(2 if m["type"] == "report" else 3 for m in record["messages"])


def _record_shape(record: dict) -> tuple:
    return tuple((m["from"], m["to"], m["type"]) for m in record["messages"])


def _aggregate(config: SessionConfig, records: list[dict]) -> SessionStats:
    slot_types = [st.value for st in dict.fromkeys(config.slots)]
    winner_hist = {st: {node: 0 for node in range(1, config.n + 1)} for st in slot_types}
    slot_counts = {st: 0 for st in slot_types}
    bits: dict[str, set[int]] = {st: set() for st in slot_types}
    shapes: dict[str, set[tuple]] = {st: set() for st in slot_types}
    fidelities = []
    for rec in records:
        st = rec["slot_type"]
        slot_counts[st] += 1
        winner_hist[st][rec["winner"]] += 1
        bits[st].add(_record_bits(rec))
        shapes[st].add(_record_shape(rec))
        fidelities.append(rec["fidelity"])

    chi_square: dict[str, tuple[float, float] | None] = {}
    for st in slot_types:
        counts = list(winner_hist[st].values())
        if config.n < 2 or slot_counts[st] == 0:
            chi_square[st] = None
        else:
            stat, p = _scipy_stats.chisquare(counts)
            chi_square[st] = (float(stat), float(p))

    classical_bits = {}
    for st in slot_types:
        if len(bits[st]) > 1:
            raise ProtocolError(f"classical bit budget varied across {st} slots: {bits[st]}")
        classical_bits[st] = bits[st].pop() if bits[st] else 0

    return SessionStats(
        n=config.n,
        trials=config.trials,
        slot_counts=slot_counts,
        winner_hist=winner_hist,
        chi_square=chi_square,
        fidelity_min=min(fidelities),
        fidelity_mean=sum(fidelities) / len(fidelities),
        fidelity_max=max(fidelities),
        classical_bits=classical_bits,
        traffic_uniform=all(len(s) <= 1 for s in shapes.values()),
    )


@dataclass(frozen=True)
class FairnessResult:
    n: int
    trials: int
    seed: int
    histogram: dict[int, int]
    chi_square: float
    p_value: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "histogram": {str(k): v for k, v in self.histogram.items()},
            "chi_square": self.chi_square,
            "p_value": self.p_value,
        }


def _contention_winner(args: tuple[int, int]) -> int:
    n, trial_seed = args
    winner, _, _ = contend(prepare_leader_aware(n), RandomSource(trial_seed))
    return winner


def fairness_experiment(n: int, trials: int, seed: int, jobs: int = 1) -> FairnessResult:
    """Repeated contention; chi-square of the winner histogram against uniform.

    Trials use derived seeds (seed XOR trial index), so the histogram does
    not depend on ``jobs``.
    """
    if n < 2:
        raise ValueError("fairness needs at least two contending end-nodes")
    if trials < 1:
        raise ValueError("need at least one trial")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    trial_args = [(n, seed ^ trial) for trial in range(trials)]
    if jobs == 1:
        winners = [_contention_winner(a) for a in trial_args]
    else:
        chunk = max(1, trials // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            winners = list(pool.map(_contention_winner, trial_args, chunksize=chunk))
    histogram = {node: 0 for node in range(1, n + 1)}
    for winner in winners:
        histogram[winner] += 1
    stat, p = _scipy_stats.chisquare(list(histogram.values()))
    return FairnessResult(n, trials, seed, histogram, float(stat), float(p))


@dataclass(frozen=True)
class SlotBranch:
    """One complete measurement branch of a slot, with its joint probability."""

    probability: float
    winner: int
    w_outcomes: tuple[int, ...]
    ancilla: tuple[int, ...]
    loser_outcomes: dict[int, int]
    parity: int
    q_star: int
    g_star: int
    delivered_fidelity: float


def enumerate_slot_branches(
    n: int, slot_type: SlotType, payload: StateVector | None = None
) -> list[SlotBranch]:
    """Walk every measurement branch of one slot; probabilities sum to 1.

    Built from the simulator primitives only (branch enumeration, the
    per-node extraction unitaries, and the receiver correction rule), so it
    serves as an independent oracle for the sampled slot runs.
    """
    if payload is None:
        payload = _PROBE_PAYLOAD
    layout = LeaderAwareLayout(n)
    comp = Basis.COMPUTATIONAL
    branches: list[SlotBranch] = []
    lam = prepare_leader_aware(n)
    for w_out, w_prob, lam_post in enumerate_branches(
        lam, layout.w_qubits, [comp] * n
    ):
        winners = [i + 1 for i, w in enumerate(w_out) if w == 1]
        if len(winners) != 1:
            raise ProtocolError(f"non one-hot contention branch: {w_out}")
        winner = winners[0]
        for anc, anc_prob, _ in enumerate_branches(
            lam_post, layout.ancilla_qubits, [comp] * layout.m
        ):
            if decode_ancilla(anc, n) != winner:
                raise ProtocolError(f"ancilla branch {anc} does not name winner {winner}")
            pseq = build_p_sequence(winner, n)
            worked = apply_up(prepare_ghz(n + 1), pseq)
            send_qubit = winner if slot_type is SlotType.UPLINK else 0
            recv_qubit = 0 if slot_type is SlotType.UPLINK else winner
            losers = pseq.losers
            for g_out, g_prob, ghz_post in enumerate_branches(
                worked, losers, [comp] * len(losers)
            ):
                g_map = dict(zip(losers, g_out))
                parity = 0
                for g in g_out:
                    parity ^= g
                joint = tensor_product(ghz_post, payload)
                joint = apply_cnot(joint, n + 1, send_qubit)
                joint = apply_single(joint, n + 1, HADAMARD)
                for (q_star, g_star), t_prob, post in enumerate_branches(
                    joint, [n + 1, send_qubit], [comp, comp]
                ):
                    final = teleport_receive(post, recv_qubit, q_star, g_star, parity)
                    pinned = dict(g_map)
                    pinned[send_qubit] = g_star
                    pinned[n + 1] = q_star
                    vectors = [
                        payload.amplitudes if q == recv_qubit
                        else ((1.0, 0.0) if pinned[q] == 0 else (0.0, 1.0))
                        for q in range(n + 2)
                    ]
                    delivered = fidelity(final, product_state(vectors))
                    branches.append(
                        SlotBranch(
                            probability=w_prob * anc_prob * g_prob * t_prob,
                            winner=winner,
                            w_outcomes=w_out,
                            ancilla=anc,
                            loser_outcomes=g_map,
                            parity=parity,
                            q_star=q_star,
                            g_star=g_star,
                            delivered_fidelity=delivered,
                        )
                    )
    return branches


@dataclass(frozen=True)
class SlotAnonymity:
    slot_type: SlotType
    max_deviation: float
    view_count: int
    vacuous: bool


@dataclass(frozen=True)
class AnonymityReport:
    n: int
    per_slot: dict[SlotType, SlotAnonymity]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "results": {
                st.value: {
                    "max_deviation": sa.max_deviation,
                    "views": sa.view_count,
                    "vacuous": sa.vacuous,
                }
                for st, sa in self.per_slot.items()
            },
        }


def anonymity_experiment(n: int) -> AnonymityReport:
    """Exhaustively check that no loser's local view leaks the winner identity.

    For every loser node and every complete local view it can observe (its
    own contention outcome, its extraction bit, the dummy it sent, and the
    downlink broadcast when present), the posterior over the winner must be
    uniform across the other end-nodes. Reports the largest deviation found.
    """
    if n < 1:
        raise ValueError("need at least one end-node")
    if n > 4:
        raise ValueError("exhaustive anonymity enumeration is limited to n <= 4")
    per_slot: dict[SlotType, SlotAnonymity] = {}
    for slot_type in (SlotType.UPLINK, SlotType.DOWNLINK):
        joint: dict[tuple, dict[int, float]] = {}
        for branch in enumerate_slot_branches(n, slot_type):
            for loser, g_l in branch.loser_outcomes.items():
                for dummy in (0, 1):
                    if slot_type is SlotType.UPLINK:
                        view = (loser, g_l, dummy)
                    else:
                        view = (
                            loser,
                            g_l,
                            dummy,
                            branch.q_star,
                            branch.g_star,
                            branch.parity,
                        )
                    dist = joint.setdefault(view, {})
                    dist[branch.winner] = (
                        dist.get(branch.winner, 0.0) + 0.5 * branch.probability
                    )
        max_dev = 0.0
        for view, dist in joint.items():
            loser = view[0]
            total = sum(dist.values())
            candidates = [k for k in range(1, n + 1) if k != loser]
            for k in candidates:
                posterior = dist.get(k, 0.0) / total
                max_dev = max(max_dev, abs(posterior - 1.0 / len(candidates)))
        per_slot[slot_type] = SlotAnonymity(
            slot_type=slot_type,
            max_deviation=max_dev,
            view_count=len(joint),
            vacuous=n <= 2,
        )
    return AnonymityReport(n=n, per_slot=per_slot)


def collect_traffic_shapes(
    n: int, slot_type: SlotType, max_seeds: int = 512
) -> dict[int, set[tuple]]:
    """Observed message shapes keyed by winner, scanning seeds until all n winners appear."""
    run = run_uplink_slot if slot_type is SlotType.UPLINK else run_downlink_slot
    shapes: dict[int, set[tuple]] = {}
    for seed in range(max_seeds):
        report: SlotReport = run(n, None, RandomSource(seed))
        shape = tuple(
            (m.sender, "broadcast" if m.recipient is None else m.recipient,
             m.payload.BIT_COUNT)
            for m in report.messages
        )
        shapes.setdefault(report.outcome.winner, set()).add(shape)
        if len(shapes) == n:
            break
    if len(shapes) < n:
        raise ProtocolError(
            f"not every winner appeared within {max_seeds} seeds (got {sorted(shapes)})"
        )
    return shapes
