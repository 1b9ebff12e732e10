"""Session driver, fairness and anonymity experiments, branch enumerator."""

import pytest
from scipy import stats as scipy_stats

import entaccess.protocol
from entaccess.protocol import SlotType
from entaccess.session import (
    PayloadPolicy,
    SessionConfig,
    anonymity_experiment,
    collect_traffic_shapes,
    enumerate_slot_branches,
    fairness_experiment,
    run_session,
)
from entaccess.statevector import RandomSource, haar_qubit


class TestSessionConfig:
    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError, match="trial"):
            SessionConfig(n=2, seed=0, trials=0)

    def test_rejects_zero_nodes(self):
        with pytest.raises(ValueError, match="end-node"):
            SessionConfig(n=0, seed=0)

    def test_rejects_empty_pattern(self):
        with pytest.raises(ValueError, match="pattern"):
            SessionConfig(n=2, seed=0, slots=())


class TestRunSession:
    def test_single_node_single_slot(self):
        config = SessionConfig(n=1, seed=0, slots=(SlotType.UPLINK,), trials=1)
        stats, records = run_session(config)
        assert len(records) == 1
        assert records[0]["winner"] == 1
        assert records[0]["fidelity"] >= 1.0 - 1e-10
        assert stats.winner_hist["uplink"][1] == 1
        assert stats.chi_square["uplink"] is None

    def test_histogram_totals_match_slot_counts(self):
        config = SessionConfig(n=3, seed=5, trials=40)
        stats, records = run_session(config)
        assert len(records) == 80
        for st in ("downlink", "uplink"):
            assert stats.slot_counts[st] == 40
            assert sum(stats.winner_hist[st].values()) == 40

    def test_deterministic_traces(self):
        config = SessionConfig(n=4, seed=9, trials=10)
        stats_a, records_a = run_session(config)
        stats_b, records_b = run_session(config)
        assert records_a == records_b
        assert stats_a == stats_b

    def test_trace_independent_of_job_count(self):
        config = SessionConfig(n=3, seed=2, trials=8)
        _, serial = run_session(config, jobs=1)
        _, parallel = run_session(config, jobs=4)
        assert serial == parallel

    def test_classical_bit_budget(self):
        config = SessionConfig(n=4, seed=1, trials=5)
        stats, _ = run_session(config)
        assert stats.classical_bits == {"downlink": 11, "uplink": 8}
        assert stats.traffic_uniform

    def test_fidelity_aggregates(self):
        config = SessionConfig(n=2, seed=3, trials=20)
        stats, _ = run_session(config)
        assert stats.fidelity_min >= 1.0 - 1e-10
        assert stats.fidelity_max <= 1.0 + 1e-10

    def test_fixed_basis_payload_policy(self):
        config = SessionConfig(
            n=2, seed=3, trials=5, payload_policy=PayloadPolicy.FIXED_BASIS
        )
        stats, _ = run_session(config)
        assert stats.fidelity_min >= 1.0 - 1e-10

    def test_winner_histograms_near_uniform(self):
        config = SessionConfig(n=4, seed=17, trials=500)
        stats, _ = run_session(config)
        for st in ("downlink", "uplink"):
            stat, p = stats.chi_square[st]
            assert p > 0.001

    def test_slot_records_numbered_in_trial_order(self):
        config = SessionConfig(n=2, seed=0, trials=3)
        _, records = run_session(config)
        assert [r["slot"] for r in records] == list(range(6))
        assert [r["slot_type"] for r in records[:2]] == ["downlink", "uplink"]

    def test_resources_regenerated_every_slot(self, monkeypatch):
        calls = {"ghz": 0, "leader_aware": 0}
        real_ghz = entaccess.protocol.prepare_ghz
        real_lam = entaccess.protocol.prepare_leader_aware

        def counting_ghz(q):
            calls["ghz"] += 1
            return real_ghz(q)

        def counting_lam(n):
            calls["leader_aware"] += 1
            return real_lam(n)

        monkeypatch.setattr(entaccess.protocol, "prepare_ghz", counting_ghz)
        monkeypatch.setattr(entaccess.protocol, "prepare_leader_aware", counting_lam)
        config = SessionConfig(n=2, seed=4, trials=3)
        run_session(config)
        assert calls == {"ghz": 6, "leader_aware": 6}

    def test_stats_to_dict_is_json_ready(self):
        import json

        config = SessionConfig(n=2, seed=7, trials=4)
        stats, _ = run_session(config)
        json.dumps(stats.to_dict())  # must not raise


class TestFairness:
    def test_two_nodes_within_three_sigma(self):
        result = fairness_experiment(2, 10_000, seed=0)
        sigma = (10_000 * 0.25) ** 0.5
        assert abs(result.histogram[1] - 5_000) < 3 * sigma

    def test_four_nodes_chi_square_below_099_quantile(self):
        result = fairness_experiment(4, 10_000, seed=1)
        assert result.chi_square < scipy_stats.chi2.ppf(0.99, df=3)
        assert result.p_value > 0.01

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            fairness_experiment(4, 0, seed=0)

    def test_single_node_rejected(self):
        with pytest.raises(ValueError):
            fairness_experiment(1, 100, seed=0)

    def test_histogram_sums_to_trials(self):
        result = fairness_experiment(3, 500, seed=2)
        assert sum(result.histogram.values()) == 500

    def test_histogram_independent_of_job_count(self):
        serial = fairness_experiment(3, 200, seed=6)
        parallel = fairness_experiment(3, 200, seed=6, jobs=4)
        assert serial == parallel


class TestEnumerator:
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("slot_type", [SlotType.UPLINK, SlotType.DOWNLINK])
    def test_probabilities_sum_to_one(self, n, slot_type):
        branches = enumerate_slot_branches(n, slot_type)
        assert sum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    @pytest.mark.parametrize("slot_type", [SlotType.UPLINK, SlotType.DOWNLINK])
    def test_every_branch_delivers(self, n, slot_type):
        for branch in enumerate_slot_branches(n, slot_type):
            assert branch.delivered_fidelity >= 1.0 - 1e-10

    def test_haar_payloads_also_deliver(self):
        payload = haar_qubit(RandomSource(31))
        for branch in enumerate_slot_branches(2, SlotType.UPLINK, payload):
            assert branch.delivered_fidelity >= 1.0 - 1e-10

    def test_covers_all_correction_combinations(self):
        combos = {
            (b.q_star, b.g_star, b.parity)
            for b in enumerate_slot_branches(3, SlotType.UPLINK)
        }
        assert len(combos) == 8

    def test_parity_matches_loser_outcomes(self):
        for branch in enumerate_slot_branches(4, SlotType.DOWNLINK):
            parity = 0
            for g in branch.loser_outcomes.values():
                parity ^= g
            assert parity == branch.parity


class TestAnonymity:
    def test_three_nodes_uniform_posterior(self):
        report = anonymity_experiment(3)
        for sa in report.per_slot.values():
            assert sa.max_deviation < 1e-10
            assert not sa.vacuous

    def test_four_nodes_uniform_posterior(self):
        report = anonymity_experiment(4)
        assert report.per_slot[SlotType.DOWNLINK].max_deviation < 1e-10
        assert report.per_slot[SlotType.UPLINK].max_deviation < 1e-10

    def test_two_nodes_flagged_vacuous(self):
        report = anonymity_experiment(2)
        for sa in report.per_slot.values():
            assert sa.vacuous
            assert sa.max_deviation < 1e-10  # uniform over the single candidate

    def test_large_n_rejected(self):
        with pytest.raises(ValueError, match="n <= 4"):
            anonymity_experiment(5)

    def test_report_serializes(self):
        doc = anonymity_experiment(3).to_dict()
        assert set(doc["results"]) == {"uplink", "downlink"}


class TestTrafficShapes:
    @pytest.mark.parametrize("slot_type", [SlotType.UPLINK, SlotType.DOWNLINK])
    def test_identical_across_winners(self, slot_type):
        shapes = collect_traffic_shapes(3, slot_type)
        assert set(shapes) == {1, 2, 3}
        distinct = {shape for per_winner in shapes.values() for shape in per_winner}
        assert len(distinct) == 1
