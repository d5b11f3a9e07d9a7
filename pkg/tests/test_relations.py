import numpy as np
import pytest

from mlclearn.errors import InvalidInputError
from mlclearn.losses import BaseLoss
from mlclearn.relations import (
    ALL_LINKS,
    FuzzConfig,
    RelationCase,
    check_all,
    check_hamming_ranking,
    check_hamming_subset,
    check_subset_ranking,
    fuzz_campaign,
    replay_case,
    _link_slacks,
)

HINGE = BaseLoss.hinge()


def case_of(f, y, loss=HINGE):
    return RelationCase(np.asarray(f, float), np.asarray(y, float), loss)


class TestRelationCase:
    def test_cached_values_match_direct_recomputation(self):
        case = case_of([0.5, 0.7, 0.1], [1, -1, -1])
        assert case.ranking01 == 0.5
        assert np.array_equal(case.sign_pred, [1.0, 1.0, 1.0])
        assert case.hamming01 == pytest.approx(2.0 / 3.0)
        assert case.subset01 == 1.0
        assert case.oracle_hamming01 == pytest.approx(1.0 / 3.0)
        assert case.n_pos == 1 and case.n_neg == 2

    def test_round_trip_dict(self):
        case = case_of([0.25, -1.5], [1, -1])
        again = RelationCase.from_dict(case.to_dict())
        assert np.array_equal(again.scores, case.scores)
        assert np.array_equal(again.labels, case.labels)
        assert again.base_loss == case.base_loss


class TestCheckers:
    def test_perfect_prediction_all_lhs_zero(self):
        case = case_of([2.0, -2.0, 3.0], [1, -1, 1])
        for verdict in check_all(case):
            assert verdict.lhs == 0.0
            assert verdict.holds
            assert verdict.slack == verdict.rhs

    def test_single_mismatch_is_tight_on_subset_vs_c_hamming(self):
        # exactly one wrong label: subset01 = 1 = c * hamming01
        case = case_of([2.0, -0.5, -2.0], [1, 1, -1])
        verdicts = {v.inequality_id: v for v in check_hamming_subset(case)}
        v = verdicts["subset01<=c*hamming01"]
        assert v.lhs == 1.0 and v.rhs == pytest.approx(1.0)
        assert v.slack == pytest.approx(0.0)

    def test_worked_ranking_chain(self):
        case = case_of([0.5, 0.7, 0.1], [1, -1, -1])
        verdicts = {v.inequality_id: v for v in check_hamming_ranking(case)}
        assert verdicts["ranking01<=c*hamming01"].lhs == 0.5
        assert verdicts["ranking01<=c*hamming01"].rhs == pytest.approx(2.0)
        assert verdicts["oracle_hamming01<=c*ranking01"].lhs == pytest.approx(1.0 / 3.0)
        assert verdicts["oracle_hamming01<=c*ranking01"].rhs == pytest.approx(1.5)
        assert all(v.holds for v in verdicts.values())

    def test_cardinality_ratio_constant_is_tight_for_witness(self):
        # one positive scored below every negative: ranking01 = 1 and
        # (c/min) * hamming01 = 3 * (1/3) = 1
        case = case_of([-1.0, -0.5, -0.7], [1, -1, -1])
        verdicts = {v.inequality_id: v for v in check_hamming_ranking(case)}
        v = verdicts["ranking01<=(c/min_cardinality)*hamming01"]
        assert v.lhs == 1.0
        assert v.rhs == pytest.approx(1.0)
        assert v.slack == pytest.approx(0.0)

    def test_degenerate_skips_ranking_chains_only(self):
        case = case_of([0.3, 0.4], [1, 1])
        assert check_hamming_ranking(case) == []
        assert check_subset_ranking(case) == []
        assert len(check_hamming_subset(case)) == 4

    def test_subset_ranking_small_c_enumeration(self):
        # single violated pair at c = 2
        case = case_of([0.1, 0.5], [1, -1])
        verdicts = {v.inequality_id: v for v in check_subset_ranking(case)}
        assert case.ranking01 == 1.0
        v = verdicts["oracle_subset01<=c^2*ranking01"]
        assert v.rhs == 4.0 and v.lhs in (0.0, 1.0)
        assert all(v.holds for v in verdicts.values())

    def test_score_ties_count_as_ranking_violations(self):
        case = case_of([0.0, 0.0], [1, -1])
        assert case.ranking01 == 1.0

    def test_natural_log_logistic_rejected_by_default(self):
        case = case_of([0.5, -0.5], [1, -1], BaseLoss.logistic_ln())
        with pytest.raises(InvalidInputError):
            check_hamming_subset(case)
        assert check_hamming_subset(case, allow_non_dominating=True)

    def test_base2_logistic_accepted(self):
        case = case_of([0.5, -0.5], [1, -1], BaseLoss.logistic_log2())
        assert all(v.holds for v in check_all(case))


class TestBatchEngineAgreement:
    def test_matches_per_case_checkers(self):
        rng = np.random.Generator(np.random.PCG64(31))
        for c in (1, 2, 3, 6):
            F = rng.standard_normal((64, c))
            Y = np.where(rng.random((64, c)) < 0.5, 1.0, -1.0)
            slacks = _link_slacks(F, Y, HINGE)
            for i in range(64):
                case = RelationCase(F[i], Y[i], HINGE)
                expected = {v.inequality_id: v.slack for v in check_all(case)}
                for link in ALL_LINKS:
                    if link in expected:
                        assert slacks[link][i] == pytest.approx(
                            expected[link], abs=1e-12
                        ), (link, i)
                    else:
                        assert np.isnan(slacks[link][i])


class TestCampaign:
    def test_zero_violations_mixed(self):
        summary = fuzz_campaign(FuzzConfig(cases=200_000, seed=7))
        assert summary.total_violations == 0
        assert summary.failures == []
        assert summary.cases == 200_000
        assert summary.degenerate > 0
        for link, slack in summary.min_slack.items():
            if slack is not None:
                assert slack >= -1e-9, link

    def test_zero_violations_log2(self):
        cfg = FuzzConfig(cases=50_000, seed=3, base_loss=BaseLoss.logistic_log2())
        assert fuzz_campaign(cfg).total_violations == 0

    def test_adversarial_grid_only(self):
        cfg = FuzzConfig(cases=50_000, seed=11, score_dist="adversarial")
        summary = fuzz_campaign(cfg)
        assert summary.total_violations == 0

    def test_seed_determinism_and_worker_independence(self):
        cfg = FuzzConfig(cases=120_000, seed=42)
        a = fuzz_campaign(cfg, workers=1)
        b = fuzz_campaign(cfg, workers=4)
        assert a.to_json() == b.to_json()
        c = fuzz_campaign(FuzzConfig(cases=120_000, seed=43), workers=1)
        assert a.to_json() != c.to_json()

    def test_single_label_space(self):
        cfg = FuzzConfig(cases=5_000, c_min=1, c_max=1, seed=0)
        summary = fuzz_campaign(cfg)
        assert summary.degenerate == 5_000  # every c=1 case lacks one side
        assert summary.total_violations == 0
        assert summary.min_slack["ranking01<=c*hamming01"] is None

    def test_rejects_natural_log_without_override(self):
        with pytest.raises(InvalidInputError):
            FuzzConfig(cases=10, base_loss=BaseLoss.logistic_ln())
        cfg = FuzzConfig(
            cases=10, base_loss=BaseLoss.logistic_ln(), allow_non_dominating=True
        )
        fuzz_campaign(cfg)  # allowed explicitly; may or may not violate


class TestReplay:
    def test_replay_round_trip(self):
        payload = {"scores": [0.5, 0.7, 0.1], "labels": [1, -1, -1], "base_loss": "hinge"}
        verdicts = replay_case(payload)
        assert len(verdicts) == 14  # 4 + 6 + 4 links
        assert all(v.holds for v in verdicts)
