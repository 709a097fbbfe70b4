"""Ranking metrics against brute-force oracles, evaluate() end to end."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from freqrec import (
    AblationSpec,
    evaluate,
    generate_synthetic,
    hr_at_k,
    leave_one_out_split,
    ndcg_at_k,
    rank_of_target,
)
from freqrec.errors import ConfigError
from freqrec.evaluation import MetricsReport, report_from_ranks


class FakeModel:
    """Just enough surface for evaluate(): a config window and a scorer."""

    def __init__(self, score_fn, max_len=10, item_count=20):
        self.score_fn = score_fn
        self.item_count = item_count

        class _Cfg:
            pass

        self.config = _Cfg()
        self.config.max_len = max_len

    def predict_scores(self, input_ids):
        return np.stack([self.score_fn(row) for row in input_ids])


def test_rank_basic_cases():
    scores = np.array([0.1, 0.9, 0.3])
    assert rank_of_target(scores, 2) == 1
    assert rank_of_target(np.zeros(5), 1) == 1  # tie broken toward the smallest id
    assert rank_of_target(np.zeros(5), 3) == 3
    with pytest.raises(ValueError):
        rank_of_target(scores, 0)  # the padding id is never ranked


@settings(deadline=None, max_examples=60)
@given(
    item_count=st.integers(min_value=1, max_value=1000),
    seed=st.integers(0, 2**31),
)
def test_rank_matches_sort_oracle(item_count, seed):
    rng = np.random.default_rng(seed)
    scores = np.round(rng.normal(size=item_count), 2)  # rounding forces ties
    target = int(rng.integers(1, item_count + 1))
    assert rank_of_target(scores, target) == oracles.rank_loop(scores, target)


def test_hr_cases():
    assert hr_at_k([1, 1, 1], 10) == 1.0
    assert hr_at_k([11, 30], 10) == 0.0
    assert hr_at_k([1, 15, 3], 10) == pytest.approx(2 / 3)


def test_ndcg_cases():
    assert ndcg_at_k([1], 10) == 1.0
    assert ndcg_at_k([3], 10) == pytest.approx(0.5)  # 1/log2(4)
    assert ndcg_at_k([1, 3], 10) == pytest.approx(0.75)
    assert ndcg_at_k([3], 2) == 0.0


def test_report_invariants_ndcg_below_hr_and_monotone_k():
    rng = np.random.default_rng(0)
    ranks = rng.integers(1, 40, size=25)
    report = report_from_ranks(list(ranks), (5, 10, 20))
    for k in (5, 10, 20):
        assert report.ndcg[k] <= report.hr[k] + 1e-12
    assert report.hr[5] <= report.hr[10] <= report.hr[20]
    assert report.ndcg[5] <= report.ndcg[10] <= report.ndcg[20]


def test_oracle_scorer_reaches_perfect_hr1():
    ds = generate_synthetic(4, 24, 12, 0.0, np.random.default_rng(1))
    successor = {}
    start = 1
    for cycle in range(4):
        period = 3 + (cycle % 3)
        for offset in range(period):
            successor[start + offset] = start + (offset + 1) % period
        start += period

    def perfect(row):
        scores = np.zeros(ds.item_count)
        last = int(row[row != 0][-1])
        scores[successor[last] - 1] = 1.0
        return scores

    model = FakeModel(perfect, max_len=12, item_count=ds.item_count)
    _, _, test_view = leave_one_out_split(ds)
    report = evaluate(model, test_view, (1, 10), batch_size=8)
    assert report.hr[1] == 1.0
    assert report.ndcg[1] == 1.0


def test_equal_scores_follow_tie_rule():
    ds = generate_synthetic(3, 10, 8, 0.0, np.random.default_rng(2))
    model = FakeModel(lambda row: np.zeros(ds.item_count), max_len=8, item_count=ds.item_count)
    _, _, test_view = leave_one_out_split(ds)
    report = evaluate(model, test_view, (10,), batch_size=4)
    targets = [test_view.rows[u][1][0] for u in sorted(test_view.rows)]
    expected = [oracles.rank_loop(np.zeros(ds.item_count), t) for t in targets]
    assert report.hr[10] == pytest.approx(np.mean([r <= 10 for r in expected]))


def test_full_report_matches_brute_force():
    from freqrec.data import InteractionDataset

    rng = np.random.default_rng(3)
    # five users with pairwise-distinct histories over 20 items
    ds = InteractionDataset(
        {u: [u, u + 5, u + 10, u + 3, u + 7] for u in range(1, 6)}, item_count=20
    ).validate()
    fixed = {u: rng.normal(size=20) for u in ds.users()}
    _, _, test_view = leave_one_out_split(ds)

    row_to_user = {tuple(v[0][-6:]): u for u, v in test_view.rows.items()}

    def scorer(row):
        history = tuple(int(v) for v in row[row != 0])
        return fixed[row_to_user[history]]

    model = FakeModel(scorer, max_len=6, item_count=20)
    report = evaluate(model, test_view, (5, 10), batch_size=2)
    ranks = []
    for u in sorted(test_view.rows):
        target = test_view.rows[u][1][0]
        ranks.append(oracles.rank_loop(fixed[u], target))
    for k in (5, 10):
        assert report.hr[k] == pytest.approx(np.mean([r <= k for r in ranks]))
        expected_ndcg = np.mean([1.0 / np.log2(r + 1) if r <= k else 0.0 for r in ranks])
        assert report.ndcg[k] == pytest.approx(expected_ndcg)


def test_bucket_breakdown():
    sequences = {1: [1, 2, 3], 2: [1, 2, 3, 1, 2], 3: [2, 3, 1, 2, 3, 1, 2]}
    from freqrec.data import InteractionDataset

    ds = InteractionDataset(sequences, item_count=3).validate()
    model = FakeModel(lambda row: np.zeros(3), max_len=6, item_count=3)
    _, _, test_view = leave_one_out_split(ds)
    report = evaluate(
        model, test_view, (2,), batch_size=2, dataset=ds, buckets=[(3, 4), (5, 6)]
    )
    assert report.bucket_reports is not None
    assert report.bucket_reports[(3, 4)].user_count == 1
    assert report.bucket_reports[(5, 6)].user_count == 1  # user 3 is unbucketed
    lines = report.to_lines()
    assert "bucket[3,4].share 0.3333" in lines


def test_evaluate_rejects_empty_view():
    from freqrec.data import SplitView

    model = FakeModel(lambda row: np.zeros(3), max_len=4)
    with pytest.raises(ValueError, match="empty"):
        evaluate(model, SplitView("test", {}), (10,), 4)


def test_report_serialization_is_machine_parsable():
    report = MetricsReport(hr={10: 0.5}, ndcg={10: 0.25}, user_count=4)
    lines = report.to_lines()
    assert "hr@10 0.500000" in lines
    assert "ndcg@10 0.250000" in lines
    parsed = dict(line.rsplit(" ", 1) for line in lines)
    assert float(parsed["hr@10"]) == 0.5


def test_ablation_spec_validation():
    with pytest.raises(ConfigError):
        AblationSpec(disable_freq_loss=True, disable_ce_loss=True).validate()
    spec = AblationSpec.from_names(["gsa", "lsr"])
    assert spec.disable_gsa and spec.disable_lsr and not spec.disable_sa
    with pytest.raises(ConfigError):
        AblationSpec.from_names(["warp"])
