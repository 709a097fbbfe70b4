"""Leave-one-out ranking metrics and full-model evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .data import (
    InteractionDataset,
    SplitView,
    leave_one_out_split,
    make_batches,
    sparsity_buckets,
)
from .errors import ConfigError

# evaluation is deterministic: batches in ascending user order, ties by item id


@dataclass
class MetricsReport:
    """HR@K and NDCG@K keyed by K, plus optional per-length-bucket reports."""

    hr: Dict[int, float]
    ndcg: Dict[int, float]
    user_count: int
    bucket_reports: Optional[Dict[Tuple[int, int], "MetricsReport"]] = None

    def to_lines(self, prefix: str = "") -> List[str]:
        lines = [f"{prefix}user_count {self.user_count}"]
        for k in sorted(self.hr):
            lines.append(f"{prefix}hr@{k} {self.hr[k]:.6f}")
        for k in sorted(self.ndcg):
            lines.append(f"{prefix}ndcg@{k} {self.ndcg[k]:.6f}")
        if self.bucket_reports:
            total = max(self.user_count, 1)
            for (lo, hi), sub in sorted(self.bucket_reports.items()):
                head = f"{prefix}bucket[{lo},{hi}]."
                lines.append(f"{head}share {sub.user_count / total:.4f}")
                lines.extend(sub.to_lines(prefix=head))
        return lines

    def __str__(self) -> str:
        return "\n".join(self.to_lines())


def rank_of_target(scores: np.ndarray, target: int) -> int:
    """1-based rank of `target` among items 1..V, ties won by smaller id.

    `scores[k]` is the score of item id k+1 (padding excluded by layout).
    """
    scores = np.asarray(scores)
    if scores.ndim != 1:
        raise ConfigError(f"scores must be a vector over items, got shape {scores.shape}")
    if target < 1 or target > scores.shape[0]:
        raise ValueError(f"target id {target} outside the ranked item range 1..{scores.shape[0]}")
    s = scores[target - 1]
    greater = int((scores > s).sum())
    tied_before = int((scores[: target - 1] == s).sum())
    return 1 + greater + tied_before


def hr_at_k(ranks: Sequence[int], k: int) -> float:
    """Fraction of ranks within the top k."""
    ranks = np.asarray(ranks)
    if ranks.size == 0:
        raise ValueError("hr_at_k: empty rank list")
    return float((ranks <= k).mean())


def ndcg_at_k(ranks: Sequence[int], k: int) -> float:
    """Mean of 1/log2(rank+1) for ranks within k, else 0 (single relevant item)."""
    ranks = np.asarray(ranks, dtype=np.float64)
    if ranks.size == 0:
        raise ValueError("ndcg_at_k: empty rank list")
    gains = np.where(ranks <= k, 1.0 / np.log2(ranks + 1.0), 0.0)
    return float(gains.mean())


def _collect_ranks(model, view: SplitView, batch_size: int) -> Dict[int, int]:
    """Per-user rank of the held-out target, batches in fixed user order."""
    ranks: Dict[int, int] = {}
    for batch in make_batches(view, batch_size, model.config.max_len, shuffle=False):
        scores = model.predict_scores(batch.input_ids)
        for row, user in enumerate(batch.user_ids):
            target = int(batch.target_ids[row][batch.valid_mask[row]][-1])
            ranks[user] = rank_of_target(scores[row], target)
    return ranks


def report_from_ranks(ranks: Sequence[int], k_values: Sequence[int]) -> MetricsReport:
    return MetricsReport(
        hr={k: hr_at_k(ranks, k) for k in k_values},
        ndcg={k: ndcg_at_k(ranks, k) for k in k_values},
        user_count=len(ranks),
    )


def evaluate(
    model,
    view: SplitView,
    k_values: Sequence[int] = (10, 20),
    batch_size: int = 64,
    dataset: Optional[InteractionDataset] = None,
    buckets: Optional[Sequence[Tuple[int, int]]] = None,
) -> MetricsReport:
    """Rank each user's held-out target against all non-padding items.

    Scores come from the final sequence position. Items already seen in
    the user's history stay in the candidate set. With `buckets` (and the
    backing dataset) the report also breaks users out by raw history
    length.
    """
    if view.user_count == 0:
        raise ValueError(f"evaluate: view {view.name!r} is empty")
    per_user = _collect_ranks(model, view, batch_size)
    report = report_from_ranks(list(per_user.values()), k_values)
    if buckets:
        if dataset is None:
            raise ConfigError("bucket breakdown requires the backing dataset")
        groups = sparsity_buckets(dataset, buckets)
        report.bucket_reports = {}
        for bucket, users in groups.items():
            bucket_ranks = [per_user[u] for u in users if u in per_user]
            if bucket_ranks:
                report.bucket_reports[bucket] = report_from_ranks(bucket_ranks, k_values)
            else:
                report.bucket_reports[bucket] = MetricsReport(
                    hr={k: 0.0 for k in k_values},
                    ndcg={k: 0.0 for k in k_values},
                    user_count=0,
                )
    return report


def run_ablation(config, spec, dataset: InteractionDataset) -> MetricsReport:
    """Train under the given switches and report test metrics."""
    from .training import train  # local import to avoid a cycle

    model, _ = train(config, dataset, ablation=spec)
    _, _, test_view = leave_one_out_split(dataset)
    return evaluate(model, test_view, config.eval_k, config.batch_size)
