"""Training loop with early stopping, grid search, and loss grafting."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import AblationSpec, ModelConfig
from .data import InteractionDataset, leave_one_out_split, make_batches
from .errors import ConfigError
from .evaluation import MetricsReport, evaluate
from .model import FreqRec
from .optim import Adam


@dataclass
class EpochRecord:
    epoch: int
    ce: float
    lf: float
    total: float
    val_hr10: float
    val_ndcg10: float


@dataclass
class TrainLog:
    epochs: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    def best_metric(self) -> float:
        for record in self.epochs:
            if record.epoch == self.best_epoch:
                return record.val_ndcg10
        return float("-inf")


def _snapshot(model: FreqRec) -> Dict[str, np.ndarray]:
    return {name: p.data.copy() for name, p in model.parameters().items()}


def _restore(model: FreqRec, snapshot: Dict[str, np.ndarray]) -> None:
    for name, p in model.parameters().items():
        p.data[...] = snapshot[name]


def train(
    config: ModelConfig,
    dataset: InteractionDataset,
    ablation: Optional[AblationSpec] = None,
    verbose: bool = False,
) -> Tuple[FreqRec, TrainLog]:
    """Fit a model under the leave-one-out protocol.

    Each epoch shuffles the training batches, runs forward/backward/Adam,
    then scores validation NDCG@10; training stops once that metric has
    failed to improve for `patience` consecutive epochs, and the
    best-epoch parameters are restored.
    """
    config.validate()
    ablation = (ablation or AblationSpec()).validate()
    rng = np.random.default_rng(config.seed)
    model = FreqRec(config, dataset.item_count, rng=rng, ablation=ablation)
    model.zero_padding_row()
    optimizer = Adam(model.parameters(), lr=config.lr)
    train_view, valid_view, _ = leave_one_out_split(dataset)
    log = TrainLog()
    if config.max_epochs == 0:
        return model, log

    best_metric = float("-inf")
    best_params = _snapshot(model)
    streak = 0
    for epoch in range(1, config.max_epochs + 1):
        ce_sum = lf_sum = total_sum = 0.0
        batch_count = 0
        for batch in make_batches(
            train_view, config.batch_size, config.max_len, shuffle=True, rng=rng
        ):
            loss, ce_val, lf_val = model.batch_loss(
                batch.input_ids, batch.target_ids, batch.valid_mask, training=True, rng=rng
            )
            if not math.isfinite(loss.item()):
                raise FloatingPointError(
                    f"training diverged: non-finite loss at epoch {epoch}, "
                    f"batch {batch_count + 1}"
                )
            optimizer.zero_grad()
            loss.backward()
            if model.embedding.item_table.grad is not None:
                model.embedding.item_table.grad[0, :] = 0.0  # padding row stays frozen
            optimizer.step()
            model.zero_padding_row()
            ce_sum += ce_val
            lf_sum += lf_val
            total_sum += loss.item()
            batch_count += 1
        if batch_count == 0:
            raise ConfigError("no training batches: every user is too short to form pairs")

        val_report = evaluate(model, valid_view, (10,), config.batch_size)
        record = EpochRecord(
            epoch=epoch,
            ce=ce_sum / batch_count,
            lf=lf_sum / batch_count,
            total=total_sum / batch_count,
            val_hr10=val_report.hr[10],
            val_ndcg10=val_report.ndcg[10],
        )
        log.epochs.append(record)
        if verbose:
            print(
                f"epoch={record.epoch} ce={record.ce:.4f} lf={record.lf:.4f} "
                f"total={record.total:.4f} val_hr10={record.val_hr10:.4f} "
                f"val_ndcg10={record.val_ndcg10:.4f}"
            )
        if record.val_ndcg10 > best_metric:
            best_metric = record.val_ndcg10
            best_params = _snapshot(model)
            log.best_epoch = epoch
            streak = 0
        else:
            streak += 1
            if streak >= config.patience:
                log.stopped_early = True
                break

    _restore(model, best_params)
    return model, log


def grid_search(
    base: ModelConfig,
    grid: Dict[str, Sequence],
    dataset: InteractionDataset,
    verbose: bool = False,
) -> Tuple[ModelConfig, List[Dict[str, object]]]:
    """Exhaustive sweep over the Cartesian product of the given values.

    Every trial is an independent training run from the same seed; the
    winner is the configuration with the best validation NDCG@10.
    """
    known = set(ModelConfig.__dataclass_fields__)
    for key in grid:
        if key not in known:
            raise ConfigError(f"unknown grid parameter {key!r}")
    names = sorted(grid)
    results: List[Dict[str, object]] = []
    best_config = None
    best_metric = float("-inf")
    for combo in itertools.product(*(grid[name] for name in names)):
        overrides = dict(zip(names, combo))
        trial_config = base.replace(**overrides)
        _, log = train(trial_config, dataset)
        metric = log.best_metric()
        row: Dict[str, object] = dict(overrides)
        row["val_ndcg10"] = metric
        row["best_epoch"] = log.best_epoch
        results.append(row)
        if verbose:
            printable = " ".join(f"{k}={v}" for k, v in overrides.items())
            print(f"trial {printable} val_ndcg10={metric:.4f}")
        if metric > best_metric:
            best_metric = metric
            best_config = trial_config
    return best_config, results


def graft_freq_loss(
    config: ModelConfig,
    dataset: InteractionDataset,
    ablation: Optional[AblationSpec] = None,
) -> Dict[str, object]:
    """Train the attention-only baseline with and without the spectral term.

    Both arms share the seed and differ only in the loss blend: the
    baseline arm runs pure cross-entropy (beta = 1), the grafted arm uses
    the configured beta. Reports test metrics for both plus the relative
    improvement.
    """
    baseline_ablation = ablation or AblationSpec(disable_gsa=True, disable_lsr=True)
    _, _, test_view = leave_one_out_split(dataset)

    def arm(beta: float) -> MetricsReport:
        arm_config = config.replace(beta=beta)
        model, _ = train(arm_config, dataset, ablation=baseline_ablation)
        return evaluate(model, test_view, config.eval_k, config.batch_size)

    without = arm(1.0)
    with_lf = arm(config.beta)
    improvement = {}
    for k in config.eval_k:
        base_hr = without.hr[k]
        improvement[k] = (with_lf.hr[k] - base_hr) / base_hr * 100.0 if base_hr > 0 else 0.0
    return {
        "without_lf": without,
        "with_lf": with_lf,
        "hr_improvement_pct": improvement,
    }
