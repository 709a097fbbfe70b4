"""Interaction-log ingestion, leave-one-out views, batching, synthesis.

The on-disk format is plain UTF-8 text, one `user_id item_id` pair per
line, lines in chronological order within each user. Item ids are
remapped densely (order-preserving, so an already-dense file round-trips
unchanged); users are numbered by first appearance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DataFormatError

logger = logging.getLogger(__name__)

MIN_SEQUENCE_LEN = 3  # needed for train/valid/test leave-one-out


@dataclass
class InteractionDataset:
    """Chronological item-id sequences per user, ids in [1, item_count]."""

    user_sequences: Dict[int, List[int]]
    item_count: int
    name: str = "dataset"
    dropped_short: int = 0

    @property
    def user_count(self) -> int:
        return len(self.user_sequences)

    def users(self) -> List[int]:
        return sorted(self.user_sequences)

    def validate(self) -> "InteractionDataset":
        for user, seq in self.user_sequences.items():
            if len(seq) < MIN_SEQUENCE_LEN:
                raise DataFormatError(f"user {user} has {len(seq)} interactions, need >= 3")
            for item in seq:
                if not 1 <= item <= self.item_count:
                    raise DataFormatError(f"user {user} holds item id {item} outside [1, {self.item_count}]")
        return self


@dataclass
class SplitView:
    """One evaluation-ready view: per-user (history, next-target rows)."""

    name: str
    rows: Dict[int, Tuple[List[int], List[int]]]  # user -> (inputs, targets)

    @property
    def user_count(self) -> int:
        return len(self.rows)


@dataclass
class Batch:
    """Left-padded id matrices plus the positions that carry real targets."""

    input_ids: np.ndarray  # (B, L) int64, 0 = padding
    target_ids: np.ndarray  # (B, L) int64, 0 at non-valid slots
    valid_mask: np.ndarray  # (B, L) bool
    user_ids: List[int] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.input_ids.shape[0]


def load_interactions(path: str | Path, name: Optional[str] = None) -> InteractionDataset:
    """Read a `user item` text file into per-user sequences.

    Users shorter than three interactions are dropped (and counted);
    remaining item ids are remapped to a dense 1..V range preserving
    numeric order.
    """
    path = Path(path)
    raw: Dict[int, List[int]] = {}
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected 'user item', got {line!r}")
            try:
                user, item = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: non-integer id in {line!r}") from exc
            if user < 1 or item < 1:
                raise DataFormatError(f"{path}:{lineno}: ids must be positive, got {line!r}")
            raw.setdefault(user, []).append(item)
    if not raw:
        raise DataFormatError(f"{path}: no interactions found")

    dropped = sum(1 for seq in raw.values() if len(seq) < MIN_SEQUENCE_LEN)
    kept = {u: seq for u, seq in raw.items() if len(seq) >= MIN_SEQUENCE_LEN}
    if not kept:
        raise DataFormatError(f"{path}: every user has fewer than {MIN_SEQUENCE_LEN} interactions")
    if dropped:
        logger.info("dropped %d users with fewer than %d interactions", dropped, MIN_SEQUENCE_LEN)

    item_ids = sorted({item for seq in kept.values() for item in seq})
    item_map = {original: dense for dense, original in enumerate(item_ids, start=1)}
    user_map = {original: dense for dense, original in enumerate(kept, start=1)}
    sequences = {user_map[u]: [item_map[i] for i in seq] for u, seq in kept.items()}
    return InteractionDataset(
        user_sequences=sequences,
        item_count=len(item_ids),
        name=name or path.stem,
        dropped_short=dropped,
    ).validate()


def write_interactions(ds: InteractionDataset, path: str | Path) -> None:
    """Serialize back to the `user item` line format, users in id order."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for user in ds.users():
            for item in ds.user_sequences[user]:
                handle.write(f"{user} {item}\n")


def leave_one_out_split(ds: InteractionDataset) -> Tuple[SplitView, SplitView, SplitView]:
    """Per user: last item is the test target, second-to-last validation.

    The train view pairs each remaining item with its successor, so a
    user needs at least two train items to contribute training rows.
    """
    train_rows: Dict[int, Tuple[List[int], List[int]]] = {}
    valid_rows: Dict[int, Tuple[List[int], List[int]]] = {}
    test_rows: Dict[int, Tuple[List[int], List[int]]] = {}
    for user, seq in ds.user_sequences.items():
        train_part = seq[:-2]
        train_rows[user] = (train_part[:-1], train_part[1:])
        valid_rows[user] = (seq[:-2], [seq[-2]])
        test_rows[user] = (seq[:-1], [seq[-1]])
    return (
        SplitView("train", train_rows),
        SplitView("valid", valid_rows),
        SplitView("test", test_rows),
    )


def _pad_row(inputs: Sequence[int], targets: Sequence[int], max_len: int):
    """Right-align the most recent `max_len` steps, left-pad with zeros."""
    inputs = list(inputs)[-max_len:]
    targets = list(targets)[-len(inputs):] if inputs else []
    pad = max_len - len(inputs)
    row_in = [0] * pad + inputs
    if len(targets) == len(inputs):
        row_tg = [0] * pad + list(targets)
        row_mask = [False] * pad + [True] * len(inputs)
    else:
        # evaluation row: a single target at the final position
        row_tg = [0] * (max_len - 1) + list(targets)
        row_mask = [False] * (max_len - 1) + [True]
    return row_in, row_tg, row_mask


def make_batches(
    view: SplitView,
    batch_size: int,
    max_len: int,
    shuffle: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Iterator[Batch]:
    """Yield batches covering every eligible user of the view once.

    Users whose row holds no step (a single-item training remainder) are
    skipped. Without shuffling, users come in ascending id order; the last
    batch keeps its actual (smaller) size. Evaluation must use the
    unshuffled order so that batch composition, which the batch-axis
    filter couples, is reproducible.
    """
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    users = sorted(u for u, (inputs, _) in view.rows.items() if inputs)
    if shuffle:
        if rng is None:
            raise ConfigError("shuffling requires an rng")
        users = list(rng.permutation(users))
    for start in range(0, len(users), batch_size):
        chunk = users[start : start + batch_size]
        rows = [_pad_row(*view.rows[u], max_len) for u in chunk]
        yield Batch(
            input_ids=np.array([r[0] for r in rows], dtype=np.int64),
            target_ids=np.array([r[1] for r in rows], dtype=np.int64),
            valid_mask=np.array([r[2] for r in rows], dtype=bool),
            user_ids=[int(u) for u in chunk],
        )


def _cycle_periods(period_count: int, item_count: Optional[int]) -> List[int]:
    """Periods in [3, 5] per cycle; when item_count is given they tile it exactly."""
    if period_count < 1:
        raise ConfigError(f"period_count must be >= 1, got {period_count}")
    if item_count is None:
        return [3 + (i % 3) for i in range(period_count)]
    if not 3 * period_count <= item_count <= 5 * period_count:
        raise ConfigError(
            f"item_count {item_count} cannot be tiled by {period_count} cycles of period 3..5"
        )
    base = item_count // period_count
    periods = [base] * period_count
    for i in range(item_count - base * period_count):
        periods[i] += 1
    return periods


def generate_synthetic(
    period_count: int,
    user_count: int,
    seq_len: int,
    noise_rate: float,
    rng: np.random.Generator,
    item_count: Optional[int] = None,
    name: str = "synthetic",
) -> InteractionDataset:
    """Periodic interaction logs with controllable noise.

    Each user is assigned (round-robin, so every cycle is populated) one
    of `period_count` disjoint item cycles of period 3..5 and walks it
    from a random phase. Every position is independently replaced by a
    uniform random item with probability `noise_rate`; at zero noise the
    next item is an exact function of the current one.
    """
    if not 0.0 <= noise_rate < 1.0:
        raise ConfigError(f"noise_rate must lie in [0, 1), got {noise_rate}")
    if seq_len < MIN_SEQUENCE_LEN:
        raise ConfigError(f"seq_len must be >= {MIN_SEQUENCE_LEN}, got {seq_len}")
    if user_count < 1:
        raise ConfigError(f"user_count must be >= 1, got {user_count}")
    periods = _cycle_periods(period_count, item_count)
    starts = [1]
    for p in periods[:-1]:
        starts.append(starts[-1] + p)
    total_items = int(sum(periods))
    # phases are drawn before any noise so that clean and noisy datasets
    # generated from the same seed walk identical cycles
    phases = [int(rng.integers(periods[(u - 1) % period_count])) for u in range(1, user_count + 1)]
    sequences: Dict[int, List[int]] = {}
    for user in range(1, user_count + 1):
        cycle = (user - 1) % period_count
        period = periods[cycle]
        first = starts[cycle]
        phase = phases[user - 1]
        sequences[user] = [first + (phase + t) % period for t in range(seq_len)]
    if noise_rate > 0.0:
        for user in range(1, user_count + 1):
            flips = rng.random(seq_len) < noise_rate
            noise_items = rng.integers(1, total_items + 1, size=seq_len)
            seq = sequences[user]
            sequences[user] = [
                int(noise_items[t]) if flips[t] else seq[t] for t in range(seq_len)
            ]
    return InteractionDataset(
        user_sequences=sequences, item_count=total_items, name=name
    ).validate()


def sparsity_buckets(
    ds: InteractionDataset, bounds: Sequence[Tuple[int, int]]
) -> Dict[Tuple[int, int], List[int]]:
    """Partition users by raw sequence length into inclusive ranges."""
    ordered = sorted(bounds)
    for (lo, hi) in ordered:
        if lo > hi:
            raise ConfigError(f"bucket ({lo}, {hi}) has lower bound above upper bound")
    for (_, hi_prev), (lo_next, _) in zip(ordered, ordered[1:]):
        if lo_next <= hi_prev:
            raise ConfigError(f"buckets overlap around the boundary {hi_prev}..{lo_next}")
    buckets: Dict[Tuple[int, int], List[int]] = {tuple(b): [] for b in bounds}
    for user in ds.users():
        length = len(ds.user_sequences[user])
        for lo, hi in bounds:
            if lo <= length <= hi:
                buckets[(lo, hi)].append(user)
                break
    return buckets
