"""Command-line surface: train, evaluate, gridsearch, ablate, graft-lf, gen-synth."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .config import AblationSpec, ModelConfig, build_config
from .data import (
    generate_synthetic,
    leave_one_out_split,
    load_interactions,
    write_interactions,
)
from .errors import FreqRecError
from .evaluation import evaluate
from .training import graft_freq_loss, grid_search, train


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="key = value config file")
    parser.add_argument("--dim", type=int, default=None)
    parser.add_argument("--max-len", type=int, default=None, dest="max_len")
    parser.add_argument("--layers", type=int, default=None)
    parser.add_argument("--heads", type=int, default=None)
    parser.add_argument("--dropout", type=float, default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--fusion", choices=("parallel", "serial"), default=None)
    parser.add_argument("--distance", choices=("l1", "l2", "mix"), default=None)
    parser.add_argument("--batch-size", type=int, default=None, dest="batch_size")
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--epochs", type=int, default=None, dest="max_epochs")
    parser.add_argument("--patience", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument(
        "--eval-k", type=str, default=None, dest="eval_k", help="comma-separated cutoffs, e.g. 10,20"
    )


def _config_from_args(args: argparse.Namespace) -> ModelConfig:
    overrides = {}
    for name in (
        "dim",
        "max_len",
        "layers",
        "heads",
        "dropout",
        "alpha",
        "beta",
        "gamma",
        "fusion",
        "distance",
        "batch_size",
        "lr",
        "max_epochs",
        "patience",
        "seed",
    ):
        overrides[name] = getattr(args, name, None)
    if getattr(args, "eval_k", None):
        overrides["eval_k"] = tuple(int(v) for v in args.eval_k.split(","))
    return build_config(getattr(args, "config", None), overrides)


def _ablation_from_args(args: argparse.Namespace) -> AblationSpec:
    disable = getattr(args, "disable", None)
    if not disable:
        return AblationSpec()
    return AblationSpec.from_names(disable.split(","))


def _parse_buckets(text: str):
    buckets = []
    for part in text.split(","):
        lo, hi = part.split("-")
        buckets.append((int(lo), int(hi)))
    return buckets


def _emit(lines, out_path: Path | None) -> None:
    text = "\n".join(lines)
    print(text)
    if out_path is not None:
        out_path.write_text(text + "\n", encoding="utf-8")


def _cmd_train(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    ablation = _ablation_from_args(args)
    dataset = load_interactions(args.dataset)
    model, log = train(config, dataset, ablation=ablation, verbose=True)
    _, valid_view, test_view = leave_one_out_split(dataset)
    lines = [
        f"best_epoch {log.best_epoch}",
        f"stopped_early {str(log.stopped_early).lower()}",
    ]
    for name, view in (("valid", valid_view), ("test", test_view)):
        report = evaluate(model, view, config.eval_k, config.batch_size)
        lines.extend(f"{name}.{line}" for line in report.to_lines())
    _emit(lines, args.out)
    if args.save is not None:
        save_checkpoint(model, args.save)
        print(f"checkpoint {args.save}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    model = load_checkpoint(args.checkpoint)
    dataset = load_interactions(args.dataset)
    _, valid_view, test_view = leave_one_out_split(dataset)
    view = valid_view if args.split == "valid" else test_view
    k_values = tuple(int(v) for v in args.eval_k.split(",")) if args.eval_k else model.config.eval_k
    buckets = _parse_buckets(args.buckets) if args.buckets else None
    report = evaluate(
        model, view, k_values, model.config.batch_size, dataset=dataset, buckets=buckets
    )
    _emit(report.to_lines(), args.out)
    return 0


def _cmd_gridsearch(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    dataset = load_interactions(args.dataset)
    grid = {}
    for spec in args.grid:
        name, _, values = spec.partition("=")
        if not values:
            raise FreqRecError(f"grid spec {spec!r} must look like name=v1,v2,...")
        field_type = type(getattr(ModelConfig(), name, 0.0))
        grid[name.strip()] = [field_type(v) for v in values.split(",")]
    best, results = grid_search(config, grid, dataset, verbose=True)
    lines = []
    for row in results:
        lines.append(" ".join(f"{k}={v}" for k, v in row.items()))
    lines.append("best " + " ".join(f"{name}={getattr(best, name)}" for name in grid))
    _emit(lines, args.out)
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    ablation = _ablation_from_args(args)
    dataset = load_interactions(args.dataset)
    model, log = train(config, dataset, ablation=ablation, verbose=True)
    _, _, test_view = leave_one_out_split(dataset)
    report = evaluate(model, test_view, config.eval_k, config.batch_size)
    lines = [f"best_epoch {log.best_epoch}"]
    lines.extend(report.to_lines())
    _emit(lines, args.out)
    return 0


def _cmd_graft_lf(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    dataset = load_interactions(args.dataset)
    outcome = graft_freq_loss(config, dataset)
    lines = []
    lines.extend(f"without_lf.{line}" for line in outcome["without_lf"].to_lines())
    lines.extend(f"with_lf.{line}" for line in outcome["with_lf"].to_lines())
    for k, pct in sorted(outcome["hr_improvement_pct"].items()):
        lines.append(f"hr@{k}_improvement_pct {pct:.3f}")
    _emit(lines, args.out)
    return 0


def _cmd_gen_synth(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    dataset = generate_synthetic(
        period_count=args.cycles,
        user_count=args.users,
        seq_len=args.seq_len,
        noise_rate=args.noise,
        rng=rng,
        item_count=args.items,
    )
    write_interactions(dataset, args.out)
    print(f"wrote {args.out}: {dataset.user_count} users, {dataset.item_count} items")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freqrec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a model and report metrics")
    p_train.add_argument("--dataset", type=Path, required=True)
    _add_model_flags(p_train)
    p_train.add_argument("--disable", type=str, default=None, help="e.g. sa,gsa,lsr,lf,ce")
    p_train.add_argument("--save", type=Path, default=None, help="checkpoint path (.npz)")
    p_train.add_argument("--out", type=Path, default=None, help="also write metrics here")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("evaluate", help="score a saved checkpoint")
    p_eval.add_argument("--dataset", type=Path, required=True)
    p_eval.add_argument("--checkpoint", type=Path, required=True)
    p_eval.add_argument("--split", choices=("valid", "test"), default="test")
    p_eval.add_argument("--eval-k", type=str, default=None, dest="eval_k")
    p_eval.add_argument("--buckets", type=str, default=None, help="e.g. 5-6,7-8")
    p_eval.add_argument("--out", type=Path, default=None)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_grid = sub.add_parser("gridsearch", help="sweep hyper-parameters")
    p_grid.add_argument("--dataset", type=Path, required=True)
    _add_model_flags(p_grid)
    p_grid.add_argument(
        "--grid", action="append", required=True, help="name=v1,v2,... (repeatable)"
    )
    p_grid.add_argument("--out", type=Path, default=None)
    p_grid.set_defaults(func=_cmd_gridsearch)

    p_abl = sub.add_parser("ablate", help="train with branches or loss terms disabled")
    p_abl.add_argument("--dataset", type=Path, required=True)
    _add_model_flags(p_abl)
    p_abl.add_argument("--disable", type=str, required=True, help="e.g. sa,gsa,lsr,lf,ce")
    p_abl.add_argument("--out", type=Path, default=None)
    p_abl.set_defaults(func=_cmd_ablate)

    p_graft = sub.add_parser(
        "graft-lf", help="attention-only baseline with vs without the spectral loss"
    )
    p_graft.add_argument("--dataset", type=Path, required=True)
    _add_model_flags(p_graft)
    p_graft.add_argument("--out", type=Path, default=None)
    p_graft.set_defaults(func=_cmd_graft_lf)

    p_gen = sub.add_parser("gen-synth", help="write a synthetic periodic dataset")
    p_gen.add_argument("--out", type=Path, required=True)
    p_gen.add_argument("--users", type=int, default=200)
    p_gen.add_argument("--items", type=int, default=None)
    p_gen.add_argument("--cycles", type=int, default=6)
    p_gen.add_argument("--seq-len", type=int, default=20, dest="seq_len")
    p_gen.add_argument("--noise", type=float, default=0.0)
    p_gen.add_argument("--seed", type=int, default=42)
    p_gen.set_defaults(func=_cmd_gen_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FreqRecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
