"""Command line: prepare, finetune, predict.

The heavy imports (torch, transformers) stay inside the handlers so
``prepare`` runs without loading a deep-learning stack.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import FinetuneConfig, load_config
from .errors import HarnessError


def _cmd_prepare(args) -> int:
    from .data import SPLIT_NAMES, prepare, write_pairs

    splits = prepare(args.corpus, args.manifest)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"tool": "transformer-harness", "version": __version__, "command": "prepare"}
    for name in SPLIT_NAMES:
        write_pairs(getattr(splits, name), out / f"{name}.jsonl", meta=meta)
    counts = splits.counts()
    print(
        f"prepared train {counts[0]}, dev {counts[1]}, test {counts[2]} -> {out}",
        file=sys.stderr,
    )
    return 0


def _cmd_finetune(args) -> int:
    from .data import read_pairs
    from .finetune import finetune

    config = load_config(args.config) if args.config else FinetuneConfig()
    if args.seed is not None:
        config = FinetuneConfig.from_dict({**config.to_dict(), "seed": args.seed})
    pairs = read_pairs(args.pairs)
    log_path = args.log or str(Path(args.out) / "train_log.jsonl")
    Path(args.out).mkdir(parents=True, exist_ok=True)
    with open(log_path, "w", encoding="utf-8") as log:
        result = finetune(config, pairs, args.out, log_stream=log)
    print(
        f"finetuned {config.mode} for {len(result.losses)} steps; "
        f"loss {result.initial_loss:.4f} -> {result.final_loss:.4f}; "
        f"trainable fraction {result.trainable_fraction:.4%} -> {args.out}",
        file=sys.stderr,
    )
    return 0


def _cmd_predict(args) -> int:
    from .data import read_sources
    from .predict import load_artifact, predict_rows, write_hypotheses

    model, _ = load_artifact(args.model)
    rows = read_sources(args.infile)
    hyps = predict_rows(model, rows, batch_size=args.batch_size)
    write_hypotheses(hyps, args.out, meta={"command": "predict"})
    flagged = sum(1 for h in hyps if h.get("flags"))
    note = f" ({flagged} flagged)" if flagged else ""
    print(f"predicted {len(hyps)} verses{note} -> {args.out}", file=sys.stderr)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transformer-harness",
        description="byte-level transformer fine-tuning for accent restoration",
    )
    parser.add_argument("--version", action="version", version=f"transformer-harness {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="corpus + manifest -> per-split pairs files")
    p.add_argument("--corpus", required=True, help="corpus JSONL")
    p.add_argument("--manifest", required=True, help="split manifest JSON")
    p.add_argument("--out-dir", required=True, help="directory for train/dev/test.jsonl")
    p.set_defaults(handler=_cmd_prepare)

    p = sub.add_parser("finetune", help="fit the model on a pairs file")
    p.add_argument("--config", help="FinetuneConfig JSON")
    p.add_argument("--pairs", required=True, help="pairs JSONL from prepare")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--log", default=None, help="step log path (default <out>/train_log.jsonl)")
    p.add_argument("--out", required=True, help="artifact directory")
    p.set_defaults(handler=_cmd_finetune)

    p = sub.add_parser("predict", help="generate hypothesis JSONL for eval/analyze")
    p.add_argument("--model", required=True, help="artifact directory from finetune")
    p.add_argument("--in", dest="infile", required=True, help="verses JSONL")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--out", required=True, help="hypothesis JSONL path")
    p.set_defaults(handler=_cmd_predict)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (HarnessError, OSError) as exc:
        record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(record, ensure_ascii=False), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
