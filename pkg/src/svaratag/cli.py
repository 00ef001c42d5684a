"""Command-line pipeline: normalize, strip, pair, split, train, restore,
eval, analyze.

Thread count is pinned before numpy loads (BLAS pools read their
environment variables at import time), so every numpy-importing module is
pulled in lazily inside the handlers. Failures exit nonzero with one
machine-readable JSON error record on stderr; each failure family has its
own exit code. Structured outputs carry a reproducibility header (tool
version, config hash, seed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, TextIO

from . import __version__
from .errors import (
    ContractError,
    RecordError,
    StructuralTextError,
    SvaratagError,
    TrainingDiverged,
)

EXIT_OK = 0
EXIT_USAGE = 2  # argparse's own code for bad flags/commands
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_SCHEMA = 5
EXIT_TEXT = 6
EXIT_CONTRACT = 7
EXIT_DIVERGED = 8

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def _pin_threads(n: int) -> None:
    """Best effort: effective only if numpy has not been imported yet."""
    for var in _THREAD_VARS:
        os.environ[var] = str(n)


def _meta(command: str, config, seed: int | None = None) -> dict:
    doc = {
        "tool": "svaratag",
        "version": __version__,
        "command": command,
        "configSha256": config.sha256,
    }
    if seed is not None:
        doc["seed"] = seed
    return doc


def _open_in(path: str) -> TextIO:
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise _IoError(f"cannot read {path}: {exc.strerror}") from exc


class _IoError(SvaratagError):
    pass


def _require_readable(path: str) -> str:
    if not Path(path).is_file():
        raise _IoError(f"input file not found: {path}")
    return path


# ---------------------------------------------------------------- commands


def _cmd_normalize(args, config) -> int:
    from .text import normalize

    return _text_filter(args, config, "normalize", normalize)


def _cmd_strip(args, config) -> int:
    from .text import strip_accents

    return _text_filter(args, config, "strip", lambda s: strip_accents(s, config.inventory))


def _text_filter(args, config, name: str, fn: Callable[[str], str]) -> int:
    """Shared line-filter plumbing for normalize and strip.

    Text format keeps stdout clean for piping and prints the header to
    stderr; jsonl format embeds it as the first record.
    """
    _require_readable(args.infile)
    out_lines: list[str] = []
    if args.format == "text":
        with _open_in(args.infile) as fh:
            for line in fh:
                out_lines.append(fn(line.rstrip("\n")))
        payload = "\n".join(out_lines) + ("\n" if out_lines else "")
        _write_text(args.outfile, payload)
        print(json.dumps({"_meta": _meta(name, config)}, sort_keys=True), file=sys.stderr)
    else:
        rows = []
        with _open_in(args.infile) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    doc = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise RecordError(f"invalid JSON: {exc.msg}", line=lineno) from exc
                if "_meta" in doc:
                    continue
                if "text" not in doc:
                    raise RecordError("record needs a `text` field", line=lineno)
                doc["text"] = fn(str(doc["text"]))
                rows.append(doc)
        lines = [json.dumps({"_meta": _meta(name, config)}, sort_keys=True)]
        lines += [json.dumps(r, ensure_ascii=False, sort_keys=True) for r in rows]
        _write_text(args.outfile, "\n".join(lines) + "\n")
    return EXIT_OK


def _write_text(path: str | None, payload: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(payload)
    else:
        Path(path).write_text(payload, encoding="utf-8")


def _cmd_pair(args, config) -> int:
    from .corpus import build_pairs, ingest, write_corpus

    _require_readable(args.infile)
    records = ingest(args.infile, fmt=args.format, inventory=config.inventory)
    pairs = build_pairs(records, inventory=config.inventory)
    write_corpus(pairs, args.outfile, meta=_meta("pair", config))
    print(f"paired {len(pairs)} verses -> {args.outfile}", file=sys.stderr)
    return EXIT_OK


def _cmd_split(args, config) -> int:
    from .corpus import read_corpus, stratified_split, write_manifest

    _require_readable(args.infile)
    given = [r for r in (args.train, args.dev, args.test) if r is not None]
    if len(given) == 3:
        ratios = (args.train, args.dev, args.test)
    elif not given:
        ratios = config.ratios
    else:
        raise ContractError("provide all of --train/--dev/--test or none")
    seed = args.seed if args.seed is not None else config.seed
    pairs = read_corpus(args.infile, inventory=config.inventory)
    split = stratified_split(pairs, ratios=tuple(ratios), seed=seed, inventory=config.inventory)
    write_manifest(split, args.outfile, meta=_meta("split", config, seed=seed))
    n_train, n_dev, n_test = split.counts()
    print(
        f"split {n_train + n_dev + n_test} verses -> "
        f"train {n_train}, dev {n_dev}, test {n_test}",
        file=sys.stderr,
    )
    return EXIT_OK


def _split_pairs_by_manifest(pairs, manifest):
    by_id = {p.id: p for p in pairs}
    missing = [i for ids in (manifest.train, manifest.dev, manifest.test) for i in ids if i not in by_id]
    if missing:
        raise ContractError(f"manifest names {len(missing)} ids absent from the corpus, first: {missing[0]}")
    train = [by_id[i] for i in manifest.train]
    dev = [by_id[i] for i in manifest.dev]
    test = [by_id[i] for i in manifest.test]
    return train, dev, test


def _cmd_train(args, config) -> int:
    from .corpus import read_corpus, read_manifest
    from .tagger.checkpoint import save_checkpoint
    from .tagger.train import train

    _require_readable(args.infile)
    _require_readable(args.manifest)
    pairs = read_corpus(args.infile, inventory=config.inventory)
    manifest = read_manifest(args.manifest)
    train_pairs, dev_pairs, _ = _split_pairs_by_manifest(pairs, manifest)

    train_config = config.train
    if args.seed is not None:
        from .tagger.train import TrainConfig

        fields = train_config.to_dict()
        fields["seed"] = args.seed
        train_config = TrainConfig.from_dict(fields)

    log_path = args.log or (args.outfile + ".log.jsonl")
    with open(log_path, "w", encoding="utf-8") as log:
        log.write(
            json.dumps({"_meta": _meta("train", config, seed=train_config.seed)}, sort_keys=True)
            + "\n"
        )
        result = train(
            train_config, train_pairs, dev_pairs, inventory=config.inventory, log_stream=log
        )
    ckpt = result.checkpoint
    save_checkpoint(
        args.outfile,
        ckpt.params,
        ckpt.vocab,
        ckpt.tags,
        ckpt.inventory,
        ckpt.config,
        ckpt.seed,
        ckpt.epoch,
        ckpt.dev_metrics,
    )
    print(
        f"trained {len(result.history)} epochs; best epoch {result.best_epoch} "
        f"(dev DER {ckpt.dev_metrics.get('der', float('nan')):.4f}) -> {args.outfile}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_restore(args, config) -> int:
    from .corpus import write_hypotheses
    from .tagger.restore import AccentRestorer

    _require_readable(args.model)
    restorer = AccentRestorer.from_file(args.model)
    if args.format == "text":
        _require_readable(args.infile)
        with _open_in(args.infile) as fh:
            lines = [line.rstrip("\n") for line in fh]
        restored = [restorer.restore_verse(line) for line in lines]
        _write_text(args.outfile, "\n".join(restored) + ("\n" if restored else ""))
        print(json.dumps({"_meta": _meta("restore", config)}, sort_keys=True), file=sys.stderr)
    else:
        rows = _read_unaccented_records(args.infile)
        restored_rows = [(vid, restorer.restore_verse(text)) for vid, text in rows]
        write_hypotheses(restored_rows, args.outfile, meta=_meta("restore", config))
        print(f"restored {len(restored_rows)} verses -> {args.outfile}", file=sys.stderr)
    return EXIT_OK


def _read_unaccented_records(path: str) -> list[tuple[str, str]]:
    """JSONL rows carrying `id` plus `unaccented` (corpus files qualify)."""
    _require_readable(path)
    rows: list[tuple[str, str]] = []
    with _open_in(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if "_meta" in doc:
                continue
            if "id" not in doc or "unaccented" not in doc:
                raise RecordError("record needs `id` and `unaccented` fields", line=lineno)
            rows.append((str(doc["id"]), str(doc["unaccented"])))
    return rows


def _read_reference_rows(path: str) -> list[tuple[str, str]]:
    """(id, accented) rows from a hypothesis or corpus file."""
    from .corpus import read_hypotheses

    _require_readable(path)
    return read_hypotheses(path)


def _cmd_eval(args, config) -> int:
    from .metrics import corpus_report

    refs = _read_reference_rows(args.ref)
    hyps = _read_reference_rows(args.hyp)
    report = corpus_report(refs, hyps, inventory=config.inventory)
    doc = report.to_json_dict()
    doc["_meta"] = _meta("eval", config)
    _write_text(args.outfile, json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n")
    print(
        f"WER {report.wer:.4f}  CER {report.cer:.4f}  DER {report.der:.4f} "
        f"over {len(refs)} verses",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_analyze(args, config) -> int:
    from .analysis import analyze_corpus, distribution_table

    refs = _read_reference_rows(args.ref)
    hyps = _read_reference_rows(args.hyp)
    window = args.window if args.window is not None else config.window
    analysis = analyze_corpus(refs, hyps, window=window, inventory=config.inventory)
    doc = analysis.to_json_dict()
    doc["_meta"] = _meta("analyze", config)
    _write_text(args.outfile, json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n")
    if args.table:
        print(distribution_table(analysis))
    return EXIT_OK


# ----------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svaratag",
        description="Vedic pitch-accent restoration pipeline",
    )
    parser.add_argument("--version", action="version", version=f"svaratag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_default: str | None = None) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--threads", type=int, default=1, help="BLAS thread count (default 1)")
        p.add_argument("--out", dest="outfile", default=out_default, help="output path ('-' = stdout)")

    p = sub.add_parser("normalize", help="NFC-normalize verse text")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=("text", "jsonl"), default="text")
    common(p, out_default="-")
    p.set_defaults(handler=_cmd_normalize)

    p = sub.add_parser("strip", help="remove accent marks from verse text")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=("text", "jsonl"), default="text")
    common(p, out_default="-")
    p.set_defaults(handler=_cmd_strip)

    p = sub.add_parser("pair", help="ingest accented sources into a corpus file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
    common(p)
    p.set_defaults(handler=_cmd_pair)

    p = sub.add_parser("split", help="stratified train/dev/test manifest")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--train", type=float, default=None)
    p.add_argument("--dev", type=float, default=None)
    p.add_argument("--test", type=float, default=None)
    common(p)
    p.set_defaults(handler=_cmd_split)

    p = sub.add_parser("train", help="fit the accent tagger")
    p.add_argument("--in", dest="infile", required=True, help="corpus JSONL")
    p.add_argument("--manifest", required=True, help="split manifest JSON")
    p.add_argument("--log", default=None, help="training log path (JSONL)")
    common(p)
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("restore", help="predict accents for unaccented verses")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--format", choices=("text", "jsonl"), default="jsonl")
    common(p)
    p.set_defaults(handler=_cmd_restore)

    p = sub.add_parser("eval", help="WER/CER/DER report for a hypothesis file")
    p.add_argument("--ref", required=True, help="reference corpus/hypothesis JSONL")
    p.add_argument("--hyp", required=True, help="hypothesis JSONL {id, accented}")
    common(p, out_default="-")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("analyze", help="error taxonomy and metric correlations")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--window", type=int, default=None, help="misplacement window (clusters)")
    p.add_argument("--table", action="store_true", help="print a category table")
    common(p, out_default="-")
    p.set_defaults(handler=_cmd_analyze)

    return parser


class _ConfigError(SvaratagError):
    pass


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, _ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (_IoError, OSError)):
        return EXIT_IO
    if isinstance(exc, RecordError):
        return EXIT_SCHEMA
    if isinstance(exc, StructuralTextError):
        return EXIT_TEXT
    if isinstance(exc, TrainingDiverged):
        return EXIT_DIVERGED
    return EXIT_CONTRACT


_PUBLIC_TYPE = {
    _ConfigError: "ConfigError",
    _IoError: "IoError",
}


def _error_record(exc: Exception, code: int) -> dict:
    if isinstance(exc, OSError):
        name = "IoError"
    else:
        name = _PUBLIC_TYPE.get(type(exc), type(exc).__name__)
    rec: dict = {
        "type": name,
        "message": str(exc),
        "exitCode": code,
    }
    if isinstance(exc, RecordError):
        rec["line"] = exc.line
    if isinstance(exc, StructuralTextError):
        rec["offset"] = exc.offset
        if exc.verse_id is not None:
            rec["verseId"] = exc.verse_id
    return rec


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _pin_threads(max(1, args.threads))
    if args.outfile is None:
        parser.error(f"{args.command} requires --out")

    try:
        from .config import ToolConfig, load_config

        try:
            config = load_config(args.config) if args.config else ToolConfig()
        except ContractError as exc:
            raise _ConfigError(str(exc)) from exc
        return args.handler(args, config)
    except (SvaratagError, OSError) as exc:
        code = _exit_code_for(exc)
        print(json.dumps({"error": _error_record(exc, code)}, ensure_ascii=False), file=sys.stderr)
        return code


if __name__ == "__main__":
    raise SystemExit(main())
