"""Greedy accent prediction and hypothesis files.

Output rows use the same schema as the main toolkit's restore command,
``{"id", "accented"}``, so its eval and analyze commands consume them
directly. Generation is greedy with a budget of twice the source byte
length: the accented verse is the source plus combining marks, so the
budget is generous without being open-ended. A generation that decodes to
invalid UTF-8 is emitted as an empty verse with a flag instead of crashing
the evaluation run.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import torch

from . import __version__
from .codec import PAD_ID, InvalidByteOutput, decode, encode
from .errors import CheckpointError, HarnessError
from .finetune import _pad_batch, load_base_model
from .lora import inject_lora, load_adapter_state

INVALID_OUTPUT_FLAG = "invalid_output_bytes"


def load_artifact(artifact_dir: str | Path):
    """Model plus its run record, from a finetune output directory."""
    root = Path(artifact_dir)
    doc_path = root / "harness.json"
    if not doc_path.is_file():
        raise CheckpointError(f"{root} is not a model artifact (no harness.json)")
    doc = json.loads(doc_path.read_text(encoding="utf-8"))
    if doc.get("mode") == "full":
        model = load_base_model(str(root / "model"))
    elif doc.get("mode") == "lora":
        model = load_base_model(doc["model_id"])
        inject_lora(model, int(doc["lora_rank"]), int(doc["lora_alpha"]))
        state = torch.load(root / "adapters.pt", weights_only=True)
        load_adapter_state(model, state)
    else:
        raise HarnessError(f"artifact has unknown mode {doc.get('mode')!r}")
    model.eval()
    return model, doc


def predict_rows(
    model,
    rows: Sequence[tuple[str, str]],
    batch_size: int = 16,
) -> list[dict]:
    out: list[dict] = []
    for lo in range(0, len(rows), batch_size):
        chunk = rows[lo : lo + batch_size]
        encoded = [encode(source) for _, source in chunk]
        input_ids = _pad_batch(encoded, PAD_ID)
        budget = 2 * max(len(source.encode("utf-8")) for _, source in chunk)
        with torch.no_grad():
            generated = model.generate(
                input_ids=input_ids,
                attention_mask=(input_ids != PAD_ID).long(),
                max_new_tokens=max(budget, 2),
                do_sample=False,
                num_beams=1,
            )
        for (verse_id, _), ids in zip(chunk, generated.tolist()):
            try:
                out.append({"id": verse_id, "accented": decode(ids)})
            except InvalidByteOutput:
                out.append({"id": verse_id, "accented": "", "flags": [INVALID_OUTPUT_FLAG]})
    return out


def write_hypotheses(rows: Iterable[dict], path: str | Path, meta: dict | None = None) -> None:
    lines = []
    header = {"tool": "transformer-harness", "version": __version__}
    if meta:
        header.update(meta)
    lines.append(json.dumps({"_meta": header}, sort_keys=True))
    for row in rows:
        lines.append(json.dumps(row, ensure_ascii=False, sort_keys=True))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
