"""Dataset export: run a checkpoint over rows and write the dump format.

One JSON line per row with keys id/task/source_language/source_text/
gold_text/prediction_text/output_steps/subwords/attention, matching the
analyzer's wire format exactly. A sidecar <out>.meta.json records
model_name, num_layers, beam_size, and any truncated row ids.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .generate import beam_search, forced_decode_attention
from .model import Seq2SeqWithAttention, load_checkpoint
from .tokenizer import Vocab, split_with_offsets

log = logging.getLogger("attn_exporter")


@dataclass
class ExportConfig:
    model_path: str
    task: str = "CR"
    source_language: str = "java"
    max_source_length: int = 256
    max_target_length: int = 128
    beam_size: int = 10
    device: str = "cpu"
    per_head: bool = False
    out_path: str = "dump.jsonl"

    def __post_init__(self):
        if self.max_source_length <= 0 or self.max_target_length <= 0:
            raise ValueError("max lengths must be positive")
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")


@dataclass
class DatasetRow:
    id: str
    source: str
    gold: str


def read_split(data_dir: str | Path, split: str) -> list[DatasetRow]:
    path = Path(data_dir) / f"{split}.jsonl"
    if not path.exists():
        raise FileNotFoundError(f"dataset split not found: {path}")
    rows = []
    for i, line in enumerate(path.read_text("utf-8").splitlines()):
        if not line.strip():
            continue
        obj = json.loads(line)
        rows.append(DatasetRow(
            id=str(obj.get("id", f"row{i}")),
            source=obj["source"],
            gold=obj["gold"],
        ))
    return rows


def export_rows(
    rows: list[DatasetRow],
    config: ExportConfig,
    model: Seq2SeqWithAttention | None = None,
    vocab: Vocab | None = None,
) -> dict:
    """Run inference over rows, write the dump; returns the sidecar dict."""
    if model is None or vocab is None:
        model, vocab = load_checkpoint(config.model_path)
    model = model.to(config.device).eval()

    truncated: list[str] = []
    lines: list[str] = []
    for row in rows:
        pieces = split_with_offsets(row.source)
        if len(pieces) > config.max_source_length:
            log.warning("row %s: source truncated from %d to %d tokens",
                        row.id, len(pieces), config.max_source_length)
            pieces = pieces[: config.max_source_length]
            truncated.append(row.id)
        src_ids = vocab.encode([p.text for p in pieces])

        out_ids = beam_search(model, vocab, src_ids, config.beam_size,
                              config.max_target_length)
        output_steps = vocab.decode(out_ids)
        attention = forced_decode_attention(
            model, vocab, src_ids, out_ids, per_head=config.per_head)

        record = {
            "id": row.id,
            "task": config.task,
            "source_language": config.source_language,
            "source_text": row.source,
            "gold_text": row.gold,
            "prediction_text": " ".join(output_steps),
            "output_steps": output_steps,
            "subwords": [[p.text, p.char_start, p.char_end] for p in pieces],
            "attention": attention.double().cpu().numpy().tolist(),
        }
        lines.append(json.dumps(record, ensure_ascii=False,
                                separators=(",", ":")))

    out = Path(config.out_path)
    out.write_bytes(("".join(line + "\n" for line in lines)).encode("utf-8"))

    num_layers = model.cfg.num_decoder_layers
    if config.per_head:
        num_layers *= model.cfg.n_heads
    sidecar = {
        "model_name": Path(config.model_path).name,
        "num_layers": num_layers,
        "beam_size": config.beam_size,
        "per_head": config.per_head,
        "truncated_ids": truncated,
    }
    sidecar_path = out.with_suffix(".meta.json") if out.suffix == ".jsonl" \
        else out.with_name(out.name + ".meta.json")
    sidecar_path.write_text(json.dumps(sidecar, indent=2) + "\n",
                            encoding="utf-8")
    return sidecar
