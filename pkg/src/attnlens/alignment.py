"""Re-aggregates subword-level attention onto code tokens.

Each subword is assigned to the code token with maximal byte-span overlap;
a code token's score at a given (layer, step) is the arithmetic mean of
its constituent subword scores. Aligned rows therefore no longer sum to 1;
downstream consumers must not assume normalization. Mass on subwords that
map to no token accumulates into orphan_mass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .dumpio import SampleRecord, SubwordToken
from .tokens import Category, CodeToken


class AlignmentError(ValueError):
    """A subword span is inconsistent with the source text."""


@dataclass
class AlignedSample:
    """Attention re-aggregated onto code tokens, per layer per step."""

    record_id: str
    code_tokens: list[CodeToken]
    attention: np.ndarray          # [layers, steps, code_tokens]
    orphan_mass: np.ndarray        # [layers, steps]
    output_steps: list[str]

    @property
    def num_layers(self) -> int:
        return self.attention.shape[0]

    @property
    def num_steps(self) -> int:
        return self.attention.shape[1]


def _overlap(a_start: int, a_end: int, b_start: int, b_end: int) -> int:
    return max(0, min(a_end, b_end) - max(a_start, b_start))


def map_subwords(
    subwords: list[SubwordToken], code_tokens: list[CodeToken]
) -> list[int | None]:
    """Assign each subword the index of the max-overlap code token.

    Zero-overlap subwords map to None; ties break toward the earlier token.
    """
    assignments: list[int | None] = []
    for sw in subwords:
        best: int | None = None
        best_overlap = 0
        for tok in code_tokens:
            if tok.char_start >= sw.char_end:
                break  # tokens are ordered; nothing later can overlap
            ov = _overlap(sw.char_start, sw.char_end, tok.char_start, tok.char_end)
            if ov > best_overlap:
                best_overlap = ov
                best = tok.index
        assignments.append(best)
    return assignments


def align(record: SampleRecord, code_tokens: list[CodeToken]) -> AlignedSample:
    """Build the code-token attention view of one record."""
    source_bytes = len(record.source_text.encode("utf-8"))
    for i, sw in enumerate(record.subwords):
        if sw.char_end > source_bytes or sw.char_start < 0:
            raise AlignmentError(
                f"record {record.id!r}: subword {i} ({sw.text!r}) spans "
                f"[{sw.char_start}, {sw.char_end}) beyond source of "
                f"{source_bytes} bytes"
            )

    assignments = map_subwords(record.subwords, code_tokens)
    n_layers, n_steps, n_subwords = record.attention.shape
    n_tokens = len(code_tokens)

    # membership matrix M[t, w] = 1 when subword w belongs to token t
    member = np.zeros((n_tokens, n_subwords), dtype=np.float64)
    orphan = np.ones(n_subwords, dtype=np.float64)
    for w, t in enumerate(assignments):
        if t is not None:
            member[t, w] = 1.0
            orphan[w] = 0.0

    counts = member.sum(axis=1)  # subwords per token
    raw = record.attention
    sums = np.einsum("tw,lsw->lst", member, raw)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1.0), 0.0)
    orphan_mass = np.einsum("w,lsw->ls", orphan, raw)

    return AlignedSample(
        record_id=record.id,
        code_tokens=code_tokens,
        attention=means,
        orphan_mass=orphan_mass,
        output_steps=list(record.output_steps),
    )


def write_aligned(samples: list[AlignedSample], sink: Union[BinaryIO, Path, str]) -> None:
    """Serialize aligned samples as JSON lines (same nested-array style as
    the dump format)."""
    lines = []
    for s in samples:
        obj = {
            "record_id": s.record_id,
            "output_steps": s.output_steps,
            "code_tokens": [
                [t.text, t.char_start, t.char_end,
                 t.category.value if t.category else None]
                for t in s.code_tokens
            ],
            "attention": s.attention.tolist(),
            "orphan_mass": s.orphan_mass.tolist(),
        }
        lines.append(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
    payload = ("".join(line + "\n" for line in lines)).encode("utf-8")
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(payload)
    else:
        sink.write(payload)


def read_aligned(source: Union[BinaryIO, bytes, str, Path]) -> list[AlignedSample]:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    samples = []
    for line_no, line in enumerate(data.split(b"\n"), start=1):
        if not line.strip():
            continue
        obj = json.loads(line.decode("utf-8"))
        tokens = [
            CodeToken(
                text=t[0], char_start=t[1], char_end=t[2], index=i,
                category=Category(t[3]) if t[3] else None,
            )
            for i, t in enumerate(obj["code_tokens"])
        ]
        samples.append(
            AlignedSample(
                record_id=obj["record_id"],
                code_tokens=tokens,
                attention=np.asarray(obj["attention"], dtype=np.float64),
                orphan_mass=np.asarray(obj["orphan_mass"], dtype=np.float64),
                output_steps=list(obj["output_steps"]),
            )
        )
    return samples


def align_corpus(corpus, language: str) -> list[AlignedSample]:
    """Categorize each record's source and align its attention."""
    from .parsing import categorize

    out = []
    for record in corpus.records:
        tokens = categorize(record.source_text, language)
        out.append(align(record, tokens))
    return out
