"""Attention dump wire format: line-delimited JSON records with validation.

One record per line. Keys: ``id``, ``task``, ``source_language``,
``source_text``, ``gold_text``, ``prediction_text``, ``output_steps``,
``subwords`` (``[text, char_start, char_end]`` triples, byte offsets into
UTF-8 source), ``attention`` (``[layers][steps][subwords]`` floats,
head-averaged). An optional ``<name>.meta.json`` sidecar carries
corpus-level metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Union

import numpy as np

TASKS = ("CDG", "CR", "CT")
LANGUAGES = ("java", "python", "csharp")

ROW_SUM_TOLERANCE = 1e-3

RECORD_KEYS = (
    "id",
    "task",
    "source_language",
    "source_text",
    "gold_text",
    "prediction_text",
    "output_steps",
    "subwords",
    "attention",
)


class DumpFormatError(ValueError):
    """Raised when a dump stream cannot be parsed into records."""


@dataclass(frozen=True)
class SubwordToken:
    """A model-tokenizer unit with its byte span in the source text."""

    text: str
    char_start: int
    char_end: int


@dataclass
class SampleRecord:
    """One model run: source, gold, prediction, and per-layer attention.

    ``attention`` has shape ``[num_layers, num_output_steps, num_subwords]``;
    each (layer, step) row is a distribution over input subwords.
    """

    id: str
    task: str
    source_language: str
    source_text: str
    gold_text: str
    prediction_text: str
    output_steps: list[str]
    subwords: list[SubwordToken]
    attention: np.ndarray

    @property
    def num_layers(self) -> int:
        return self.attention.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.task == other.task
            and self.source_language == other.source_language
            and self.source_text == other.source_text
            and self.gold_text == other.gold_text
            and self.prediction_text == other.prediction_text
            and self.output_steps == other.output_steps
            and self.subwords == other.subwords
            and self.attention.shape == other.attention.shape
            and np.array_equal(self.attention, other.attention)
        )


@dataclass
class Corpus:
    """An ordered, task-homogeneous collection of records."""

    records: list[SampleRecord]
    task: str
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.task == other.task and self.records == other.records


@dataclass(frozen=True)
class Violation:
    """One invariant violation found in a record.

    ``strict_only`` marks violations that are warnings under default
    validation and only become errors under a strict flag (row-sum drift
    and value-range excursions, which stripped special tokens can cause).
    """

    record_id: str
    invariant: str
    message: str
    layer: int | None = None
    step: int | None = None
    strict_only: bool = False


def _parse_subword(raw: object, index: int, record_id: str, line_no: int) -> SubwordToken:
    if (
        not isinstance(raw, (list, tuple))
        or len(raw) != 3
        or not isinstance(raw[0], str)
        or not isinstance(raw[1], int)
        or not isinstance(raw[2], int)
    ):
        raise DumpFormatError(
            f"line {line_no}: record {record_id!r} field 'subwords[{index}]' "
            "must be a [text, char_start, char_end] triple"
        )
    return SubwordToken(raw[0], raw[1], raw[2])


def _record_from_obj(obj: dict, line_no: int) -> SampleRecord:
    for key in RECORD_KEYS:
        if key not in obj:
            raise DumpFormatError(f"line {line_no}: missing field {key!r}")
    rid = obj["id"]
    if not isinstance(rid, str):
        raise DumpFormatError(f"line {line_no}: field 'id' must be a string")
    if obj["task"] not in TASKS:
        raise DumpFormatError(
            f"line {line_no}: field 'task' must be one of {TASKS}, got {obj['task']!r}"
        )
    if obj["source_language"] not in LANGUAGES:
        raise DumpFormatError(
            f"line {line_no}: field 'source_language' must be one of {LANGUAGES}, "
            f"got {obj['source_language']!r}"
        )
    for key in ("source_text", "gold_text", "prediction_text"):
        if not isinstance(obj[key], str):
            raise DumpFormatError(f"line {line_no}: field {key!r} must be a string")
    steps = obj["output_steps"]
    if not isinstance(steps, list) or any(not isinstance(s, str) for s in steps):
        raise DumpFormatError(f"line {line_no}: field 'output_steps' must be a list of strings")
    if not isinstance(obj["subwords"], list):
        raise DumpFormatError(f"line {line_no}: field 'subwords' must be a list")
    subwords = [_parse_subword(s, i, rid, line_no) for i, s in enumerate(obj["subwords"])]

    try:
        attention = np.asarray(obj["attention"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DumpFormatError(
            f"line {line_no}: record {rid!r} field 'attention' is not a rectangular "
            f"numeric array: {exc}"
        ) from None
    if attention.ndim != 3:
        raise DumpFormatError(
            f"record {rid!r}: attention must be 3-dimensional "
            f"[layers][steps][subwords], got {attention.ndim} dimensions"
        )
    n_layers, n_steps, n_subwords = attention.shape
    if n_steps != len(steps):
        raise DumpFormatError(
            f"record {rid!r}: attention has {n_steps} steps but output_steps "
            f"has {len(steps)}"
        )
    if n_subwords != len(subwords):
        raise DumpFormatError(
            f"record {rid!r}: attention rows have width {n_subwords} but there "
            f"are {len(subwords)} subwords"
        )
    return SampleRecord(
        id=rid,
        task=obj["task"],
        source_language=obj["source_language"],
        source_text=obj["source_text"],
        gold_text=obj["gold_text"],
        prediction_text=obj["prediction_text"],
        output_steps=list(steps),
        subwords=subwords,
        attention=attention,
    )


def parse_dump(stream: Union[BinaryIO, bytes, str, Path]) -> Corpus:
    """Parse a line-delimited dump into a Corpus, in file order.

    Accepts a binary file object, raw bytes, or a path. Raises
    DumpFormatError naming the offending line/record on malformed input,
    dimension mismatches, duplicate ids, or mixed tasks.
    """
    if isinstance(stream, (str, Path)):
        data = Path(stream).read_bytes()
    elif isinstance(stream, bytes):
        data = stream
    else:
        data = stream.read()

    records: list[SampleRecord] = []
    seen_ids: set[str] = set()
    task: str | None = None
    for line_no, line in enumerate(data.split(b"\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise DumpFormatError(f"line {line_no}: invalid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise DumpFormatError(f"line {line_no}: expected a JSON object")
        record = _record_from_obj(obj, line_no)
        if record.id in seen_ids:
            raise DumpFormatError(f"line {line_no}: duplicate record id {record.id!r}")
        seen_ids.add(record.id)
        if task is None:
            task = record.task
        elif record.task != task:
            raise DumpFormatError(
                f"line {line_no}: record {record.id!r} has task {record.task}, "
                f"but corpus task is {task}"
            )
        records.append(record)
    return Corpus(records=records, task=task if task is not None else "CR")


def _record_to_obj(record: SampleRecord) -> dict:
    return {
        "id": record.id,
        "task": record.task,
        "source_language": record.source_language,
        "source_text": record.source_text,
        "gold_text": record.gold_text,
        "prediction_text": record.prediction_text,
        "output_steps": record.output_steps,
        "subwords": [[s.text, s.char_start, s.char_end] for s in record.subwords],
        "attention": record.attention.tolist(),
    }


def write_dump(corpus: Corpus, sink: Union[BinaryIO, Path, str]) -> None:
    """Serialize a corpus as one JSON object per line.

    Floats are written with repr precision, so parse_dump(write_dump(c))
    reproduces every field exactly.
    """
    lines = [
        json.dumps(_record_to_obj(r), ensure_ascii=False, separators=(",", ":"))
        for r in corpus.records
    ]
    payload = ("".join(line + "\n" for line in lines)).encode("utf-8")
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(payload)
    else:
        sink.write(payload)


def read_sidecar(dump_path: Union[str, Path]) -> dict:
    """Load the optional ``<dump>.meta.json`` sidecar, or an empty dict."""
    path = Path(dump_path)
    sidecar = path.with_name(path.name + ".meta.json")
    if path.suffix == ".jsonl":
        sidecar = path.with_suffix(".meta.json")
    if sidecar.exists():
        return json.loads(sidecar.read_text("utf-8"))
    return {}


def validate_record(record: SampleRecord) -> list[Violation]:
    """Check every SampleRecord invariant; violations are data, not errors."""
    out: list[Violation] = []
    rid = record.id

    _, n_steps, n_subwords = record.attention.shape
    if n_steps != len(record.output_steps):
        out.append(
            Violation(rid, "steps_dimension",
                      f"attention has {n_steps} steps, output_steps has "
                      f"{len(record.output_steps)}")
        )
    if n_subwords != len(record.subwords):
        out.append(
            Violation(rid, "subwords_dimension",
                      f"attention rows have width {n_subwords}, record has "
                      f"{len(record.subwords)} subwords")
        )

    source_bytes = len(record.source_text.encode("utf-8"))
    prev_start = -1
    for i, sw in enumerate(record.subwords):
        if not sw.char_start < sw.char_end:
            out.append(
                Violation(rid, "subword_span",
                          f"subword {i} has empty or inverted span "
                          f"[{sw.char_start}, {sw.char_end})")
            )
        if sw.char_end > source_bytes:
            out.append(
                Violation(rid, "subword_bounds",
                          f"subword {i} ends at byte {sw.char_end}, source has "
                          f"{source_bytes} bytes")
            )
        if sw.char_start < prev_start:
            out.append(
                Violation(rid, "subword_order",
                          f"subword {i} starts at {sw.char_start}, before previous "
                          f"start {prev_start}")
            )
        prev_start = sw.char_start

    att = record.attention
    if att.size:
        if not np.all(np.isfinite(att)):
            layer, step, _ = np.argwhere(~np.isfinite(att))[0]
            out.append(
                Violation(rid, "value_finite", "attention contains non-finite values",
                          layer=int(layer), step=int(step))
            )
        else:
            bad = np.argwhere((att < 0.0) | (att > 1.0))
            for layer, step in {(int(l), int(s)) for l, s, _ in bad}:
                out.append(
                    Violation(rid, "value_range",
                              "attention value outside [0, 1]",
                              layer=layer, step=step, strict_only=True)
                )
            row_sums = att.sum(axis=2)
            bad_rows = np.argwhere(np.abs(row_sums - 1.0) > ROW_SUM_TOLERANCE)
            for layer, step in bad_rows:
                out.append(
                    Violation(rid, "row_sum",
                              f"attention row sums to {row_sums[layer, step]:.6f}, "
                              f"outside 1 ± {ROW_SUM_TOLERANCE}",
                              layer=int(layer), step=int(step), strict_only=True)
                )
    return out


def validate_corpus(corpus: Corpus) -> list[Violation]:
    """Validate every record plus corpus-level invariants."""
    out: list[Violation] = []
    seen: set[str] = set()
    layer_counts: set[int] = set()
    for record in corpus.records:
        if record.id in seen:
            out.append(Violation(record.id, "duplicate_id", "record id not unique"))
        seen.add(record.id)
        if record.task != corpus.task:
            out.append(
                Violation(record.id, "task_mismatch",
                          f"record task {record.task} differs from corpus task "
                          f"{corpus.task}")
            )
        layer_counts.add(record.num_layers)
        out.extend(validate_record(record))
    if len(layer_counts) > 1:
        out.append(
            Violation("<corpus>", "layer_count",
                      f"records disagree on layer count: {sorted(layer_counts)}")
        )
    return out


def hard_violations(violations: Iterable[Violation], strict: bool = False) -> list[Violation]:
    """Violations that should fail a run: all of them under strict, else
    only the structural ones."""
    return [v for v in violations if strict or not v.strict_only]
