"""attnlens command line: validate, align, rank, attribution, metrics,
stratify, and the all-in-one report.

Exit codes: 0 ok, 1 data error, 2 usage error. A config file of plain
``key = value`` lines supplies defaults that flags override; the
ATTNLENS_WORKERS environment variable sets per-sample parallelism.
Failures print one machine-readable JSON object to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import alignment, attribution, dumpio, heatmap, metrics, rank, stratify
from .parsing import ParseError, categorize, complexity_metrics
from .tokens import ALL_CATEGORIES

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2

HISTOGRAM_METRICS = (
    "difficulty", "bleu", "n_tokens", "cyclomatic",
    "nested_block_depth", "n_variables",
)


class DataError(Exception):
    """Pipeline failure attributable to the input data."""


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("ATTNLENS_WORKERS", "1")))
    except ValueError:
        return 1


def _par_map(fn, items: list):
    n = _workers()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# configuration


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"config line {line_no}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _resolve(args: argparse.Namespace, key: str, config: dict, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def parse_layer_selection(spec: str | None, num_layers: int) -> list[int]:
    if spec is None or spec == "all":
        return list(range(num_layers))
    if spec in ("last3", "last-3"):
        return list(range(max(0, num_layers - 3), num_layers))
    try:
        layers = [int(p) for p in spec.split(",") if p.strip() != ""]
    except ValueError:
        raise DataError(f"bad layer selection {spec!r}") from None
    for layer in layers:
        if not 0 <= layer < num_layers:
            raise DataError(
                f"layer {layer} outside [0, {num_layers}) in selection {spec!r}"
            )
    return layers


# --------------------------------------------------------------------------
# shared pipeline steps


def _load_corpus(dump_path: str, strict: bool) -> dumpio.Corpus:
    path = Path(dump_path)
    if not path.exists():
        raise DataError(f"dump file not found: {dump_path}")
    corpus = dumpio.parse_dump(path)
    corpus.meta = dumpio.read_sidecar(path)
    violations = dumpio.validate_corpus(corpus)
    hard = dumpio.hard_violations(violations, strict=strict)
    if hard:
        lines = "; ".join(
            f"{v.record_id}:{v.invariant}" for v in hard[:10]
        )
        raise DataError(
            f"{len(hard)} validation error(s) in {dump_path}: {lines}"
        )
    return corpus


def _align_corpus(corpus: dumpio.Corpus, language: str) -> list[alignment.AlignedSample]:
    def one(record):
        tokens = categorize(record.source_text, language)
        return alignment.align(record, tokens)

    return _par_map(one, corpus.records)


def _rank_rows(report: rank.RankReport) -> list[list]:
    return [
        [s.layer, s.mean_normalized_rank, s.topk_hit_rate, s.n_observations]
        for s in report.layers
    ]


def _category_rows(
    per_layer: list[attribution.CategoryProfile],
    layer_ids: list[int],
    averaged: attribution.CategoryProfile,
) -> list[list]:
    rows = []
    for layer, profile in zip(layer_ids, per_layer):
        for cat in ALL_CATEGORIES:
            rows.append([
                layer, cat.value, profile.raw_mass[cat],
                profile.population[cat], profile.per_token[cat],
                profile.normalized_pct[cat],
            ])
    for cat in ALL_CATEGORIES:
        rows.append([
            "avg", cat.value, averaged.raw_mass[cat],
            averaged.population[cat], averaged.per_token[cat],
            averaged.normalized_pct[cat],
        ])
    return rows


def _sample_metrics(corpus: dumpio.Corpus, language: str):
    """(difficulty, bleu, complexity, exact) per record, in corpus order."""

    def one(record):
        bleu = metrics.bleu4(record.prediction_text, record.gold_text,
                             smoothed=True).value
        complexity = complexity_metrics(record.source_text, language)
        if corpus.task == "CDG":
            tokens = categorize(record.source_text, language)
            difficulty = metrics.doc_overlap(record.gold_text, tokens).value
        else:
            difficulty = float(metrics.edit_distance_difficulty(
                record.source_text, record.gold_text))
        exact = record.prediction_text.strip() == record.gold_text.strip()
        return difficulty, bleu, complexity, exact

    return _par_map(one, corpus.records)


def _metrics_rows(corpus, language, computed) -> tuple[list[str], list[list]]:
    difficulty_col = "overlap" if corpus.task == "CDG" else "levenshtein"
    header = ["id", "bleu4_smoothed", difficulty_col, "exact_match",
              "n_tokens", "cyclomatic", "nested_block_depth", "n_variables"]
    rows = []
    for record, (difficulty, bleu, cx, exact) in zip(corpus.records, computed):
        difficulty_value = (
            difficulty if corpus.task == "CDG" else int(difficulty)
        )
        rows.append([
            record.id, bleu, difficulty_value, exact,
            cx.n_tokens, cx.cyclomatic, cx.nested_block_depth, cx.n_variables,
        ])
    return header, rows


def _stratify_corpus(corpus, computed) -> stratify.StratifiedCorpus:
    ids = [r.id for r in corpus.records]
    difficulty = [c[0] for c in computed]
    bleu = [c[1] for c in computed]
    complexities = [c[2] for c in computed]
    return stratify.label_quadrants(ids, difficulty, bleu, complexities,
                                    corpus.task)


def _strata_files(
    strata: stratify.StratifiedCorpus,
    aligned: list[alignment.AlignedSample],
    layers: list[int],
    bins: int,
    out_dir: Path,
) -> dict[Path, tuple[list[str], list[list]]]:
    """All strata CSVs as path -> (header, rows), computed before writing."""
    files: dict[Path, tuple[list[str], list[list]]] = {}

    label_rows = [
        [s.id, s.difficulty_value, s.bleu, s.difficulty_tercile,
         s.accuracy_tercile, s.quadrant.value, s.complexity.n_tokens,
         s.complexity.cyclomatic, s.complexity.nested_block_depth,
         s.complexity.n_variables]
        for s in strata.samples
    ]
    files[out_dir / "labels.csv"] = (
        ["id", "difficulty", "bleu", "difficulty_tercile", "accuracy_tercile",
         "quadrant", "n_tokens", "cyclomatic", "nested_block_depth",
         "n_variables"],
        label_rows,
    )

    for metric in HISTOGRAM_METRICS:
        hist = stratify.distribution_compare(
            metric, strata, stratify.QuadrantLabel.EASY_LOW, bins=bins
        )
        rows = [
            [hist.bin_edges[i], hist.bin_edges[i + 1],
             float(hist.whole_density[i]), float(hist.subset_density[i])]
            for i in range(len(hist.whole_density))
        ]
        files[out_dir / "histograms" / f"{metric}.csv"] = (
            ["bin_left", "bin_right", "whole_density", "easylow_density"],
            rows,
        )

    easylow_ids = set(strata.subset_ids(stratify.QuadrantLabel.EASY_LOW))
    subset = [a for a in aligned if a.record_id in easylow_ids]
    whole_profile = attribution.rollup(
        attribution.corpus_profile(aligned, layers=layers))
    if subset:
        subset_profile = attribution.rollup(
            attribution.corpus_profile(subset, layers=layers))
        delta = stratify.category_attention_delta(whole_profile, subset_profile)
        delta_rows = [
            ["naming", whole_profile.naming_pct, subset_profile.naming_pct,
             delta["naming"]],
            ["structural", whole_profile.structural_pct,
             subset_profile.structural_pct, delta["structural"]],
            ["others", whole_profile.others_pct, subset_profile.others_pct,
             delta["others"]],
        ]
    else:
        delta_rows = [
            ["naming", whole_profile.naming_pct, None, None],
            ["structural", whole_profile.structural_pct, None, None],
            ["others", whole_profile.others_pct, None, None],
        ]
    files[out_dir / "deltas.csv"] = (
        ["category", "whole_pct", "easylow_pct", "delta"],
        delta_rows,
    )
    return files


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(args, config) -> int:
    dump = _resolve(args, "dump", config)
    if dump is None:
        raise DataError("--dump is required")
    strict = bool(args.strict or config.get("strict") == "true")
    path = Path(dump)
    if not path.exists():
        raise DataError(f"dump file not found: {dump}")
    corpus = dumpio.parse_dump(path)
    violations = dumpio.validate_corpus(corpus)
    for v in violations:
        where = ""
        if v.layer is not None:
            where = f" layer={v.layer}"
            if v.step is not None:
                where += f" step={v.step}"
        severity = "warning" if v.strict_only else "error"
        print(f"{severity}: record {v.record_id}: {v.invariant}{where}: "
              f"{v.message}")
    hard = dumpio.hard_violations(violations, strict=strict)
    print(f"{len(corpus)} record(s), {len(violations)} violation(s), "
          f"{len(hard)} blocking")
    return EXIT_DATA if hard else EXIT_OK


def cmd_align(args, config) -> int:
    dump = _resolve(args, "dump", config)
    language = _resolve(args, "lang", config)
    out = _resolve(args, "out", config)
    if not dump or not language or not out:
        raise DataError("--dump, --lang and --out are required")
    corpus = _load_corpus(dump, strict=False)
    aligned = _align_corpus(corpus, language)
    alignment.write_aligned(aligned, out)
    print(f"aligned {len(aligned)} sample(s) -> {out}")
    return EXIT_OK


def cmd_rank(args, config) -> int:
    aligned_path = _resolve(args, "aligned", config)
    out = _resolve(args, "out", config)
    if not aligned_path or not out:
        raise DataError("--aligned and --out are required")
    k = int(_resolve(args, "k", config, 3))
    weighting = _resolve(args, "weighting", config, "observation")
    aligned = alignment.read_aligned(aligned_path)
    if not aligned:
        raise DataError(f"no aligned samples in {aligned_path}")
    layers = parse_layer_selection(
        _resolve(args, "layers", config), aligned[0].num_layers)
    report = rank.rank_report(None, aligned, k=k, weighting=weighting,
                              layers=layers)
    _write_csv(Path(out),
               ["layer", "mean_normalized_rank", "topk_hit_rate",
                "n_observations"],
               _rank_rows(report))
    print(json.dumps({
        "n_observations": report.n_observations,
        "repeated_token_ratio": round(report.repeated_token_ratio, 6),
        "k": k,
        "empty": report.empty,
    }))
    return EXIT_OK


def cmd_attribution(args, config) -> int:
    aligned_path = _resolve(args, "aligned", config)
    out = _resolve(args, "out", config)
    if not aligned_path or not out:
        raise DataError("--aligned and --out are required")
    mode = _resolve(args, "mode", config, "corpus")
    aligned = alignment.read_aligned(aligned_path)
    if not aligned:
        raise DataError(f"no aligned samples in {aligned_path}")
    layers = parse_layer_selection(
        _resolve(args, "layers", config), aligned[0].num_layers)
    acc = attribution.accumulate(aligned)
    per_layer_all = attribution.profiles_per_layer(acc)
    per_layer = [per_layer_all[i] for i in layers]
    averaged = attribution.corpus_profile(aligned, mode=mode, layers=layers)
    _write_csv(Path(out),
               ["layer", "category", "raw_mass", "population", "per_token",
                "normalized_pct"],
               _category_rows(per_layer, layers, averaged))
    print(f"attribution over {len(aligned)} sample(s) -> {out}")
    return EXIT_OK


def cmd_metrics(args, config) -> int:
    dump = _resolve(args, "dump", config)
    language = _resolve(args, "lang", config)
    out = _resolve(args, "out", config)
    if not dump or not language or not out:
        raise DataError("--dump, --lang and --out are required")
    corpus = _load_corpus(dump, strict=False)
    computed = _sample_metrics(corpus, language)
    header, rows = _metrics_rows(corpus, language, computed)
    _write_csv(Path(out), header, rows)
    print(f"metrics for {len(corpus)} record(s) -> {out}")
    return EXIT_OK


def cmd_stratify(args, config) -> int:
    dump = _resolve(args, "dump", config)
    aligned_path = _resolve(args, "aligned", config)
    language = _resolve(args, "lang", config)
    out = _resolve(args, "out", config)
    if not dump or not aligned_path or not language or not out:
        raise DataError("--dump, --aligned, --lang and --out are required")
    bins = int(_resolve(args, "bins", config, 10))
    corpus = _load_corpus(dump, strict=False)
    task = _resolve(args, "task", config)
    if task and task != corpus.task:
        raise DataError(
            f"--task {task} does not match corpus task {corpus.task}")
    aligned = alignment.read_aligned(aligned_path)
    if not aligned:
        raise DataError(f"no aligned samples in {aligned_path}")
    layers = parse_layer_selection(
        _resolve(args, "layers", config), aligned[0].num_layers)
    computed = _sample_metrics(corpus, language)
    strata = _stratify_corpus(corpus, computed)
    out_dir = Path(out)
    files = _strata_files(strata, aligned, layers, bins, out_dir)
    (out_dir / "histograms").mkdir(parents=True, exist_ok=True)
    for path, (header, rows) in files.items():
        _write_csv(path, header, rows)
    print(f"strata for {len(corpus)} record(s) -> {out_dir}")
    return EXIT_OK


def cmd_report(args, config) -> int:
    dump = _resolve(args, "dump", config)
    language = _resolve(args, "lang", config)
    out = _resolve(args, "out", config)
    if not dump or not language or not out:
        raise DataError("--dump, --lang and --out are required")
    strict = bool(args.strict or config.get("strict") == "true")
    k = int(_resolve(args, "k", config, 3))
    bins = int(_resolve(args, "bins", config, 10))

    corpus = _load_corpus(dump, strict=strict)
    task = _resolve(args, "task", config)
    if task and task != corpus.task:
        raise DataError(
            f"--task {task} does not match corpus task {corpus.task}")
    if not corpus.records:
        raise DataError("corpus is empty")

    aligned = _align_corpus(corpus, language)
    num_layers = aligned[0].num_layers
    layers = parse_layer_selection(_resolve(args, "layers", config), num_layers)

    rank_report = rank.rank_report(corpus, aligned, k=k, layers=layers)

    acc = attribution.accumulate(aligned)
    per_layer_all = attribution.profiles_per_layer(acc)
    per_layer = [per_layer_all[i] for i in layers]
    averaged = attribution.corpus_profile(aligned, layers=layers)

    computed = _sample_metrics(corpus, language)
    metrics_header, metrics_rows = _metrics_rows(corpus, language, computed)
    strata = _stratify_corpus(corpus, computed)

    out_dir = Path(out)
    strata_files = _strata_files(strata, aligned, layers, bins,
                                 out_dir / "strata")

    # hash semantic settings only, not paths: identical inputs and config
    # must reproduce identical bytes regardless of where files live
    config_payload = json.dumps({
        "lang": language, "task": corpus.task,
        "k": k, "bins": bins, "layers": layers, "strict": strict,
    }, sort_keys=True)
    config_hash = hashlib.sha256(config_payload.encode()).hexdigest()[:12]

    by_id = {r.id: r for r in corpus.records}
    heat_layer = layers[-1]
    fragments = []
    for sample in aligned:
        if sample.num_steps == 0 or not sample.code_tokens:
            continue
        fragments.append(heatmap.render_heatmap(
            sample, by_id[sample.record_id].source_text,
            layer=heat_layer, step=sample.num_steps - 1,
        ))
    html_page = heatmap.render_report(
        fragments, title=f"attnlens report ({corpus.task})",
        config_hash=config_hash,
    )

    # all computation done; write artifacts
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "strata" / "histograms").mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "rank.csv",
               ["layer", "mean_normalized_rank", "topk_hit_rate",
                "n_observations"],
               _rank_rows(rank_report))
    _write_csv(out_dir / "categories.csv",
               ["layer", "category", "raw_mass", "population", "per_token",
                "normalized_pct"],
               _category_rows(per_layer, layers, averaged))
    _write_csv(out_dir / "metrics.csv", metrics_header, metrics_rows)
    for path, (header, rows) in strata_files.items():
        _write_csv(path, header, rows)
    (out_dir / "report.html").write_text(html_page, encoding="utf-8")

    print(json.dumps({
        "records": len(corpus),
        "repeated_token_ratio": round(rank_report.repeated_token_ratio, 6),
        "artifacts": ["rank.csv", "categories.csv", "metrics.csv", "strata/",
                      "report.html"],
        "out": str(out_dir),
    }))
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attnlens",
        description="Attention analyses for encoder-decoder code models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="config file of key = value lines")

    p = sub.add_parser("validate", help="check a dump against the format")
    common(p)
    p.add_argument("--dump")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("align", help="re-aggregate attention onto code tokens")
    common(p)
    p.add_argument("--dump")
    p.add_argument("--lang", choices=("java", "python", "csharp"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("rank", help="copied-token attention ranks per layer")
    common(p)
    p.add_argument("--aligned")
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.add_argument("--weighting", choices=("observation", "sample"))
    p.add_argument("--layers")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("attribution", help="attention mass per token category")
    common(p)
    p.add_argument("--aligned")
    p.add_argument("--out")
    p.add_argument("--mode", choices=("corpus", "per_sample"))
    p.add_argument("--layers")
    p.set_defaults(func=cmd_attribution)

    p = sub.add_parser("metrics", help="per-sample accuracy and difficulty")
    common(p)
    p.add_argument("--dump")
    p.add_argument("--lang", choices=("java", "python", "csharp"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("stratify", help="difficulty/accuracy quadrants")
    common(p)
    p.add_argument("--dump")
    p.add_argument("--aligned")
    p.add_argument("--lang", choices=("java", "python", "csharp"))
    p.add_argument("--task", choices=("CDG", "CR", "CT"))
    p.add_argument("--out")
    p.add_argument("--bins", type=int)
    p.add_argument("--layers")
    p.set_defaults(func=cmd_stratify)

    p = sub.add_parser("report", help="run the whole pipeline")
    common(p)
    p.add_argument("--dump")
    p.add_argument("--lang", choices=("java", "python", "csharp"))
    p.add_argument("--task", choices=("CDG", "CR", "CT"))
    p.add_argument("--out")
    p.add_argument("--k", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--layers", help="all | last3 | comma-separated indices")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config: dict[str, str] = {}
    if getattr(args, "config", None):
        try:
            config = read_config_file(args.config)
        except (OSError, DataError) as exc:
            print(json.dumps({"error": {
                "type": type(exc).__name__, "message": str(exc),
            }}), file=sys.stderr)
            return EXIT_DATA
    try:
        return args.func(args, config)
    except (DataError, dumpio.DumpFormatError, ParseError,
            alignment.AlignmentError, attribution.DegenerateProfileError,
            ValueError, OSError) as exc:
        print(json.dumps({"error": {
            "type": type(exc).__name__,
            "message": str(exc),
        }}), file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
