"""attnlens: attention-based explainability analyses for seq2seq code models.

Consumes attention dumps (source, gold, prediction, per-layer cross
attention), re-aggregates subword attention onto parser-level code tokens,
and reproduces three corpus analyses: copied-token attention ranks,
per-category attention attribution, and difficulty/accuracy failure
stratification.
"""

from .alignment import AlignedSample, align, map_subwords
from .attribution import (
    CategoryProfile,
    HighLevelProfile,
    accumulate,
    layer_average,
    normalize,
    rollup,
)
from .dumpio import (
    Corpus,
    DumpFormatError,
    SampleRecord,
    SubwordToken,
    Violation,
    parse_dump,
    validate_record,
    write_dump,
)
from .metrics import BleuScore, OverlapScore, bleu4, doc_overlap, levenshtein, preprocess_doc
from .parsing import (
    Category,
    CodeToken,
    ComplexityProfile,
    ParseError,
    categorize,
    complexity_metrics,
    tokenize,
)
from .rank import RankObservation, RankReport, rank_observations, rank_report, repeated_token_ratio
from .stratify import (
    QuadrantLabel,
    StratifiedCorpus,
    category_attention_delta,
    distribution_compare,
    label_quadrants,
    tercile_split,
)

__version__ = "0.1.0"

__all__ = [
    "AlignedSample",
    "BleuScore",
    "Category",
    "CategoryProfile",
    "CodeToken",
    "ComplexityProfile",
    "Corpus",
    "DumpFormatError",
    "HighLevelProfile",
    "OverlapScore",
    "ParseError",
    "QuadrantLabel",
    "RankObservation",
    "RankReport",
    "SampleRecord",
    "StratifiedCorpus",
    "SubwordToken",
    "Violation",
    "accumulate",
    "align",
    "bleu4",
    "categorize",
    "category_attention_delta",
    "complexity_metrics",
    "distribution_compare",
    "doc_overlap",
    "label_quadrants",
    "layer_average",
    "levenshtein",
    "map_subwords",
    "normalize",
    "parse_dump",
    "preprocess_doc",
    "rank_observations",
    "rank_report",
    "repeated_token_ratio",
    "rollup",
    "tercile_split",
    "tokenize",
    "validate_record",
    "write_dump",
]
