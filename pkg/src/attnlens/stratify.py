"""Difficulty/accuracy stratification and failure-quadrant analysis.

Samples split into terciles on a difficulty metric (edit distance for
code-to-code tasks, gold-document overlap for document generation) and on
BLEU. The crossing of the outer terciles yields four quadrants; samples in
a middle tercile on either axis are Mid. Boundary ties resolve by sample
id so runs are reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .attribution import HighLevelProfile
from .tokens import ComplexityProfile


class QuadrantLabel(enum.Enum):
    EASY_HIGH = "EasyHigh"
    EASY_LOW = "EasyLow"
    HARD_HIGH = "HardHigh"
    HARD_LOW = "HardLow"
    MID = "Mid"


LOW_IS_EASY = "low_is_easy"
HIGH_IS_EASY = "high_is_easy"


def tercile_split(
    values: list[float],
    direction: str,
    ids: list[str] | None = None,
) -> list[str]:
    """Label each value 'easy', 'mid', or 'hard'.

    The floor(n/3) most favorable values (smallest under low_is_easy,
    largest under high_is_easy) are easy, the floor(n/3) least favorable
    are hard, the remainder mid. Ties break by ascending id.
    """
    if direction not in (LOW_IS_EASY, HIGH_IS_EASY):
        raise ValueError(f"unknown direction {direction!r}")
    n = len(values)
    if n < 3:
        raise ValueError(f"need at least 3 samples to split, got {n}")
    if ids is None:
        ids = [str(i) for i in range(n)]
    if len(ids) != n:
        raise ValueError("ids and values length mismatch")

    sign = 1.0 if direction == LOW_IS_EASY else -1.0
    order = sorted(range(n), key=lambda i: (sign * values[i], ids[i]))
    third = n // 3
    labels = [""] * n
    for pos, i in enumerate(order):
        if pos < third:
            labels[i] = "easy"
        elif pos >= n - third:
            labels[i] = "hard"
        else:
            labels[i] = "mid"
    return labels


@dataclass
class SampleStratum:
    id: str
    difficulty_value: float
    bleu: float
    difficulty_tercile: str  # easy / mid / hard
    accuracy_tercile: str    # high / mid / low
    quadrant: QuadrantLabel
    complexity: ComplexityProfile


@dataclass
class StratifiedCorpus:
    task: str
    difficulty_direction: str
    samples: list[SampleStratum]
    difficulty_thresholds: tuple[float, float]
    bleu_thresholds: tuple[float, float]
    quadrant_counts: dict[QuadrantLabel, int] = field(default_factory=dict)

    def subset_ids(self, quadrant: QuadrantLabel) -> list[str]:
        return [s.id for s in self.samples if s.quadrant == quadrant]


def _thresholds(values: list[float], labels: list[str], easy_label: str,
                hard_label: str) -> tuple[float, float]:
    easy_vals = [v for v, l in zip(values, labels) if l == easy_label]
    hard_vals = [v for v, l in zip(values, labels) if l == hard_label]
    lo = max(easy_vals) if easy_vals else float("nan")
    hi = min(hard_vals) if hard_vals else float("nan")
    return lo, hi


def difficulty_direction_for_task(task: str) -> str:
    """Small edit distance is easy for CR/CT; large overlap is easy for CDG."""
    return HIGH_IS_EASY if task == "CDG" else LOW_IS_EASY


def label_quadrants(
    ids: list[str],
    difficulty_values: list[float],
    bleu_values: list[float],
    complexities: list[ComplexityProfile],
    task: str,
) -> StratifiedCorpus:
    n = len(ids)
    if not (len(difficulty_values) == len(bleu_values) == len(complexities) == n):
        raise ValueError("per-sample metric lists must be the same length")
    direction = difficulty_direction_for_task(task)

    diff_labels = tercile_split(difficulty_values, direction, ids)
    # accuracy axis: the favorable third has the highest BLEU
    acc_raw = tercile_split(bleu_values, HIGH_IS_EASY, ids)
    acc_labels = [
        {"easy": "high", "mid": "mid", "hard": "low"}[l] for l in acc_raw
    ]

    samples = []
    counts = {q: 0 for q in QuadrantLabel}
    for i in range(n):
        d, a = diff_labels[i], acc_labels[i]
        if d == "mid" or a == "mid":
            quadrant = QuadrantLabel.MID
        else:
            quadrant = {
                ("easy", "high"): QuadrantLabel.EASY_HIGH,
                ("easy", "low"): QuadrantLabel.EASY_LOW,
                ("hard", "high"): QuadrantLabel.HARD_HIGH,
                ("hard", "low"): QuadrantLabel.HARD_LOW,
            }[(d, a)]
        counts[quadrant] += 1
        samples.append(
            SampleStratum(
                id=ids[i],
                difficulty_value=difficulty_values[i],
                bleu=bleu_values[i],
                difficulty_tercile=d,
                accuracy_tercile=a,
                quadrant=quadrant,
                complexity=complexities[i],
            )
        )

    return StratifiedCorpus(
        task=task,
        difficulty_direction=direction,
        samples=samples,
        difficulty_thresholds=_thresholds(difficulty_values, diff_labels,
                                          "easy", "hard"),
        bleu_thresholds=_thresholds(bleu_values, acc_labels, "high", "low"),
        quadrant_counts=counts,
    )


@dataclass
class PairedHistogram:
    metric: str
    bin_edges: np.ndarray
    whole_density: np.ndarray
    subset_density: np.ndarray
    n_whole: int
    n_subset: int

    @property
    def empty_subset(self) -> bool:
        return self.n_subset == 0


METRIC_EXTRACTORS = {
    "difficulty": lambda s: s.difficulty_value,
    "bleu": lambda s: s.bleu,
    "n_tokens": lambda s: float(s.complexity.n_tokens),
    "cyclomatic": lambda s: float(s.complexity.cyclomatic),
    "nested_block_depth": lambda s: float(s.complexity.nested_block_depth),
    "n_variables": lambda s: float(s.complexity.n_variables),
}


def distribution_compare(
    metric: str,
    whole: StratifiedCorpus,
    subset: QuadrantLabel = QuadrantLabel.EASY_LOW,
    bins: int = 10,
) -> PairedHistogram:
    """Density histograms of a metric over the whole corpus and a quadrant
    subset, on identical bin edges."""
    if metric not in METRIC_EXTRACTORS:
        raise ValueError(f"unknown metric {metric!r}")
    extract = METRIC_EXTRACTORS[metric]
    whole_vals = np.array([extract(s) for s in whole.samples], dtype=np.float64)
    subset_vals = np.array(
        [extract(s) for s in whole.samples if s.quadrant == subset],
        dtype=np.float64,
    )
    lo, hi = float(whole_vals.min()), float(whole_vals.max())
    if lo == hi:
        hi = lo + 1.0  # single-bin spike; keep edges well-formed
    edges = np.linspace(lo, hi, bins + 1)
    whole_density, _ = np.histogram(whole_vals, bins=edges, density=True)
    if subset_vals.size:
        subset_density, _ = np.histogram(subset_vals, bins=edges, density=True)
    else:
        subset_density = np.zeros(bins)
    return PairedHistogram(
        metric=metric,
        bin_edges=edges,
        whole_density=whole_density,
        subset_density=subset_density,
        n_whole=int(whole_vals.size),
        n_subset=int(subset_vals.size),
    )


def category_attention_delta(
    profiles_all: HighLevelProfile, profiles_subset: HighLevelProfile
) -> dict[str, float]:
    """Subset minus whole, per high-level category. Negative means the
    subset pays less attention to that group."""
    return {
        "naming": profiles_subset.naming_pct - profiles_all.naming_pct,
        "structural": profiles_subset.structural_pct - profiles_all.structural_pct,
        "others": profiles_subset.others_pct - profiles_all.others_pct,
    }
