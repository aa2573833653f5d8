"""Copied-token attention ranks: how highly does the model attend to an
input code token equal to the token it just generated?

For each (layer, output step) where the generated token has a
case-insensitive equal input code token, all input tokens are ranked by
attention (descending, ties by ascending token index) and the best rank
among the matching tokens is recorded. normalized_rank is
100 * (rank - 1) / n_input_tokens, so a unique top token scores 0.
Steps with no matching input token produce no observation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alignment import AlignedSample
from .dumpio import Corpus


def _norm(text: str) -> str:
    return text.strip().casefold()


@dataclass(frozen=True)
class RankObservation:
    record_id: str
    layer: int
    step: int
    matched_token_index: int
    rank_1based: int
    normalized_rank: float
    n_input_tokens: int


@dataclass
class LayerRankStats:
    layer: int
    mean_normalized_rank: float | None  # None marks a layer with no observations
    topk_hit_rate: float | None
    n_observations: int


@dataclass
class RankReport:
    k: int
    layers: list[LayerRankStats] = field(default_factory=list)
    repeated_token_ratio: float = 0.0
    n_observations: int = 0

    @property
    def empty(self) -> bool:
        return self.n_observations == 0


def repeated_token_ratio(corpus: Corpus | None, aligned: list[AlignedSample]) -> float:
    """Fraction of output steps whose generated token also exists among the
    input code tokens (case-insensitive). Aligned samples carry the output
    steps; when a corpus is given it must cover every aligned record."""
    if corpus is not None:
        by_id = {r.id: r for r in corpus.records}
        for sample in aligned:
            if sample.record_id not in by_id:
                raise KeyError(f"no corpus record for sample {sample.record_id!r}")
    total = 0
    repeated = 0
    for sample in aligned:
        input_texts = {_norm(t.text) for t in sample.code_tokens}
        for step_text in sample.output_steps:
            total += 1
            if _norm(step_text) in input_texts:
                repeated += 1
    return repeated / total if total else 0.0


def _ranks_for_row(row: np.ndarray) -> np.ndarray:
    """1-based rank of every position under descending score, ties broken
    by ascending position."""
    order = np.lexsort((np.arange(len(row)), -row))
    ranks = np.empty(len(row), dtype=np.int64)
    ranks[order] = np.arange(1, len(row) + 1)
    return ranks


def rank_observations(aligned: AlignedSample) -> list[RankObservation]:
    out: list[RankObservation] = []
    n_tokens = len(aligned.code_tokens)
    if n_tokens == 0:
        return out
    token_norms = [_norm(t.text) for t in aligned.code_tokens]
    matches_by_step: list[np.ndarray] = []
    for step_text in aligned.output_steps:
        target = _norm(step_text)
        matches_by_step.append(
            np.array([i for i, t in enumerate(token_norms) if t == target],
                     dtype=np.int64)
        )
    for layer in range(aligned.num_layers):
        for step in range(aligned.num_steps):
            matches = matches_by_step[step]
            if matches.size == 0:
                continue
            ranks = _ranks_for_row(aligned.attention[layer, step])
            pos = int(np.argmin(ranks[matches]))
            best_idx = int(matches[pos])
            best_rank = int(ranks[best_idx])
            out.append(
                RankObservation(
                    record_id=aligned.record_id,
                    layer=layer,
                    step=step,
                    matched_token_index=best_idx,
                    rank_1based=best_rank,
                    normalized_rank=100.0 * (best_rank - 1) / n_tokens,
                    n_input_tokens=n_tokens,
                )
            )
    return out


def rank_report(
    corpus: Corpus | None,
    aligned: list[AlignedSample],
    k: int = 3,
    weighting: str = "observation",
    layers: list[int] | None = None,
) -> RankReport:
    """Aggregate rank observations per layer.

    ``weighting='observation'`` averages over all observations;
    ``'sample'`` first averages within each sample, then across samples.
    """
    if weighting not in ("observation", "sample"):
        raise ValueError(f"unknown weighting {weighting!r}")
    if not aligned:
        raise ValueError("no aligned samples")
    n_layers = aligned[0].num_layers
    for a in aligned:
        if a.num_layers != n_layers:
            raise ValueError(
                f"record {a.record_id!r} has {a.num_layers} layers, "
                f"expected {n_layers}"
            )
    selected = list(range(n_layers)) if layers is None else list(layers)
    for layer in selected:
        if not 0 <= layer < n_layers:
            raise ValueError(f"layer {layer} outside [0, {n_layers})")

    per_sample = [rank_observations(a) for a in aligned]
    all_obs = [o for obs in per_sample for o in obs]

    report = RankReport(k=k, n_observations=len(all_obs))
    report.repeated_token_ratio = repeated_token_ratio(corpus, aligned)

    for layer in selected:
        if weighting == "observation":
            layer_obs = [o for o in all_obs if o.layer == layer]
            if layer_obs:
                mean = float(np.mean([o.normalized_rank for o in layer_obs]))
                hit = float(np.mean([o.rank_1based <= k for o in layer_obs]))
            else:
                mean, hit = None, None
            n = len(layer_obs)
        else:
            means, hits, n = [], [], 0
            for obs in per_sample:
                layer_obs = [o for o in obs if o.layer == layer]
                if not layer_obs:
                    continue
                means.append(np.mean([o.normalized_rank for o in layer_obs]))
                hits.append(np.mean([o.rank_1based <= k for o in layer_obs]))
                n += len(layer_obs)
            mean = float(np.mean(means)) if means else None
            hit = float(np.mean(hits)) if hits else None
        report.layers.append(
            LayerRankStats(
                layer=layer,
                mean_normalized_rank=mean,
                topk_hit_rate=hit,
                n_observations=n,
            )
        )
    return report
