"""Per-category attention attribution.

Attention mass is accumulated per token category over all samples and
output steps, then normalized by the category's corpus-wide token
population to give a per-token score, and finally rescaled so all
categories sum to 100. The three name-like categories roll up into
Naming, the three structure-like ones into Structural.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import AlignedSample
from .tokens import ALL_CATEGORIES, NAMING_CATEGORIES, STRUCTURAL_CATEGORIES, Category


class DegenerateProfileError(ValueError):
    """Every category has zero per-token mass; nothing to normalize."""


@dataclass
class CategoryProfile:
    raw_mass: dict[Category, float]
    population: dict[Category, int]
    per_token: dict[Category, float]
    normalized_pct: dict[Category, float]


@dataclass
class HighLevelProfile:
    naming_pct: float
    structural_pct: float
    others_pct: float


@dataclass
class AccumulatedMass:
    """Raw per-layer mass and corpus populations, before normalization."""

    raw_mass: dict[Category, np.ndarray]  # category -> [num_layers]
    population: dict[Category, int]
    orphan_mass: np.ndarray               # [num_layers]
    num_layers: int


def accumulate(aligned: list[AlignedSample]) -> AccumulatedMass:
    """Sum attention per category per layer; count token populations.

    Populations count token occurrences once per sample, not per output
    step. Orphan (unmapped subword) mass is tracked separately and never
    enters a category.
    """
    if not aligned:
        raise ValueError("no aligned samples")
    num_layers = aligned[0].num_layers
    for a in aligned:
        if a.num_layers != num_layers:
            raise ValueError(
                f"record {a.record_id!r} has {a.num_layers} layers, "
                f"expected {num_layers}"
            )
        for tok in a.code_tokens:
            if tok.category is None:
                raise ValueError(
                    f"record {a.record_id!r}: token {tok.index} has no category"
                )

    raw = {c: np.zeros(num_layers) for c in ALL_CATEGORIES}
    population = {c: 0 for c in ALL_CATEGORIES}
    orphan = np.zeros(num_layers)

    for sample in aligned:
        cats = [t.category for t in sample.code_tokens]
        for c in ALL_CATEGORIES:
            mask = np.array([cat is c for cat in cats], dtype=bool)
            population[c] += int(mask.sum())
            if mask.any() and sample.attention.size:
                # sum over steps and member tokens, keep layers
                raw[c] += sample.attention[:, :, mask].sum(axis=(1, 2))
        if sample.orphan_mass.size:
            orphan += sample.orphan_mass.sum(axis=1)

    return AccumulatedMass(
        raw_mass=raw, population=population, orphan_mass=orphan,
        num_layers=num_layers,
    )


def normalize(
    raw_mass: dict[Category, float], population: dict[Category, int]
) -> CategoryProfile:
    """Population-normalize one layer's raw mass into percentage shares."""
    per_token = {}
    for c in ALL_CATEGORIES:
        pop = population.get(c, 0)
        if pop < 0:
            raise ValueError(f"negative population for {c.value}")
        mass = float(raw_mass.get(c, 0.0))
        per_token[c] = mass / pop if pop > 0 else 0.0
    total = sum(per_token.values())
    if total <= 0.0:
        raise DegenerateProfileError("all per-token masses are zero")
    normalized = {c: 100.0 * per_token[c] / total for c in ALL_CATEGORIES}
    return CategoryProfile(
        raw_mass={c: float(raw_mass.get(c, 0.0)) for c in ALL_CATEGORIES},
        population={c: int(population.get(c, 0)) for c in ALL_CATEGORIES},
        per_token=per_token,
        normalized_pct=normalized,
    )


def profiles_per_layer(acc: AccumulatedMass) -> list[CategoryProfile]:
    return [
        normalize({c: acc.raw_mass[c][layer] for c in ALL_CATEGORIES},
                  acc.population)
        for layer in range(acc.num_layers)
    ]


def layer_average(profiles: list[CategoryProfile]) -> CategoryProfile:
    """Mean of normalized shares across layers, re-normalized to 100.

    raw_mass/per_token of the averaged profile are layer means for
    reporting; its normalized_pct comes from averaging shares, not from
    re-deriving them.
    """
    if not profiles:
        raise ValueError("no layer profiles")
    mean_pct = {
        c: float(np.mean([p.normalized_pct[c] for p in profiles]))
        for c in ALL_CATEGORIES
    }
    total = sum(mean_pct.values())
    if total <= 0:
        raise DegenerateProfileError("averaged shares sum to zero")
    normalized = {c: 100.0 * v / total for c, v in mean_pct.items()}
    return CategoryProfile(
        raw_mass={
            c: float(np.mean([p.raw_mass[c] for p in profiles]))
            for c in ALL_CATEGORIES
        },
        population=dict(profiles[0].population),
        per_token={
            c: float(np.mean([p.per_token[c] for p in profiles]))
            for c in ALL_CATEGORIES
        },
        normalized_pct=normalized,
    )


def rollup(profile: CategoryProfile) -> HighLevelProfile:
    naming = sum(profile.normalized_pct[c] for c in NAMING_CATEGORIES)
    structural = sum(profile.normalized_pct[c] for c in STRUCTURAL_CATEGORIES)
    others = profile.normalized_pct[Category.OTHER]
    return HighLevelProfile(
        naming_pct=naming, structural_pct=structural, others_pct=others
    )


def corpus_profile(
    aligned: list[AlignedSample],
    mode: str = "corpus",
    layers: list[int] | None = None,
) -> CategoryProfile:
    """Layer-averaged category profile of a corpus.

    mode='corpus' normalizes corpus-global sums by corpus-global
    populations (the default); mode='per_sample' normalizes each sample
    separately and averages the shares, for sensitivity checks.
    """
    if mode == "corpus":
        acc = accumulate(aligned)
        per_layer = profiles_per_layer(acc)
        if layers is not None:
            per_layer = [per_layer[i] for i in layers]
        return layer_average(per_layer)
    if mode == "per_sample":
        sample_profiles = []
        for sample in aligned:
            acc = accumulate([sample])
            per_layer = profiles_per_layer(acc)
            if layers is not None:
                per_layer = [per_layer[i] for i in layers]
            sample_profiles.append(layer_average(per_layer))
        mean_pct = {
            c: float(np.mean([p.normalized_pct[c] for p in sample_profiles]))
            for c in ALL_CATEGORIES
        }
        total = sum(mean_pct.values())
        normalized = {c: 100.0 * v / total for c, v in mean_pct.items()}
        merged = CategoryProfile(
            raw_mass={
                c: float(np.sum([p.raw_mass[c] for p in sample_profiles]))
                for c in ALL_CATEGORIES
            },
            population={
                c: int(np.sum([p.population[c] for p in sample_profiles]))
                for c in ALL_CATEGORIES
            },
            per_token={
                c: float(np.mean([p.per_token[c] for p in sample_profiles]))
                for c in ALL_CATEGORIES
            },
            normalized_pct=normalized,
        )
        return merged
    raise ValueError(f"unknown normalization mode {mode!r}")
