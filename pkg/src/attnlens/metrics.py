"""Accuracy and difficulty metrics: BLEU-4 (plain and smoothed),
Levenshtein distance, and gold-document / code-token overlap.

BLEU-4 follows the geometric mean of modified n-gram precisions with
equal weights and the standard brevity penalty. Tokenization lowercases
and splits punctuation from word characters. Smoothing adds one to the
numerator and denominator of any n>=2 precision whose match count is
zero; orders with no candidate n-grams contribute a neutral precision
of 1. These choices are locked by the two figure-anchor acceptance pairs.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from .lemma import lemmatize
from .tokens import CodeToken

_TOKEN_RE = re.compile(r"\w+|[^\s\w]")


@dataclass(frozen=True)
class BleuScore:
    value: float
    smoothed: bool
    empty_candidate: bool = False
    n_max: int = 4


@dataclass(frozen=True)
class OverlapScore:
    value: float
    gold_tokens_used: frozenset[str]
    matched: frozenset[str]
    empty_gold: bool = False


def bleu_tokenize(text: str) -> list[str]:
    """Lowercase and split into word and single-punctuation tokens."""
    return _TOKEN_RE.findall(text.strip().lower())


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(
    candidate: list[str], reference: list[str], n: int
) -> tuple[int, int]:
    """(clipped match count, candidate n-gram count) for one order."""
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    matches = sum(min(count, ref[gram]) for gram, count in cand.items())
    guesses = max(0, len(candidate) - n + 1)
    return matches, guesses


def bleu4(candidate: str, reference: str, smoothed: bool = True) -> BleuScore:
    """Sentence-level BLEU-4 against a single reference."""
    cand = bleu_tokenize(candidate)
    ref = bleu_tokenize(reference)
    if not cand:
        return BleuScore(value=0.0, smoothed=smoothed, empty_candidate=True)

    log_sum = 0.0
    for n in range(1, 5):
        matches, guesses = modified_precision(cand, ref, n)
        if guesses == 0:
            precision = 1.0  # candidate too short for this order
        elif matches == 0:
            if smoothed and n >= 2:
                precision = 1.0 / (guesses + 1)
            else:
                return BleuScore(value=0.0, smoothed=smoothed)
        else:
            precision = matches / guesses
        log_sum += math.log(precision)
    geo_mean = math.exp(log_sum / 4.0)

    c, r = len(cand), len(ref)
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return BleuScore(value=geo_mean * brevity, smoothed=smoothed)


def levenshtein(a: str, b: str) -> int:
    """Minimum single-character insertions/deletions/substitutions."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,        # deletion
                    current[j - 1] + 1,     # insertion
                    previous[j - 1] + (ca != cb),  # substitution
                )
            )
        previous = current
    return previous[-1]


_WS_RUN = re.compile(r"\s+")


def normalize_whitespace(text: str) -> str:
    return _WS_RUN.sub(" ", text.strip())


def edit_distance_difficulty(source: str, gold: str, unit: str = "char") -> int:
    """Levenshtein distance between whitespace-normalized source and gold.

    unit='char' (default) compares character sequences; unit='token'
    compares whitespace-separated token sequences.
    """
    if unit == "char":
        return levenshtein(normalize_whitespace(source), normalize_whitespace(gold))
    if unit == "token":
        return _levenshtein_seq(source.split(), gold.split())
    raise ValueError(f"unknown unit {unit!r}")


def _levenshtein_seq(a: list[str], b: list[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, xa in enumerate(a, start=1):
        current = [i]
        for j, xb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1,
                    previous[j - 1] + (xa != xb))
            )
        previous = current
    return previous[-1]


_PUNCT_STRIP = re.compile(r"[^\w]+")


def preprocess_doc(gold_text: str) -> set[str]:
    """Lemma set of a gold document: split on whitespace, strip punctuation
    characters, drop tokens shorter than 3 characters, lowercase,
    lemmatize."""
    out: set[str] = set()
    for raw in gold_text.split():
        stripped = _PUNCT_STRIP.sub("", raw)
        if len(stripped) < 3:
            continue
        out.add(lemmatize(stripped.lower()))
    return out


def doc_overlap(gold_text: str, code_tokens: list[CodeToken]) -> OverlapScore:
    """Share of gold-document lemmas that appear among the (lowercased)
    code token texts."""
    gold = preprocess_doc(gold_text)
    if not gold:
        return OverlapScore(
            value=0.0, gold_tokens_used=frozenset(), matched=frozenset(),
            empty_gold=True,
        )
    code = {t.text.lower() for t in code_tokens}
    matched = frozenset(gold & code)
    return OverlapScore(
        value=len(matched) / len(gold),
        gold_tokens_used=frozenset(gold),
        matched=matched,
    )
