"""Deterministic English lemmatizer for gold-document preprocessing.

Lookup in a bundled inflection table first, then simple suffix rules for
regular plurals, -ing and -ed forms. Behavior is pinned by golden tests;
no external lemmatizer dependency.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

_VOWELS = set("aeiou")


@lru_cache(maxsize=1)
def _table() -> dict[str, str]:
    text = resources.files("attnlens").joinpath("data/lemmas.txt").read_text("utf-8")
    table: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        inflection, lemma = line.split()
        table[inflection] = lemma
    return table


def _undouble(stem: str) -> str:
    if (
        len(stem) >= 3
        and stem[-1] == stem[-2]
        and stem[-1] not in _VOWELS
        and stem[-1] not in "ls"
    ):
        return stem[:-1]
    return stem


def lemmatize(word: str) -> str:
    """Lemma of a lowercase word."""
    table = _table()
    if word in table:
        return table[word]

    if word.endswith("ied") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith(("ches", "shes", "xes", "zes")) and len(word) > 4:
        return word[:-2]
    if word.endswith(("ss", "us", "is")):
        return word
    if word.endswith("s") and len(word) > 3:
        return word[:-1]

    if word.endswith("ing") and len(word) > 5:
        return _undouble(word[:-3])
    if word.endswith("eed"):
        return word[:-1]
    if word.endswith("ed") and len(word) > 4:
        return _undouble(word[:-2])
    return word
