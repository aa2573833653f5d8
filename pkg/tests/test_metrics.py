import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attnlens.lemma import lemmatize
from attnlens.metrics import (
    bleu4,
    bleu_tokenize,
    doc_overlap,
    edit_distance_difficulty,
    levenshtein,
    modified_precision,
    normalize_whitespace,
    preprocess_doc,
)
from attnlens.tokens import CodeToken


def naive_levenshtein(a: str, b: str) -> int:
    """Plain exponential recursion; the independent oracle."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    cost = 0 if a[0] == b[0] else 1
    return min(
        naive_levenshtein(a[1:], b) + 1,
        naive_levenshtein(a, b[1:]) + 1,
        naive_levenshtein(a[1:], b[1:]) + cost,
    )


def brute_force_precision(cand: list[str], ref: list[str], n: int):
    """Count clipped n-gram matches by direct enumeration."""
    cand_grams = [tuple(cand[i:i + n]) for i in range(len(cand) - n + 1)]
    ref_grams = [tuple(ref[i:i + n]) for i in range(len(ref) - n + 1)]
    matches = 0
    pool = list(ref_grams)
    for gram in cand_grams:
        if gram in pool:
            pool.remove(gram)
            matches += 1
    return matches, len(cand_grams)


class TestLevenshtein:
    def test_empty_vs_abc(self):
        assert levenshtein("", "abc") == 3

    def test_identity(self):
        assert levenshtein("same", "same") == 0

    def test_kitten_sitting(self):
        assert naive_levenshtein("kitten", "sitting") == 3
        assert levenshtein("kitten", "sitting") == 3

    def test_against_naive_oracle(self):
        rng = random.Random(7)
        for _ in range(1000):
            a = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 8)))
            b = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 8)))
            assert levenshtein(a, b) == naive_levenshtein(a, b), (a, b)

    def test_metric_properties(self):
        rng = random.Random(11)
        alphabet = string.ascii_lowercase[:6]
        for _ in range(10000):
            a, b, c = (
                "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 10)))
                for _ in range(3)
            )
            dab, dba = levenshtein(a, b), levenshtein(b, a)
            assert dab == dba
            assert levenshtein(a, a) == 0
            assert levenshtein(a, c) <= dab + levenshtein(b, c)

    @given(st.text(max_size=30), st.text(max_size=30))
    @settings(max_examples=200, deadline=None)
    def test_bounds(self, a, b):
        d = levenshtein(a, b)
        assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))

    def test_difficulty_whitespace_normalized(self):
        assert edit_distance_difficulty("a  b\n c", "a b c") == 0
        assert edit_distance_difficulty("x y", "x z") == 1

    def test_difficulty_token_unit(self):
        assert edit_distance_difficulty("a b c", "a c", unit="token") == 1


class TestBleu:
    def test_identical_strings(self):
        assert bleu4("the same text here", "the same text here").value == 1.0
        assert bleu4("one", "one", smoothed=False).value == 1.0

    def test_empty_candidate(self):
        score = bleu4("", "reference text")
        assert score.value == 0.0
        assert score.empty_candidate

    def test_zero_unigram_overlap_unsmoothed(self):
        assert bleu4("aa bb cc dd", "xx yy zz ww", smoothed=False).value == 0.0

    def test_paper_anchor_deletes(self):
        score = bleu4("Deletes a function .",
                      "Deletes the specified Cloud Function .")
        assert score.value == pytest.approx(0.27, abs=0.05)

    def test_paper_anchor_parse(self):
        score = bleu4(
            "Parse a dict of headers",
            "Parse the cache control headers returning a dictionary with "
            "values for the different directives .",
        )
        assert score.value == pytest.approx(0.08, abs=0.05)

    def test_value_in_unit_interval(self):
        rng = random.Random(3)
        words = ["alpha", "beta", "gamma", "delta", "eps"]
        for _ in range(300):
            cand = " ".join(rng.choices(words, k=rng.randint(1, 8)))
            ref = " ".join(rng.choices(words, k=rng.randint(1, 8)))
            for smoothed in (False, True):
                v = bleu4(cand, ref, smoothed=smoothed).value
                assert 0.0 <= v <= 1.0

    def test_precisions_match_brute_force(self):
        rng = random.Random(5)
        vocab = ["a", "b", "c", "dd", "ee"]
        for _ in range(200):
            cand = rng.choices(vocab, k=rng.randint(1, 10))
            ref = rng.choices(vocab, k=rng.randint(1, 10))
            for n in range(1, 5):
                assert modified_precision(cand, ref, n) == \
                    brute_force_precision(cand, ref, n)

    def test_tokenization_splits_punctuation(self):
        assert bleu_tokenize("Deletes a function.") == \
            ["deletes", "a", "function", "."]
        assert bleu_tokenize("  Mixed  CASE ,ok? ") == \
            ["mixed", "case", ",", "ok", "?"]


class TestLemma:
    @pytest.mark.parametrize("word,lemma", [
        ("deletes", "delete"),
        ("specified", "specify"),
        ("files", "file"),
        ("file", "file"),
        ("classes", "class"),
        ("directories", "directory"),
        ("running", "run"),
        ("returning", "return"),
        ("parsing", "parse"),
        ("parsed", "parse"),
        ("was", "be"),
        ("children", "child"),
        ("status", "status"),
        ("the", "the"),
    ])
    def test_golden_lemmas(self, word, lemma):
        assert lemmatize(word) == lemma


class TestPreprocessDoc:
    def test_short_tokens_dropped(self):
        assert preprocess_doc("a an of to") == set()

    def test_fig5_gold_document(self):
        got = preprocess_doc("Deletes the specified Cloud Function .")
        assert got == {"delete", "the", "specify", "cloud", "function"}

    def test_plural_collapse(self):
        assert preprocess_doc("files file") == {"file"}

    def test_punctuation_stripped_before_length(self):
        assert preprocess_doc("ok!!, it?") == set()  # ok->2, it->2
        assert preprocess_doc("ran...") == {"run"}


def _tokens(texts):
    out = []
    pos = 0
    for i, t in enumerate(texts):
        out.append(CodeToken(t, pos, pos + len(t), i))
        pos += len(t) + 1
    return out


class TestDocOverlap:
    def test_all_present(self):
        tokens = _tokens(["delete", "the", "specify", "cloud", "function"])
        assert doc_overlap("Deletes the specified Cloud Function .",
                           tokens).value == 1.0

    def test_disjoint(self):
        tokens = _tokens(["alpha", "beta"])
        assert doc_overlap("Deletes the specified Cloud Function .",
                           tokens).value == 0.0

    def test_two_of_five(self):
        tokens = _tokens(["cloud", "function", "unrelated"])
        score = doc_overlap("Deletes the specified Cloud Function .", tokens)
        assert score.value == pytest.approx(0.4)
        assert score.matched == frozenset({"cloud", "function"})

    def test_empty_gold_marker(self):
        score = doc_overlap("a b c", _tokens(["abc"]))
        assert score.value == 0.0
        assert score.empty_gold

    def test_monotone_in_code_tokens(self):
        gold = "Deletes the specified Cloud Function ."
        base = _tokens(["cloud"])
        more = _tokens(["cloud", "function"])
        assert doc_overlap(gold, more).value >= doc_overlap(gold, base).value

    def test_case_insensitive(self):
        tokens = _tokens(["CLOUD", "Function"])
        assert doc_overlap("cloud function okay", tokens).value == \
            pytest.approx(2 / 3)


class TestNormalizeWhitespace:
    def test_runs_collapse(self):
        assert normalize_whitespace("a\t\tb \n c") == "a b c"
