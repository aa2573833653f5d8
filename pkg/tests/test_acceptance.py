"""Acceptance gate: every criterion at its stated tolerance, one visible
pass/fail line each. Run with plain pytest; lines print unbuffered."""

import random
import time
from pathlib import Path

import numpy as np
import pytest

from attnlens.alignment import align, align_corpus, map_subwords
from attnlens.attribution import accumulate, profiles_per_layer, rollup, corpus_profile
from attnlens.cli import main as cli_main
from attnlens.dumpio import SubwordToken, parse_dump
from attnlens.metrics import bleu4, levenshtein, modified_precision
from attnlens.parsing import categorize
from attnlens.parsing.keywords import JAVA_CONTROL_KEYWORDS, JAVA_LEXER_KEYWORDS
from attnlens.rank import rank_observations, rank_report
from attnlens.stratify import QuadrantLabel, category_attention_delta, label_quadrants
from attnlens.tokens import ALL_CATEGORIES, Category, ComplexityProfile

from conftest import make_aligned, make_record
from test_metrics import brute_force_precision, naive_levenshtein
from test_rank import oracle_rank

FIXTURE = Path(__file__).parent / "fixtures" / "mini_cr.jsonl"
GOLDEN = Path(__file__).parent / "golden" / "report"


@pytest.fixture
def announce(capsys, request):
    """Prints one PASS/FAIL line per criterion, bypassing capture."""
    yield
    with capsys.disabled():
        report = getattr(request.node, "rep_call", None)
        outcome = "PASS" if report is not None and report.passed else "FAIL"
        name = request.node.name.replace("test_", "", 1)
        print(f"[acceptance] {outcome}: {name}")


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False


class TestAcceptance:
    def test_bleu_anchor_deletes_function(self, announce):
        score = bleu4("Deletes a function .",
                      "Deletes the specified Cloud Function .")
        assert score.value == pytest.approx(0.27, abs=0.05), score.value

    def test_bleu_anchor_parse_headers(self, announce):
        score = bleu4(
            "Parse a dict of headers",
            "Parse the cache control headers returning a dictionary with "
            "values for the different directives .",
        )
        assert score.value == pytest.approx(0.08, abs=0.05), score.value

    def test_levenshtein_oracle(self, announce):
        with _Timer() as t:
            rng = random.Random(101)
            for _ in range(1000):
                a = "".join(rng.choice("abcde") for _ in range(rng.randint(0, 8)))
                b = "".join(rng.choice("abcde") for _ in range(rng.randint(0, 8)))
                assert levenshtein(a, b) == naive_levenshtein(a, b)
            for _ in range(10000):
                a, b, c = (
                    "".join(rng.choice("abcdef") for _ in range(rng.randint(0, 10)))
                    for _ in range(3)
                )
                dab = levenshtein(a, b)
                assert dab == levenshtein(b, a)
                assert levenshtein(a, a) == 0
                assert levenshtein(a, c) <= dab + levenshtein(b, c)
        assert t.elapsed < 5.0, f"{t.elapsed:.2f}s"

    def test_bleu_precision_oracle(self, announce):
        with _Timer() as t:
            rng = random.Random(103)
            vocab = ["the", "a", "fn", "x", "y", "of", "call"]
            for _ in range(200):
                cand = rng.choices(vocab, k=rng.randint(1, 10))
                ref = rng.choices(vocab, k=rng.randint(1, 10))
                for n in range(1, 5):
                    assert modified_precision(cand, ref, n) == \
                        brute_force_precision(cand, ref, n)
        assert t.elapsed < 5.0, f"{t.elapsed:.2f}s"

    def test_alignment_conservation(self, announce):
        with _Timer() as t:
            rng = np.random.default_rng(107)
            for case in range(100):
                n_tokens = int(rng.integers(1, 7))
                spans, subwords, pos = [], [], 0
                for _ in range(n_tokens):
                    width = int(rng.integers(1, 6))
                    spans.append(("x" * width, pos, pos + width))
                    cut = pos + int(rng.integers(1, width + 1)) \
                        if width > 1 else pos + width
                    subwords.append(SubwordToken("x" * (cut - pos), pos, cut))
                    if cut < pos + width:
                        subwords.append(
                            SubwordToken("x" * (pos + width - cut), cut,
                                         pos + width))
                    pos += width + 1
                if n_tokens > 1:  # orphan whitespace subword
                    subwords.append(
                        SubwordToken(" ", spans[0][2], spans[0][2] + 1))
                    subwords.sort(key=lambda s: s.char_start)
                att = rng.dirichlet(np.ones(len(subwords)), size=(2, 3))
                record = make_record(source="x" * pos, subwords=subwords,
                                     attention=att,
                                     output_steps=["t"] * 3)
                from attnlens.tokens import CodeToken
                code = [CodeToken(tx, s, e, i)
                        for i, (tx, s, e) in enumerate(spans)]
                aligned = align(record, code)
                counts = np.zeros(len(code))
                for w, tok in enumerate(map_subwords(subwords, code)):
                    if tok is not None:
                        counts[tok] += 1
                recon = (aligned.attention * counts).sum(axis=2) \
                    + aligned.orphan_mass
                assert np.all(np.abs(recon - att.sum(axis=2)) < 1e-6)
            # identity case exact
            subwords = [SubwordToken("ab", 0, 2), SubwordToken("cd", 3, 5)]
            from attnlens.tokens import CodeToken
            code = [CodeToken("ab", 0, 2, 0), CodeToken("cd", 3, 5, 1)]
            att = np.array([[[0.25, 0.75]]])
            record = make_record(source="ab cd", subwords=subwords,
                                 attention=att, output_steps=["t"])
            aligned = align(record, code)
            assert np.array_equal(aligned.attention, att)
        assert t.elapsed < 5.0, f"{t.elapsed:.2f}s"

    def test_rank_faithfulness_synthetic(self, announce):
        with _Timer() as t:
            rng = np.random.default_rng(109)
            samples = []
            for s in range(10):
                n = int(rng.integers(2, 9))
                texts = [f"w{i}" for i in range(n)]
                steps = [texts[int(rng.integers(0, n))] for _ in range(5)]
                att = rng.random((4, 5, n)) * 0.4
                for step, text in enumerate(steps):
                    att[:, step, texts.index(text)] = 1.0
                samples.append(make_aligned(texts, att.tolist(), steps,
                                            rid=f"p{s}"))
            report = rank_report(None, samples, k=3)
            for layer in report.layers:
                assert layer.mean_normalized_rank == 0.0
                assert layer.topk_hit_rate == 1.0
            # oracle equivalence on <=12-token samples
            vocab = ["a", "b", "c", "match", "d"]
            for _ in range(200):
                n = int(rng.integers(1, 13))
                texts = [vocab[int(rng.integers(0, len(vocab)))]
                         for _ in range(n)]
                row = rng.random(n)
                step = vocab[int(rng.integers(0, len(vocab)))]
                sample = make_aligned(texts, [[row.tolist()]], [step])
                expected = oracle_rank(row, texts, step)
                obs = rank_observations(sample)
                if expected is None:
                    assert obs == []
                else:
                    assert obs[0].rank_1based == expected
        assert t.elapsed < 5.0, f"{t.elapsed:.2f}s"

    def test_attribution_uniform_java_and_python(self, announce):
        with _Timer() as t:
            java = (
                "public static int compute(int base, int limit) { "
                "int total = helper(base); "
                "if (total > limit) { return total; } return limit; }"
            )
            tokens = categorize(java, "java")
            assert {tok.category for tok in tokens} == set(ALL_CATEGORIES)
            subwords = [SubwordToken(tok.text, tok.char_start, tok.char_end)
                        for tok in tokens]
            att = np.full((2, 3, len(subwords)), 1.0 / len(subwords))
            record = make_record(source=java, subwords=subwords,
                                 attention=att, output_steps=["a", "b", "c"])
            aligned = align(record, tokens)
            for profile in profiles_per_layer(accumulate([aligned])):
                for cat in ALL_CATEGORIES:
                    assert profile.normalized_pct[cat] == \
                        pytest.approx(100.0 / 7, abs=1e-6)

            py = (
                "def scale(values, factor):\n"
                "    total = add(factor)\n"
                "    if total:\n"
                "        return total\n"
                "    return values\n"
            )
            tokens = categorize(py, "python")
            cats = {tok.category for tok in tokens}
            assert Category.TYPE_IDENTIFIER not in cats and len(cats) == 6
            subwords = [SubwordToken(tok.text, tok.char_start, tok.char_end)
                        for tok in tokens]
            att = np.full((2, 2, len(subwords)), 1.0 / len(subwords))
            record = make_record(source=py, subwords=subwords, attention=att,
                                 output_steps=["a", "b"], language="python")
            aligned = align(record, tokens)
            for profile in profiles_per_layer(accumulate([aligned])):
                assert profile.normalized_pct[Category.TYPE_IDENTIFIER] == 0.0
                for cat in cats:
                    assert profile.normalized_pct[cat] == \
                        pytest.approx(100.0 / 6, abs=1e-6)
        assert t.elapsed < 5.0, f"{t.elapsed:.2f}s"

    def test_category_partition_on_fixture(self, announce):
        with _Timer() as t:
            corpus = parse_dump(FIXTURE)
            for record in corpus.records:
                tokens = categorize(record.source_text, "java")
                counts = {c: 0 for c in ALL_CATEGORIES}
                for tok in tokens:
                    counts[tok.category] += 1
                assert sum(counts.values()) == len(tokens)
                for tok in tokens:
                    if tok.text in JAVA_CONTROL_KEYWORDS and \
                            tok.text in JAVA_LEXER_KEYWORDS:
                        assert tok.category is Category.LANGUAGE_KEYWORD, \
                            (record.id, tok.text)
        assert t.elapsed < 5.0, f"{t.elapsed:.2f}s"

    def test_stratifier_synthetic_nine(self, announce):
        with _Timer() as t:
            ids = [f"s{i}" for i in range(9)]
            difficulty = [10, 20, 30, 40, 50, 60, 70, 80, 90]
            bleu = [0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95]
            cxs = [ComplexityProfile(5, 1, 0, 1)] * 9
            strata = label_quadrants(ids, difficulty, bleu, cxs, "CR")
            expected = {
                "s0": QuadrantLabel.EASY_LOW, "s1": QuadrantLabel.EASY_LOW,
                "s2": QuadrantLabel.EASY_LOW, "s3": QuadrantLabel.MID,
                "s4": QuadrantLabel.MID, "s5": QuadrantLabel.MID,
                "s6": QuadrantLabel.HARD_HIGH, "s7": QuadrantLabel.HARD_HIGH,
                "s8": QuadrantLabel.HARD_HIGH,
            }
            assert {s.id: s.quadrant for s in strata.samples} == expected
            # terciles match the definitional enumeration
            assert [s.difficulty_tercile for s in strata.samples] == \
                ["easy"] * 3 + ["mid"] * 3 + ["hard"] * 3
            assert [s.accuracy_tercile for s in strata.samples] == \
                ["low"] * 3 + ["mid"] * 3 + ["high"] * 3
            # delta(whole, whole) == 0
            aligned = align_corpus(parse_dump(FIXTURE), "java")
            whole = rollup(corpus_profile(aligned))
            delta = category_attention_delta(whole, whole)
            assert delta == {"naming": 0.0, "structural": 0.0, "others": 0.0}
        assert t.elapsed < 1.0, f"{t.elapsed:.2f}s"

    def test_end_to_end_golden_run(self, announce, tmp_path):
        with _Timer() as t:
            out = tmp_path / "report"
            code = cli_main(["report", "--dump", str(FIXTURE),
                             "--lang", "java", "--out", str(out)])
            assert code == 0
            golden_files = [p for p in sorted(GOLDEN.rglob("*")) if p.is_file()]
            assert golden_files, "golden directory is empty"
            for golden_file in golden_files:
                produced = out / golden_file.relative_to(GOLDEN)
                assert produced.read_bytes() == golden_file.read_bytes(), \
                    f"{golden_file.relative_to(GOLDEN)} differs from golden"
        assert t.elapsed < 30.0, f"{t.elapsed:.2f}s"
