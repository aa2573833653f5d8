from pathlib import Path

import numpy as np
import pytest

from attnlens.alignment import AlignedSample
from attnlens.dumpio import Corpus, SampleRecord, SubwordToken, parse_dump
from attnlens.tokens import Category, CodeToken

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # expose each phase's report on the item so fixtures can see pass/fail
    outcome = yield
    report = outcome.get_result()
    setattr(item, "rep_" + report.when, report)


@pytest.fixture(scope="session")
def mini_cr_path() -> Path:
    return FIXTURES / "mini_cr.jsonl"


@pytest.fixture(scope="session")
def mini_cr(mini_cr_path) -> Corpus:
    return parse_dump(mini_cr_path)


def make_record(
    rid="t1",
    source="int f(int x) { return x; }",
    subwords=None,
    attention=None,
    output_steps=None,
    task="CR",
    language="java",
    gold=None,
    prediction=None,
) -> SampleRecord:
    if subwords is None:
        subwords = [SubwordToken(source[i:i + 1], i, i + 1)
                    for i in range(min(3, len(source)))]
    if output_steps is None:
        output_steps = ["x"]
    if attention is None:
        n = len(subwords)
        rows = np.full((1, len(output_steps), n), 1.0 / n)
        attention = rows
    return SampleRecord(
        id=rid,
        task=task,
        source_language=language,
        source_text=source,
        gold_text=gold if gold is not None else source,
        prediction_text=prediction if prediction is not None else source,
        output_steps=output_steps,
        subwords=subwords,
        attention=np.asarray(attention, dtype=np.float64),
    )


def make_aligned(
    token_texts,
    attention,
    output_steps,
    categories=None,
    rid="a1",
) -> AlignedSample:
    tokens = []
    pos = 0
    for i, text in enumerate(token_texts):
        b = len(text.encode("utf-8"))
        cat = categories[i] if categories else Category.OTHER
        tokens.append(CodeToken(text, pos, pos + b, i, cat))
        pos += b + 1
    att = np.asarray(attention, dtype=np.float64)
    return AlignedSample(
        record_id=rid,
        code_tokens=tokens,
        attention=att,
        orphan_mass=np.zeros(att.shape[:2]),
        output_steps=list(output_steps),
    )
