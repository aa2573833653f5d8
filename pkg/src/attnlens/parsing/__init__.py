"""Concrete-syntax tokenization, token categorization, and complexity
metrics for Java, Python, and C# method definitions."""

from __future__ import annotations

from ..tokens import Category, CodeToken, ComplexityProfile
from . import javacs, pylang
from .errors import ParseError
from .keywords import keyword_table_checksum

SUPPORTED_LANGUAGES = ("java", "python", "csharp")

GRAMMAR_VERSIONS = {
    "python": "stdlib-tokenize/ast",
    "java": "attnlens-clike-1",
    "csharp": "attnlens-clike-1",
}

__all__ = [
    "Category",
    "CodeToken",
    "ComplexityProfile",
    "ParseError",
    "SUPPORTED_LANGUAGES",
    "tokenize",
    "categorize",
    "complexity_metrics",
    "grammar_manifest",
]


def _check_language(language: str) -> None:
    if language not in SUPPORTED_LANGUAGES:
        raise ValueError(
            f"unsupported language {language!r}; expected one of "
            f"{SUPPORTED_LANGUAGES}"
        )


def _python_tokens(source: str, with_categories: bool) -> list[CodeToken]:
    st = pylang.analyze_function(source)
    return [
        CodeToken(
            text=tok.text,
            char_start=span[0],
            char_end=span[1],
            index=i,
            category=st.categories[i] if with_categories else None,
        )
        for i, (tok, span) in enumerate(zip(st.tokens, st.byte_spans))
    ]


def _clike_tokens(source: str, language: str, with_categories: bool) -> list[CodeToken]:
    st = javacs.analyze_method(source, language)
    return [
        CodeToken(
            text=tok.text,
            char_start=tok.char_start,
            char_end=tok.char_end,
            index=i,
            category=st.categories[i] if with_categories else None,
        )
        for i, tok in enumerate(st.tokens)
    ]


def tokenize(source_text: str, language: str) -> list[CodeToken]:
    """Split a single method/function definition into code tokens.

    Token spans are byte offsets into the UTF-8 source; concatenating
    token texts with the original inter-token whitespace reconstructs the
    source. Comments and string literals are single tokens. Categories
    are left unset.
    """
    _check_language(language)
    if language == "python":
        return _python_tokens(source_text, with_categories=False)
    return _clike_tokens(source_text, language, with_categories=False)


def categorize(source_text: str, language: str) -> list[CodeToken]:
    """Tokenize and assign each token one of the seven categories."""
    _check_language(language)
    if language == "python":
        return _python_tokens(source_text, with_categories=True)
    return _clike_tokens(source_text, language, with_categories=True)


def complexity_metrics(source_text: str, language: str) -> ComplexityProfile:
    """Token count, cyclomatic complexity, nesting depth, variable count.

    Cyclomatic counts 1 + decision points: if/elif branches, loop headers,
    case/except/catch arms, conditional expressions, and short-circuit
    boolean operators. Depth is 0 for a body with no nested block.
    Variables are the distinct local + parameter names.
    """
    _check_language(language)
    if language == "python":
        st = pylang.analyze_function(source_text)
        n_tokens = len(st.tokens)
    else:
        st = javacs.analyze_method(source_text, language)
        n_tokens = len(st.tokens)
    return ComplexityProfile(
        n_tokens=n_tokens,
        cyclomatic=st.cyclomatic,
        nested_block_depth=st.nested_block_depth,
        n_variables=len(st.local_names | st.param_names),
    )


def grammar_manifest() -> list[dict]:
    """The grammar pin list serialized into grammars.lock."""
    return [
        {
            "name": lang,
            "version": GRAMMAR_VERSIONS[lang],
            "checksum": keyword_table_checksum(lang),
        }
        for lang in SUPPORTED_LANGUAGES
    ]
