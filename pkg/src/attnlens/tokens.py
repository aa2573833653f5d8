"""Code-token domain types shared by the parsers and the analyzers."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Category(enum.Enum):
    """The seven roles a code token can play, plus their high-level rollup.

    Naming = METHOD_NAME + INPUT_VARIABLE + LOCAL_VARIABLE;
    Structural = METHOD_CALL + TYPE_IDENTIFIER + LANGUAGE_KEYWORD;
    everything else is OTHER.
    """

    METHOD_NAME = "MethodName"
    INPUT_VARIABLE = "InputVariable"
    METHOD_CALL = "MethodCall"
    LOCAL_VARIABLE = "LocalVariable"
    TYPE_IDENTIFIER = "TypeIdentifier"
    LANGUAGE_KEYWORD = "LanguageKeyword"
    OTHER = "Other"


NAMING_CATEGORIES = (
    Category.METHOD_NAME,
    Category.INPUT_VARIABLE,
    Category.LOCAL_VARIABLE,
)
STRUCTURAL_CATEGORIES = (
    Category.METHOD_CALL,
    Category.TYPE_IDENTIFIER,
    Category.LANGUAGE_KEYWORD,
)

ALL_CATEGORIES = tuple(Category)


@dataclass
class CodeToken:
    """A concrete-syntax leaf token with its byte span and category.

    Spans are byte offsets into the UTF-8 encoding of the source text,
    non-overlapping and nondecreasing. ``index`` is the 0-based position
    in token order. ``category`` is None until categorize() assigns it.
    """

    text: str
    char_start: int
    char_end: int
    index: int
    category: Category | None = None


@dataclass(frozen=True)
class ComplexityProfile:
    """Static complexity measures of one method."""

    n_tokens: int
    cyclomatic: int
    nested_block_depth: int
    n_variables: int
