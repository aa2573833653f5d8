"""Lexer for the C-family grammars (Java, C#).

Produces the concrete token stream the analyzers treat as syntax-tree
leaves: identifiers, keywords, literals, operators, and comments, each
with its byte span. Comments and string literals are single tokens.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ParseError


class TokKind(enum.Enum):
    IDENT = "ident"
    KEYWORD = "keyword"
    NUMBER = "number"
    STRING = "string"
    CHAR = "char"
    COMMENT = "comment"
    OP = "op"
    PREPROC = "preproc"


@dataclass
class LexToken:
    kind: TokKind
    text: str
    char_start: int  # byte offset
    char_end: int    # byte offset, exclusive
    index: int = -1


_OPERATORS = [
    # longest first so the scanner can take the first prefix match
    ">>>=", "<<=", ">>=", ">>>", "...", "??=", "?.", "??", "=>", "->",
    "::", "++", "--", "&&", "||", "+=", "-=", "*=", "/=", "%=", "^=",
    "&=", "|=", "==", "!=", "<=", ">=", "<<", ">>",
    "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "?", ":", ";",
    ",", ".", "(", ")", "[", "]", "{", "}", "&", "|", "^", "@", "$", "#",
]


def _ident_start(c: str) -> bool:
    return c.isalpha() or c in "_$"


def _ident_part(c: str) -> bool:
    return c.isalnum() or c in "_$"


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        # byte offset of each char position, plus the end sentinel
        offsets = [0] * (len(text) + 1)
        b = 0
        for i, ch in enumerate(text):
            offsets[i] = b
            b += len(ch.encode("utf-8"))
        offsets[len(text)] = b
        self.byte_at = offsets

    def peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.text[i] if i < len(self.text) else ""

    def startswith(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)


def lex_clike(source: str, keywords: frozenset[str], csharp: bool = False) -> list[LexToken]:
    """Tokenize Java or C# source. Raises ParseError at the first bad byte."""
    sc = _Scanner(source)
    tokens: list[LexToken] = []

    def emit(kind: TokKind, start: int, end: int) -> None:
        tokens.append(
            LexToken(kind, source[start:end], sc.byte_at[start], sc.byte_at[end])
        )

    while sc.pos < len(source):
        c = sc.peek()
        start = sc.pos

        if c.isspace():
            sc.pos += 1
            continue

        if sc.startswith("//"):
            end = source.find("\n", sc.pos)
            end = len(source) if end == -1 else end
            sc.pos = end
            emit(TokKind.COMMENT, start, end)
            continue
        if sc.startswith("/*"):
            end = source.find("*/", sc.pos + 2)
            if end == -1:
                raise ParseError("unterminated block comment", sc.byte_at[start])
            sc.pos = end + 2
            emit(TokKind.COMMENT, start, sc.pos)
            continue

        if csharp and c == "#":
            end = source.find("\n", sc.pos)
            end = len(source) if end == -1 else end
            sc.pos = end
            emit(TokKind.PREPROC, start, end)
            continue

        # C# verbatim / interpolated string prefixes: @" $" $@" @$"
        if csharp and c in "@$" and _lex_csharp_string(sc, tokens, emit):
            continue

        if c == '"':
            sc.pos = _scan_quoted(sc, '"', allow_escape=True)
            emit(TokKind.STRING, start, sc.pos)
            continue
        if c == "'":
            sc.pos = _scan_quoted(sc, "'", allow_escape=True)
            emit(TokKind.CHAR, start, sc.pos)
            continue

        if c.isdigit() or (c == "." and sc.peek(1).isdigit()):
            sc.pos = _scan_number(sc)
            emit(TokKind.NUMBER, start, sc.pos)
            continue

        if _ident_start(c):
            sc.pos += 1
            while sc.pos < len(source) and _ident_part(source[sc.pos]):
                sc.pos += 1
            text = source[start:sc.pos]
            kind = TokKind.KEYWORD if text in keywords else TokKind.IDENT
            emit(kind, start, sc.pos)
            continue

        for op in _OPERATORS:
            if sc.startswith(op):
                sc.pos += len(op)
                emit(TokKind.OP, start, sc.pos)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", sc.byte_at[start])

    for i, tok in enumerate(tokens):
        tok.index = i
    return tokens


def _scan_quoted(sc: _Scanner, quote: str, allow_escape: bool) -> int:
    pos = sc.pos + 1
    text = sc.text
    while pos < len(text):
        ch = text[pos]
        if allow_escape and ch == "\\":
            pos += 2
            continue
        if ch == quote:
            return pos + 1
        if ch == "\n":
            break
        pos += 1
    raise ParseError("unterminated string literal", sc.byte_at[sc.pos])


def _scan_number(sc: _Scanner) -> int:
    pos = sc.pos
    text = sc.text
    if text.startswith(("0x", "0X", "0b", "0B"), pos):
        pos += 2
        while pos < len(text) and (text[pos] in "0123456789abcdefABCDEF_"):
            pos += 1
    else:
        while pos < len(text) and (text[pos].isdigit() or text[pos] in "._eE"):
            # '.' only continues a number when a digit follows (not '1..2')
            if text[pos] == ".":
                if pos + 1 < len(text) and text[pos + 1].isdigit():
                    pos += 1
                else:
                    break
            elif text[pos] in "eE":
                if pos + 1 < len(text) and (
                    text[pos + 1].isdigit() or text[pos + 1] in "+-"
                ):
                    pos += 2
                else:
                    break
            else:
                pos += 1
    while pos < len(text) and text[pos] in "lLfFdDuUmM":
        pos += 1
    return pos


def _lex_csharp_string(sc: _Scanner, tokens: list[LexToken], emit) -> bool:
    """Scan @"...", $"...", $@"...", @$"..." as one STRING token."""
    start = sc.pos
    prefix = 0
    verbatim = False
    while sc.peek(prefix) in "@$":
        verbatim = verbatim or sc.peek(prefix) == "@"
        prefix += 1
    if sc.peek(prefix) != '"':
        return False
    pos = sc.pos + prefix + 1
    text = sc.text
    while pos < len(text):
        ch = text[pos]
        if verbatim:
            if ch == '"':
                if pos + 1 < len(text) and text[pos + 1] == '"':
                    pos += 2
                    continue
                pos += 1
                break
            pos += 1
        else:
            if ch == "\\":
                pos += 2
                continue
            if ch == '"':
                pos += 1
                break
            if ch == "\n":
                raise ParseError("unterminated string literal", sc.byte_at[start])
            pos += 1
    else:
        raise ParseError("unterminated string literal", sc.byte_at[start])
    sc.pos = pos
    emit(TokKind.STRING, start, pos)
    return True
