"""Token categorization and complexity analysis for Java and C# methods.

Works on the lexer's token stream with a lightweight structural pass:
signature discovery, parameter extraction, local-declaration matching,
call-site detection, and type-position marking. It deliberately stops
short of full semantic resolution; positions the grammar would mark as
types/calls/variables are recovered from local syntax only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..tokens import Category
from .clike import LexToken, TokKind, lex_clike
from .errors import ParseError
from .keywords import (
    CONTROL_KEYWORDS,
    CSHARP_LEXER_KEYWORDS,
    JAVA_LEXER_KEYWORDS,
    PRIMITIVE_TYPES,
)

_MODIFIERS = {
    "java": {
        "public", "protected", "private", "static", "abstract", "final",
        "native", "synchronized", "transient", "volatile", "strictfp",
        "default",
    },
    "csharp": {
        "public", "protected", "private", "internal", "static", "abstract",
        "sealed", "virtual", "override", "readonly", "async", "extern",
        "unsafe", "new", "partial",
    },
}

_BRACELESS_CONTROL = {"if", "else", "for", "while", "do", "foreach"}

_GENERIC_FILLERS = {",", ".", "?", "[", "]", "&"}
_GENERIC_KEYWORDS = {"extends", "super", "in", "out", "where"}


@dataclass
class MethodStructure:
    """Analysis output: category per token plus complexity inputs."""

    tokens: list[LexToken]
    categories: list[Category]
    param_names: set[str] = field(default_factory=set)
    local_names: set[str] = field(default_factory=set)
    cyclomatic: int = 1
    nested_block_depth: int = 0


class _Struct:
    """Non-comment view of the token stream with index mapping."""

    def __init__(self, tokens: list[LexToken]):
        self.toks = [
            t for t in tokens if t.kind not in (TokKind.COMMENT, TokKind.PREPROC)
        ]
        self.full_index = [t.index for t in self.toks]

    def __len__(self) -> int:
        return len(self.toks)

    def text(self, i: int) -> str:
        return self.toks[i].text if 0 <= i < len(self.toks) else ""

    def kind(self, i: int):
        return self.toks[i].kind if 0 <= i < len(self.toks) else None

    def match_paren(self, i: int) -> int:
        """Index of the closer matching the opener at i ('(', '[' or '{')."""
        pairs = {"(": ")", "[": "]", "{": "}"}
        opener = self.text(i)
        closer = pairs[opener]
        depth = 0
        for j in range(i, len(self.toks)):
            t = self.text(j)
            if t == opener:
                depth += 1
            elif t == closer:
                depth -= 1
                if depth == 0:
                    return j
        raise ParseError(f"unbalanced {opener!r}", self.toks[i].char_start)


def _is_ident(s: _Struct, i: int) -> bool:
    return s.kind(i) == TokKind.IDENT


def _scan_generic_args(s: _Struct, i: int, language: str):
    """Scan a balanced <...> type-argument section starting at i ('<').

    Returns (end_index_exclusive, type_ident_indices) or None when the
    section cannot be a generic argument list (i.e. '<' is a comparison).
    """
    if s.text(i) != "<":
        return None
    depth = 0
    idents: list[int] = []
    primitives = PRIMITIVE_TYPES[language]
    j = i
    while j < len(s):
        t = s.text(j)
        if t == "<":
            depth += 1
        elif t == ">":
            depth -= 1
            if depth == 0:
                return j + 1, idents
        elif t == ">>":
            depth -= 2
            if depth == 0:
                return j + 1, idents
            if depth < 0:
                return None
        elif t == ">>>":
            depth -= 3
            if depth <= 0:
                return (j + 1, idents) if depth == 0 else None
        elif _is_ident(s, j) or t in primitives:
            idents.append(j)
        elif t in _GENERIC_FILLERS or t in _GENERIC_KEYWORDS:
            pass
        else:
            return None
        j += 1
    return None


@dataclass
class _TypeMatch:
    end: int                 # struct index just past the type
    ident_indices: list[int]  # identifiers/primitives that form the type
    angle_spans: list[tuple[int, int]]
    suffix_q: int | None = None  # C# nullable '?' position, if consumed


def _match_type(s: _Struct, i: int, language: str) -> _TypeMatch | None:
    """Match a type expression: dotted name or primitive, generic args,
    array suffixes, and a C# nullable suffix."""
    idents: list[int] = []
    angles: list[tuple[int, int]] = []
    primitives = PRIMITIVE_TYPES[language]
    j = i
    if _is_ident(s, j):
        idents.append(j)
        j += 1
        while s.text(j) == "." and _is_ident(s, j + 1):
            idents.append(j + 1)
            j += 2
    elif s.text(j) in primitives:
        idents.append(j)
        j += 1
    else:
        return None

    scan = _scan_generic_args(s, j, language)
    if scan is not None:
        angles.append((j, scan[0]))
        idents.extend(scan[1])
        j = scan[0]

    while s.text(j) == "[" and s.text(j + 1) == "]":
        j += 2

    suffix_q = None
    if language == "csharp" and s.text(j) == "?" and _is_ident(s, j + 1):
        # nullable suffix only in declaration-like contexts; caller decides
        suffix_q = j
        j += 1

    return _TypeMatch(end=j, ident_indices=idents, angle_spans=angles,
                      suffix_q=suffix_q)


def _skip_expression(s: _Struct, i: int, stop_at_comma: bool) -> int:
    """Advance past an initializer expression to the next top-level
    ',' (if requested), ';' or unbalanced ')'. Returns that index."""
    depth = 0
    j = i
    while j < len(s):
        t = s.text(j)
        if t in "([{":
            depth += 1
        elif t in ")]}":
            if depth == 0:
                return j
            depth -= 1
        elif depth == 0 and (t == ";" or (stop_at_comma and t == ",")):
            return j
        j += 1
    return j


@dataclass
class _Declaration:
    name_indices: list[int]
    type_indices: list[int]
    angle_spans: list[tuple[int, int]]
    consumed_q: list[int]


def _match_declaration(s: _Struct, i: int, language: str) -> _Declaration | None:
    j = i
    if s.text(j) in ("final", "const") or (
        language == "csharp" and s.text(j) in ("out", "ref")
    ):
        j += 1
    tm = _match_type(s, j, language)
    if tm is None:
        return None
    j = tm.end
    if not _is_ident(s, j):
        return None
    decl = _Declaration([], list(tm.ident_indices), list(tm.angle_spans), [])
    if tm.suffix_q is not None:
        decl.consumed_q.append(tm.suffix_q)
    terminators = {"=", ";", ",", ")"}
    enhanced_for = {":"} if language == "java" else {"in"}
    while True:
        name_idx = j
        j += 1
        while s.text(j) == "[" and s.text(j + 1) == "]":
            j += 2
        nxt = s.text(j)
        if nxt not in terminators and nxt not in enhanced_for:
            return decl if decl.name_indices else None
        decl.name_indices.append(name_idx)
        if nxt in enhanced_for or nxt == ")":
            return decl
        if nxt == "=":
            j = _skip_expression(s, j + 1, stop_at_comma=True)
            nxt = s.text(j)
        if nxt == ",":
            j += 1
            if not _is_ident(s, j):
                return decl
            continue
        return decl


def analyze_method(source: str, language: str) -> MethodStructure:
    """Lex and categorize a single Java or C# method definition."""
    csharp = language == "csharp"
    keywords = CSHARP_LEXER_KEYWORDS if csharp else JAVA_LEXER_KEYWORDS
    tokens = lex_clike(source, keywords, csharp=csharp)
    if not tokens:
        raise ParseError("empty source", 0)
    s = _Struct(tokens)
    if not len(s):
        raise ParseError("no code tokens", 0)

    control = CONTROL_KEYWORDS[language]
    primitives = PRIMITIVE_TYPES[language]

    # --- signature -------------------------------------------------------
    i = 0
    type_positions: set[int] = set()
    angle_spans: list[tuple[int, int]] = []
    consumed_q: list[int] = []

    while i < len(s):
        if s.text(i) == "@":  # annotation
            i += 1
            while _is_ident(s, i):
                i += 1
                if s.text(i) == ".":
                    i += 1
                else:
                    break
            if s.text(i) == "(":
                i = s.match_paren(i) + 1
        elif csharp and s.text(i) == "[":  # attribute
            i = s.match_paren(i) + 1
        elif s.text(i) in _MODIFIERS[language] and s.kind(i) == TokKind.KEYWORD:
            i += 1
        else:
            break

    scan = _scan_generic_args(s, i, language)
    if scan is not None:  # declared type parameters <T, U>
        angle_spans.append((i, scan[0]))
        type_positions.update(scan[1])
        i = scan[0]

    if s.text(i) == "void":  # keyword return type, not a _match_type form
        name_idx = i + 1
        if not (_is_ident(s, name_idx) and s.text(name_idx + 1) == "("):
            raise ParseError("no method signature found", s.toks[i].char_start)
    else:
        tm = _match_type(s, i, language)
        if tm is None:
            raise ParseError("no method signature found",
                             s.toks[i].char_start if i < len(s) else 0)
        if s.text(tm.end) == "(" and len(tm.ident_indices) == 1 and not tm.angle_spans:
            name_idx = tm.ident_indices[0]  # constructor: no return type
        else:
            type_positions.update(tm.ident_indices)
            angle_spans.extend(tm.angle_spans)
            if tm.suffix_q is not None:
                consumed_q.append(tm.suffix_q)
            name_idx = tm.end
            if not (_is_ident(s, name_idx) and s.text(name_idx + 1) == "("):
                raise ParseError(
                    "no method signature found",
                    s.toks[min(name_idx, len(s) - 1)].char_start,
                )
    lparen = name_idx + 1
    rparen = s.match_paren(lparen)

    # --- parameters ------------------------------------------------------
    param_names: set[str] = set()
    param_name_indices: set[int] = set()
    j = lparen + 1
    while j < rparen:
        if s.text(j) == "@":
            j += 1
            while _is_ident(s, j):
                j += 1
                if s.text(j) == ".":
                    j += 1
                else:
                    break
            if s.text(j) == "(":
                j = s.match_paren(j) + 1
            continue
        if s.text(j) in ("final", "params", "ref", "out", "in", "this") and \
                s.kind(j) == TokKind.KEYWORD:
            j += 1
            continue
        tm = _match_type(s, j, language)
        if tm is None:
            j += 1
            continue
        angle_spans.extend(tm.angle_spans)
        if tm.suffix_q is not None:
            consumed_q.append(tm.suffix_q)
        k = tm.end
        if s.text(k) == "..." :
            k += 1
        if _is_ident(s, k):
            type_positions.update(tm.ident_indices)
            param_names.add(s.text(k))
            param_name_indices.add(k)
            k += 1
            while s.text(k) == "[" and s.text(k + 1) == "]":
                k += 2
            if s.text(k) == "=":  # C# default value
                k = _skip_expression(s, k + 1, stop_at_comma=True)
        elif len(tm.ident_indices) == 1 and s.text(k) in (",", ")"):
            # untyped name (lambda-style); treat the single token as the name
            param_names.add(s.text(tm.ident_indices[0]))
            param_name_indices.add(tm.ident_indices[0])
        while k < rparen and s.text(k) != ",":
            k += 1
        j = k + 1

    # --- throws clause / constraints, then body --------------------------
    j = rparen + 1
    body_start = body_end = None
    expression_body = False
    while j < len(s):
        t = s.text(j)
        if t == "throws":
            j += 1
            while _is_ident(s, j) or s.text(j) == "," or s.text(j) == ".":
                if _is_ident(s, j):
                    type_positions.add(j)
                j += 1
            continue
        if t == "{":
            body_start = j
            body_end = s.match_paren(j)
            break
        if t == "=>":
            expression_body = True
            body_start = j
            body_end = len(s) - 1  # trailing ';'
            break
        if t == ";":
            body_start = body_end = j  # abstract declaration, empty body
            break
        j += 1
    if body_start is None:
        raise ParseError("method body not found", s.toks[rparen].char_start)

    # --- body scan: declarations, new-expressions, catches ----------------
    local_names: set[str] = set()
    body_range = range(body_start + 1, body_end)
    decl_triggers = {";", "{", "}", ":", "(", ","}

    k = body_start + 1
    while k < body_end:
        t = s.text(k)
        if t == "new":
            tm = _match_type(s, k + 1, language)
            if tm is not None:
                type_positions.update(tm.ident_indices)
                angle_spans.extend(tm.angle_spans)
            k += 1
            continue
        if t in ("instanceof", "is", "as") and s.kind(k) == TokKind.KEYWORD:
            tm = _match_type(s, k + 1, language)
            if tm is not None:
                type_positions.update(tm.ident_indices)
                angle_spans.extend(tm.angle_spans)
                # C# pattern variable: x is Foo f
                if _is_ident(s, tm.end) and csharp:
                    local_names.add(s.text(tm.end))
            k += 1
            continue
        if t == "catch":
            if s.text(k + 1) == "(":
                close = s.match_paren(k + 1)
                m = k + 2
                while m < close:
                    tm = _match_type(s, m, language)
                    if tm is None:
                        m += 1
                        continue
                    type_positions.update(tm.ident_indices)
                    angle_spans.extend(tm.angle_spans)
                    m = tm.end
                    if s.text(m) == "|":
                        m += 1
                        continue
                    if _is_ident(s, m):
                        local_names.add(s.text(m))
                        m += 1
                k = close + 1
                continue
            k += 1
            continue
        if t == "->" or t == "=>":
            # lambda parameters: a -> ..., (a, b) -> ..., (Foo a) -> ...
            prev = k - 1
            if s.text(prev) == ")":
                open_p = _backward_match(s, prev)
                m = open_p + 1
                last_ident = None
                while m < prev:
                    if _is_ident(s, m):
                        last_ident = m
                    if s.text(m) == ",":
                        if last_ident is not None:
                            local_names.add(s.text(last_ident))
                        last_ident = None
                    m += 1
                if last_ident is not None:
                    local_names.add(s.text(last_ident))
            elif _is_ident(s, prev):
                local_names.add(s.text(prev))
            k += 1
            continue
        at_start = (k == body_start + 1) or s.text(k - 1) in decl_triggers
        if at_start and (
            _is_ident(s, k) or s.text(k) in primitives
            or s.text(k) in ("final", "const", "out", "ref")
        ):
            decl = _match_declaration(s, k, language)
            if decl is not None:
                for ni in decl.name_indices:
                    local_names.add(s.text(ni))
                type_positions.update(decl.type_indices)
                angle_spans.extend(decl.angle_spans)
                consumed_q.extend(decl.consumed_q)
        k += 1

    # --- call sites -------------------------------------------------------
    call_indices: set[int] = set()
    for k in body_range:
        if not _is_ident(s, k):
            continue
        if s.text(k - 1) in ("new", "@"):
            continue
        nxt = k + 1
        if s.text(nxt) == "<":
            scan = _scan_generic_args(s, nxt, language)
            if scan is not None and s.text(scan[0]) == "(":
                angle_spans.append((nxt, scan[0]))
                type_positions.update(scan[1])
                call_indices.add(k)
            continue
        if s.text(nxt) == "(":
            call_indices.add(k)

    # --- category assignment ---------------------------------------------
    in_angle = [False] * len(s)
    for a, b in angle_spans:
        for idx in range(a, b):
            in_angle[idx] = True

    categories_struct: list[Category] = []
    for k, tok in enumerate(s.toks):
        if tok.kind == TokKind.KEYWORD:
            if tok.text in control:
                cat = Category.LANGUAGE_KEYWORD
            elif tok.text in primitives:
                cat = Category.TYPE_IDENTIFIER
            else:
                cat = Category.OTHER
        elif tok.kind == TokKind.IDENT:
            if k == name_idx:
                cat = Category.METHOD_NAME
            elif k in type_positions:
                cat = Category.TYPE_IDENTIFIER
            elif k in call_indices:
                cat = Category.METHOD_CALL
            elif s.text(k - 1) == ".":
                cat = Category.OTHER  # member access that is not a call
            elif tok.text in param_names:
                cat = Category.INPUT_VARIABLE
            elif tok.text in local_names:
                cat = Category.LOCAL_VARIABLE
            else:
                cat = Category.OTHER
        else:
            cat = Category.OTHER
        categories_struct.append(cat)

    categories = [Category.OTHER] * len(tokens)
    for k, tok in enumerate(s.toks):
        categories[tok.index] = categories_struct[k]

    # --- complexity --------------------------------------------------------
    q_consumed = set(consumed_q)
    cyclomatic = 1
    for k in body_range:
        t = s.text(k)
        kind = s.kind(k)
        if kind == TokKind.KEYWORD:
            if t in ("if", "for", "foreach", "do", "case", "catch"):
                cyclomatic += 1
            elif t == "while" and not _is_do_tail(s, k):
                cyclomatic += 1
        elif t in ("&&", "||"):
            cyclomatic += 1
        elif t == "?" and not in_angle[k] and k not in q_consumed:
            cyclomatic += 1

    nested = _nested_depth(s, body_start, body_end, csharp, expression_body)

    st = MethodStructure(
        tokens=tokens,
        categories=categories,
        param_names=param_names,
        local_names=local_names,
        cyclomatic=cyclomatic,
        nested_block_depth=nested,
    )
    return st


def _backward_match(s: _Struct, close_idx: int) -> int:
    depth = 0
    for j in range(close_idx, -1, -1):
        t = s.text(j)
        if t == ")":
            depth += 1
        elif t == "(":
            depth -= 1
            if depth == 0:
                return j
    raise ParseError("unbalanced ')'", s.toks[close_idx].char_start)


def _is_do_tail(s: _Struct, k: int) -> bool:
    """True when the 'while' at k closes a do-statement: while (...) ;"""
    if s.text(k + 1) != "(":
        return False
    close = s.match_paren(k + 1)
    return s.text(close + 1) == ";"


_INIT_PREV = {"=", ",", "(", "{", "[", "]"}


def _nested_depth(s: _Struct, body_start: int, body_end: int,
                  csharp: bool, expression_body: bool) -> int:
    if expression_body or body_start == body_end:
        return 0

    open_braces = 0          # every '{' inside the body
    open_blocks = 0          # only block-forming braces
    block_flags: list[bool] = []
    pending: list[int] = []  # brace depth at which a braceless body opened
    max_depth = 0

    k = body_start + 1
    while k < body_end:
        t = s.text(k)
        kind = s.kind(k)
        if kind == TokKind.KEYWORD and t in _BRACELESS_CONTROL:
            if t == "else" and s.text(k + 1) == "if":
                k += 1
                continue
            if t == "while" and _is_do_tail(s, k):
                k = s.match_paren(k + 1) + 1  # skip header; ';' follows
                continue
            header_end = k
            if t not in ("else", "do") and s.text(k + 1) == "(":
                header_end = s.match_paren(k + 1)
            if s.text(header_end + 1) != "{":
                pending.append(open_braces)
                max_depth = max(max_depth, open_blocks + len(pending))
            k = header_end + 1
            continue
        if t == "{":
            prev = s.text(k - 1)
            is_init = prev in _INIT_PREV or (csharp and s.kind(k - 1) == TokKind.IDENT)
            block_flags.append(not is_init)
            open_braces += 1
            if not is_init:
                open_blocks += 1
                max_depth = max(max_depth, open_blocks + len(pending))
        elif t == "}":
            if block_flags:
                if block_flags.pop():
                    open_blocks -= 1
            open_braces -= 1
            while pending and pending[-1] >= open_braces:
                pending.pop()
        elif t == ";":
            while pending and pending[-1] >= open_braces:
                pending.pop()
        k += 1
    return max_depth
