"""Token categorization and complexity analysis for Python functions.

Tokenization comes from the stdlib tokenizer; category assignment walks the
stdlib AST and maps node positions back onto tokens. String literals and
comments are single tokens. The TypeIdentifier category is empty for
Python corpora by construction.
"""

from __future__ import annotations

import ast
import io
import keyword
import tokenize as pytokenize
from dataclasses import dataclass, field

from ..tokens import Category
from .errors import ParseError
from .keywords import PYTHON_CONTROL_KEYWORDS

_SKIP_TOKENS = {
    pytokenize.NEWLINE,
    pytokenize.NL,
    pytokenize.INDENT,
    pytokenize.DEDENT,
    pytokenize.ENDMARKER,
    pytokenize.ENCODING,
}


@dataclass
class _RawToken:
    text: str
    start: tuple[int, int]  # (line, col), 1-based line
    end: tuple[int, int]
    type: int


@dataclass
class PyStructure:
    tokens: list[_RawToken]
    categories: list[Category]
    byte_spans: list[tuple[int, int]]
    param_names: set[str] = field(default_factory=set)
    local_names: set[str] = field(default_factory=set)
    cyclomatic: int = 1
    nested_block_depth: int = 0


class _LineOffsets:
    """Maps (line, column) tokenizer positions to byte offsets."""

    def __init__(self, source: str):
        self.line_starts = [0]
        b = 0
        self.char_to_byte: list[list[int]] = []
        for line in source.splitlines(keepends=True):
            offsets = [0] * (len(line) + 1)
            acc = 0
            for i, ch in enumerate(line):
                offsets[i] = acc
                acc += len(ch.encode("utf-8"))
            offsets[len(line)] = acc
            self.char_to_byte.append(offsets)
            b += acc
            self.line_starts.append(b)

    def byte_of(self, line: int, col: int) -> int:
        # tokenizer lines are 1-based
        if line - 1 >= len(self.char_to_byte):
            return self.line_starts[-1]
        cols = self.char_to_byte[line - 1]
        col = min(col, len(cols) - 1)
        return self.line_starts[line - 1] + cols[col]


def _raw_tokens(source: str) -> list[_RawToken]:
    out: list[_RawToken] = []
    try:
        stream = pytokenize.generate_tokens(io.StringIO(source).readline)
        for tok in stream:
            if tok.type in _SKIP_TOKENS:
                continue
            if not tok.string:
                continue
            out.append(_RawToken(tok.string, tok.start, tok.end, tok.type))
    except SyntaxError as exc:  # includes IndentationError
        offsets = _LineOffsets(source)
        raise ParseError(
            exc.msg or "syntax error",
            offsets.byte_of(exc.lineno or 1, (exc.offset or 1) - 1),
        ) from None
    except pytokenize.TokenError as exc:
        line, col = exc.args[1] if len(exc.args) > 1 else (1, 0)
        offsets = _LineOffsets(source)
        raise ParseError(str(exc.args[0]), offsets.byte_of(line, col)) from None
    # Merge FSTRING_START .. FSTRING_END runs (3.12+) into one string token.
    fstart = getattr(pytokenize, "FSTRING_START", None)
    fend = getattr(pytokenize, "FSTRING_END", None)
    if fstart is None:
        return out
    merged: list[_RawToken] = []
    i = 0
    while i < len(out):
        tok = out[i]
        if tok.type == fstart:
            depth = 1
            j = i + 1
            while j < len(out) and depth:
                if out[j].type == fstart:
                    depth += 1
                elif out[j].type == fend:
                    depth -= 1
                j += 1
            last = out[j - 1]
            merged.append(_RawToken("", tok.start, last.end, pytokenize.STRING))
            i = j
        else:
            merged.append(tok)
            i = i + 1
    return merged


def analyze_function(source: str) -> PyStructure:
    """Tokenize and categorize a single Python function definition."""
    tokens = _raw_tokens(source)
    offsets = _LineOffsets(source)
    spans = []
    source_bytes = source.encode("utf-8")
    for tok in tokens:
        start = offsets.byte_of(*tok.start)
        end = offsets.byte_of(*tok.end)
        spans.append((start, end))
        if not tok.text:  # merged f-string: recover text from the span
            tok.text = source_bytes[start:end].decode("utf-8")

    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise ParseError(
            exc.msg or "syntax error",
            offsets.byte_of(exc.lineno or 1, (exc.offset or 1) - 1),
        ) from None

    func = None
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            func = node
            break
    if func is None:
        raise ParseError("no function definition found", 0)

    pos_index: dict[tuple[int, int], int] = {
        tok.start: i for i, tok in enumerate(tokens)
    }

    param_names = _parameter_names(func)
    local_names = _local_bindings(func, param_names)
    call_positions = _call_sites(func, tokens)

    categories: list[Category] = []
    name_token_pos = _def_name_position(func, tokens)
    attribute_name_positions = _attribute_positions(func, tokens)
    keyword_arg_positions = _keyword_arg_positions(func, tokens, pos_index)

    for i, tok in enumerate(tokens):
        cat = Category.OTHER
        if tok.type == pytokenize.NAME:
            text = tok.text
            if keyword.iskeyword(text):
                if text in PYTHON_CONTROL_KEYWORDS:
                    cat = Category.LANGUAGE_KEYWORD
            elif i == name_token_pos:
                cat = Category.METHOD_NAME
            elif i in call_positions:
                cat = Category.METHOD_CALL
            elif i in attribute_name_positions or i in keyword_arg_positions:
                cat = Category.OTHER
            elif text in param_names:
                cat = Category.INPUT_VARIABLE
            elif text in local_names:
                cat = Category.LOCAL_VARIABLE
        categories.append(cat)

    cyclo = _cyclomatic(func)
    depth = _nested_depth(func)

    return PyStructure(
        tokens=tokens,
        categories=categories,
        byte_spans=spans,
        param_names=param_names,
        local_names=local_names,
        cyclomatic=cyclo,
        nested_block_depth=depth,
    )


def _parameter_names(func: ast.FunctionDef | ast.AsyncFunctionDef) -> set[str]:
    args = func.args
    names = [a.arg for a in args.posonlyargs + args.args + args.kwonlyargs]
    if args.vararg:
        names.append(args.vararg.arg)
    if args.kwarg:
        names.append(args.kwarg.arg)
    return set(names)


def _local_bindings(func, param_names: set[str]) -> set[str]:
    """Names bound by assignment-like statements in the body."""
    bound: set[str] = set()

    def collect_target(node: ast.AST) -> None:
        for sub in ast.walk(node):
            if isinstance(sub, ast.Name):
                bound.add(sub.id)

    for node in ast.walk(func):
        if isinstance(node, ast.Assign):
            for t in node.targets:
                collect_target(t)
        elif isinstance(node, (ast.AugAssign, ast.AnnAssign)):
            collect_target(node.target)
        elif isinstance(node, (ast.For, ast.AsyncFor)):
            collect_target(node.target)
        elif isinstance(node, ast.NamedExpr):
            collect_target(node.target)
        elif isinstance(node, ast.withitem) and node.optional_vars is not None:
            collect_target(node.optional_vars)
        elif isinstance(node, ast.ExceptHandler) and node.name:
            bound.add(node.name)
        elif isinstance(node, ast.comprehension):
            collect_target(node.target)
        elif isinstance(node, ast.Lambda):
            bound.update(_parameter_names_lambda(node))
    return bound - param_names


def _parameter_names_lambda(node: ast.Lambda) -> set[str]:
    args = node.args
    names = [a.arg for a in args.posonlyargs + args.args + args.kwonlyargs]
    if args.vararg:
        names.append(args.vararg.arg)
    if args.kwarg:
        names.append(args.kwarg.arg)
    return set(names)


def _def_name_position(func, tokens) -> int:
    # the name token follows the 'def' keyword of this function
    for i, tok in enumerate(tokens):
        if (
            tok.type == pytokenize.NAME
            and tok.text == "def"
            and tok.start[0] == func.lineno
        ):
            return i + 1
    return -1


def _call_sites(func, tokens) -> set[int]:
    """Token indices that are callee names of invocations in the body."""
    positions: set[int] = set()
    start_index = {tok.start: i for i, tok in enumerate(tokens)}
    for node in ast.walk(func):
        if not isinstance(node, ast.Call):
            continue
        fn = node.func
        if isinstance(fn, ast.Name):
            idx = start_index.get((fn.lineno, fn.col_offset))
            if idx is not None:
                positions.add(idx)
        elif isinstance(fn, ast.Attribute):
            idx = _attr_name_token(fn, tokens)
            if idx is not None:
                positions.add(idx)
    return positions


def _attr_name_token(node: ast.Attribute, tokens) -> int | None:
    """Token index of the attribute name in ``value.attr``."""
    value_end = (node.value.end_lineno, node.value.end_col_offset)
    limit = (node.end_lineno, node.end_col_offset)
    for i, tok in enumerate(tokens):
        if tok.start >= value_end and tok.end <= limit and tok.text == node.attr \
                and tok.type == pytokenize.NAME:
            return i
    return None


def _attribute_positions(func, tokens) -> set[int]:
    out: set[int] = set()
    for node in ast.walk(func):
        if isinstance(node, ast.Attribute):
            idx = _attr_name_token(node, tokens)
            if idx is not None:
                out.add(idx)
    return out


def _keyword_arg_positions(func, tokens, pos_index) -> set[int]:
    out: set[int] = set()
    for node in ast.walk(func):
        if not isinstance(node, ast.Call):
            continue
        for kw in node.keywords:
            if kw.arg is None:
                continue
            line = getattr(kw, "lineno", None)
            col = getattr(kw, "col_offset", None)
            if line is None or col is None:
                continue
            idx = pos_index.get((line, col))
            if idx is not None and tokens[idx].text == kw.arg:
                out.add(idx)
    return out


def _cyclomatic(func) -> int:
    count = 1
    for node in ast.walk(func):
        if isinstance(node, ast.If):
            count += 1
        elif isinstance(node, (ast.While, ast.For, ast.AsyncFor)):
            count += 1
        elif isinstance(node, ast.IfExp):
            count += 1
        elif isinstance(node, ast.ExceptHandler):
            count += 1
        elif isinstance(node, ast.BoolOp):
            count += len(node.values) - 1
        elif isinstance(node, ast.comprehension):
            count += 1 + len(node.ifs)
        elif isinstance(node, ast.match_case):
            count += 1
    return count


_BLOCK_NODES = (
    ast.If, ast.For, ast.AsyncFor, ast.While, ast.With, ast.AsyncWith,
    ast.Try, ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef,
)
if hasattr(ast, "TryStar"):
    _BLOCK_NODES = _BLOCK_NODES + (ast.TryStar,)
if hasattr(ast, "Match"):
    _BLOCK_NODES = _BLOCK_NODES + (ast.Match,)


def _nested_depth(func) -> int:
    """Maximum nesting of block statements inside the function body.

    elif arms do not add a level: an If that is the sole statement of its
    parent's orelse at the same column is the same visual level.
    """

    max_depth = 0

    def visit_block(stmts: list[ast.stmt], depth: int) -> None:
        nonlocal max_depth
        for stmt in stmts:
            visit_stmt(stmt, depth)

    def visit_stmt(stmt: ast.stmt, depth: int) -> None:
        nonlocal max_depth
        if isinstance(stmt, _BLOCK_NODES):
            d = depth + 1
            max_depth = max(max_depth, d)
            for name in ("body", "orelse", "finalbody"):
                block = getattr(stmt, name, None)
                if not block:
                    continue
                if (
                    name == "orelse"
                    and isinstance(stmt, ast.If)
                    and len(block) == 1
                    and isinstance(block[0], ast.If)
                    and block[0].col_offset == stmt.col_offset
                ):
                    visit_stmt(block[0], depth)  # elif: same level
                else:
                    visit_block(block, d)
            for handler in getattr(stmt, "handlers", []):
                visit_block(handler.body, d)
            for case in getattr(stmt, "cases", []):
                visit_block(case.body, d)

    visit_block(func.body, 0)
    return max_depth
