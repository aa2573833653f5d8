"""Per-language keyword tables.

CONTROL_KEYWORDS is the fixed per-language list that defines the
LanguageKeyword category. LEXER_KEYWORDS is the full reserved-word set the
lexer recognizes: a superset used to keep identifiers and keywords apart.
Primitive type keywords live in PRIMITIVE_TYPES and categorize as
TypeIdentifier unless they already appear in CONTROL_KEYWORDS.
"""

from __future__ import annotations

import hashlib
import json

PYTHON_CONTROL_KEYWORDS = frozenset({
    "False", "None", "True", "and", "as", "assert", "async", "await",
    "break", "class", "continue", "def", "del", "elif", "else", "except",
    "finally", "for", "from", "global", "if", "import", "in", "is",
    "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try",
    "while", "with", "yield",
})

JAVA_CONTROL_KEYWORDS = frozenset({
    "if", "else", "switch", "case", "while", "class", "enum", "interface",
    "annotation", "public", "protected", "private", "static", "abstract",
    "final", "native", "synchronized", "transient", "volatile", "strictfp",
    "assert", "return", "throw", "try", "catch", "finally", "default",
    "super", "do", "for", "break", "continue", "void", "import",
    "extends", "implements", "instanceof", "new", "null", "package",
    "this", "throws",
})

# C# mirrors Java's strategy: control flow, declarations, and modifiers.
CSHARP_CONTROL_KEYWORDS = frozenset({
    "if", "else", "switch", "case", "while", "class", "enum", "interface",
    "struct", "public", "protected", "private", "internal", "static",
    "abstract", "sealed", "virtual", "override", "readonly", "volatile",
    "return", "throw", "try", "catch", "finally", "default", "base",
    "do", "for", "foreach", "break", "continue", "void", "using",
    "namespace", "is", "as", "in", "out", "ref", "params", "new", "null",
    "this", "lock", "goto", "delegate", "event", "operator", "async",
    "await", "yield", "checked", "unchecked", "typeof", "sizeof",
    "unsafe", "fixed", "extern", "const", "partial",
})

JAVA_PRIMITIVE_TYPES = frozenset({
    "boolean", "byte", "char", "short", "int", "long", "float", "double",
})

CSHARP_PRIMITIVE_TYPES = frozenset({
    "bool", "byte", "sbyte", "char", "short", "ushort", "int", "uint",
    "long", "ulong", "float", "double", "decimal", "string", "object",
    "var", "dynamic",
})

# Everything the Java lexer treats as reserved. PRIMITIVE types are
# reserved words too; true/false literals are reserved but categorize
# as Other (they are not in the control list and not types).
JAVA_LEXER_KEYWORDS = (
    JAVA_CONTROL_KEYWORDS - {"annotation"}
) | JAVA_PRIMITIVE_TYPES | frozenset({"true", "false", "goto", "const"})

CSHARP_LEXER_KEYWORDS = (
    CSHARP_CONTROL_KEYWORDS - {"partial"}
) | CSHARP_PRIMITIVE_TYPES - {"var", "dynamic"} | frozenset({
    "true", "false", "implicit", "explicit", "stackalloc", "where",
})

CONTROL_KEYWORDS = {
    "python": PYTHON_CONTROL_KEYWORDS,
    "java": JAVA_CONTROL_KEYWORDS,
    "csharp": CSHARP_CONTROL_KEYWORDS,
}

PRIMITIVE_TYPES = {
    "python": frozenset(),
    "java": JAVA_PRIMITIVE_TYPES,
    "csharp": CSHARP_PRIMITIVE_TYPES,
}


def keyword_table_checksum(language: str) -> str:
    """Stable digest of a language's keyword tables, pinned by grammars.lock."""
    payload = json.dumps(
        {
            "control": sorted(CONTROL_KEYWORDS[language]),
            "primitive": sorted(PRIMITIVE_TYPES[language]),
        },
        separators=(",", ":"),
    ).encode()
    return hashlib.sha256(payload).hexdigest()
