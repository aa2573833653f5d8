"""Word-level tokenizer with byte offsets.

Splits on identifier/number/punctuation boundaries so each vocabulary
entry corresponds to one contiguous source span; decoding a span
reproduces the token string exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

TOKEN_RE = re.compile(r"[^\W\d]\w*|\d+|\S")

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)


@dataclass(frozen=True)
class Piece:
    text: str
    char_start: int  # byte offset into UTF-8 text
    char_end: int


def split_with_offsets(text: str) -> list[Piece]:
    pieces = []
    data = text.encode("utf-8")
    # regex works on str; map char positions to byte offsets
    starts = [0] * (len(text) + 1)
    b = 0
    for i, ch in enumerate(text):
        starts[i] = b
        b += len(ch.encode("utf-8"))
    starts[len(text)] = b
    for m in TOKEN_RE.finditer(text):
        s, e = starts[m.start()], starts[m.end()]
        pieces.append(Piece(m.group(), s, e))
        assert data[s:e].decode("utf-8") == m.group()
    return pieces


class Vocab:
    def __init__(self, tokens: list[str]):
        self.itos = list(SPECIALS) + [t for t in tokens if t not in SPECIALS]
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    @property
    def pad(self) -> int:
        return self.stoi[PAD]

    @property
    def bos(self) -> int:
        return self.stoi[BOS]

    @property
    def eos(self) -> int:
        return self.stoi[EOS]

    def encode(self, tokens: list[str]) -> list[int]:
        unk = self.stoi[UNK]
        return [self.stoi.get(t, unk) for t in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.itos[i] for i in ids]

    def to_dict(self) -> dict:
        return {"itos": self.itos}

    @classmethod
    def from_dict(cls, payload: dict) -> "Vocab":
        vocab = cls([])
        vocab.itos = list(payload["itos"])
        vocab.stoi = {t: i for i, t in enumerate(vocab.itos)}
        return vocab

    @classmethod
    def build(cls, texts: list[str]) -> "Vocab":
        seen: dict[str, None] = {}
        for text in texts:
            for piece in split_with_offsets(text):
                seen.setdefault(piece.text)
        return cls(sorted(seen))
