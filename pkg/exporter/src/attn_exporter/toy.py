"""Toy copy-task corpus and trainer, used by tests and demos.

Generates tiny Java-style methods over a fixed vocabulary and trains the
seq2seq model to reproduce its input, giving a deterministic checkpoint
whose dumps exercise the analyzer end to end.
"""

from __future__ import annotations

import random
from pathlib import Path

import torch
import torch.nn.functional as F

from .model import ModelConfig, Seq2SeqWithAttention, save_checkpoint
from .tokenizer import Vocab, split_with_offsets

NAMES = ["get", "put", "run", "fix", "sum"]
ARGS = ["a", "b", "c", "x", "y"]


def toy_method(rng: random.Random) -> str:
    name = rng.choice(NAMES)
    arg = rng.choice(ARGS)
    other = rng.choice([a for a in ARGS if a != arg])
    body = rng.choice([
        f"return {arg} ;",
        f"return {arg} + {other} ;",
        f"int {other} = {arg} ; return {other} ;",
    ])
    return f"int {name} ( int {arg} ) {{ {body} }}"


def toy_corpus(n: int, seed: int = 7) -> list[str]:
    rng = random.Random(seed)
    return [toy_method(rng) for _ in range(n)]


def build_toy_vocab() -> Vocab:
    texts = [f"int {n} ( int {a} ) {{ return {a} + {b} ; }}"
             for n in NAMES for a in ARGS for b in ARGS]
    return Vocab.build(texts)


def train_toy_checkpoint(
    path: str | Path,
    steps: int = 400,
    batch_size: int = 32,
    seed: int = 11,
    num_decoder_layers: int = 2,
) -> None:
    """Train a small copy model and save it; a few hundred steps suffice."""
    torch.manual_seed(seed)
    rng = random.Random(seed)
    vocab = build_toy_vocab()
    cfg = ModelConfig(
        vocab_size=len(vocab),
        d_model=64,
        n_heads=2,
        num_encoder_layers=2,
        num_decoder_layers=num_decoder_layers,
        ffn_dim=128,
    )
    model = Seq2SeqWithAttention(cfg)
    optimizer = torch.optim.Adam(model.parameters(), lr=3e-4)

    def batch():
        sources = [toy_method(rng) for _ in range(batch_size)]
        token_lists = [[p.text for p in split_with_offsets(s)]
                       for s in sources]
        max_len = max(len(t) for t in token_lists)
        src = torch.full((batch_size, max_len), vocab.pad, dtype=torch.long)
        tgt_in = torch.full((batch_size, max_len + 1), vocab.pad,
                            dtype=torch.long)
        tgt_out = torch.full((batch_size, max_len + 1), vocab.pad,
                             dtype=torch.long)
        padding = torch.ones((batch_size, max_len), dtype=torch.bool)
        for i, tokens in enumerate(token_lists):
            ids = vocab.encode(tokens)
            src[i, : len(ids)] = torch.tensor(ids)
            padding[i, : len(ids)] = False
            tgt_in[i, 0] = vocab.bos
            tgt_in[i, 1: len(ids) + 1] = torch.tensor(ids)
            tgt_out[i, : len(ids)] = torch.tensor(ids)
            tgt_out[i, len(ids)] = vocab.eos
        return src, tgt_in, tgt_out, padding

    model.train()
    for step in range(steps):
        src, tgt_in, tgt_out, padding = batch()
        logits, _ = model(src, tgt_in, padding)
        loss = F.cross_entropy(
            logits.reshape(-1, cfg.vocab_size), tgt_out.reshape(-1),
            ignore_index=vocab.pad,
        )
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    model.eval()
    save_checkpoint(path, model, vocab)


def write_toy_split(data_dir: str | Path, split: str, n: int,
                    seed: int = 23) -> Path:
    """A copy-task dataset split: gold equals source."""
    import json

    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    path = data_dir / f"{split}.jsonl"
    lines = []
    for i, source in enumerate(toy_corpus(n, seed=seed)):
        lines.append(json.dumps(
            {"id": f"toy{i}", "source": source, "gold": source}))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
