"""Minimal transformer encoder-decoder that exposes per-layer cross
attention.

Decoder layers return their encoder-decoder attention weights
(head-averaged by default, per-head on request), which is the tensor the
dump format carries. Checkpoints bundle config, vocab, and weights.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
import torch.nn as nn

from .tokenizer import Vocab


@dataclass
class ModelConfig:
    vocab_size: int
    d_model: int = 64
    n_heads: int = 2
    num_encoder_layers: int = 2
    num_decoder_layers: int = 2
    ffn_dim: int = 128
    dropout: float = 0.0
    max_positions: int = 512


class PositionalEncoding(nn.Module):
    def __init__(self, d_model: int, max_len: int):
        super().__init__()
        pe = torch.zeros(max_len, d_model)
        position = torch.arange(max_len).unsqueeze(1).float()
        div = torch.exp(torch.arange(0, d_model, 2).float()
                        * (-math.log(10000.0) / d_model))
        pe[:, 0::2] = torch.sin(position * div)
        pe[:, 1::2] = torch.cos(position * div)
        self.register_buffer("pe", pe)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.pe[: x.size(1)].unsqueeze(0)


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.self_attn = nn.MultiheadAttention(
            cfg.d_model, cfg.n_heads, dropout=cfg.dropout, batch_first=True)
        self.cross_attn = nn.MultiheadAttention(
            cfg.d_model, cfg.n_heads, dropout=cfg.dropout, batch_first=True)
        self.ffn = nn.Sequential(
            nn.Linear(cfg.d_model, cfg.ffn_dim), nn.ReLU(),
            nn.Linear(cfg.ffn_dim, cfg.d_model),
        )
        self.norm1 = nn.LayerNorm(cfg.d_model)
        self.norm2 = nn.LayerNorm(cfg.d_model)
        self.norm3 = nn.LayerNorm(cfg.d_model)

    def forward(self, x, memory, tgt_mask, memory_padding_mask,
                average_heads: bool = True):
        attn_out, _ = self.self_attn(x, x, x, attn_mask=tgt_mask,
                                     need_weights=False)
        x = self.norm1(x + attn_out)
        cross_out, cross_weights = self.cross_attn(
            x, memory, memory,
            key_padding_mask=memory_padding_mask,
            need_weights=True,
            average_attn_weights=average_heads,
        )
        x = self.norm2(x + cross_out)
        x = self.norm3(x + self.ffn(x))
        return x, cross_weights


class Seq2SeqWithAttention(nn.Module):
    """Encoder-decoder over token ids; forward returns logits plus the
    cross-attention stack [layers][batch][tgt][src] (heads averaged) or
    [layers][batch][heads][tgt][src]."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.src_embed = nn.Embedding(cfg.vocab_size, cfg.d_model)
        self.tgt_embed = nn.Embedding(cfg.vocab_size, cfg.d_model)
        self.positional = PositionalEncoding(cfg.d_model, cfg.max_positions)
        enc_layer = nn.TransformerEncoderLayer(
            cfg.d_model, cfg.n_heads, cfg.ffn_dim, cfg.dropout,
            batch_first=True)
        # nested-tensor fast path is nondeterministic across calls; keep off
        self.encoder = nn.TransformerEncoder(
            enc_layer, cfg.num_encoder_layers, enable_nested_tensor=False)
        self.decoder_layers = nn.ModuleList(
            DecoderLayer(cfg) for _ in range(cfg.num_decoder_layers))
        self.out_proj = nn.Linear(cfg.d_model, cfg.vocab_size)

    def encode(self, src_ids: torch.Tensor,
               src_padding_mask: torch.Tensor) -> torch.Tensor:
        x = self.positional(self.src_embed(src_ids))
        return self.encoder(x, src_key_padding_mask=src_padding_mask)

    def decode(self, tgt_ids: torch.Tensor, memory: torch.Tensor,
               src_padding_mask: torch.Tensor,
               average_heads: bool = True):
        t = tgt_ids.size(1)
        causal = torch.triu(
            torch.full((t, t), float("-inf"), device=tgt_ids.device),
            diagonal=1)
        x = self.positional(self.tgt_embed(tgt_ids))
        attentions = []
        for layer in self.decoder_layers:
            x, weights = layer(x, memory, causal, src_padding_mask,
                               average_heads=average_heads)
            attentions.append(weights)
        return self.out_proj(x), torch.stack(attentions)

    def forward(self, src_ids, tgt_ids, src_padding_mask,
                average_heads: bool = True):
        memory = self.encode(src_ids, src_padding_mask)
        return self.decode(tgt_ids, memory, src_padding_mask,
                           average_heads=average_heads)


def save_checkpoint(path: str | Path, model: Seq2SeqWithAttention,
                    vocab: Vocab) -> None:
    torch.save({
        "config": asdict(model.cfg),
        "vocab": vocab.to_dict(),
        "state_dict": model.state_dict(),
    }, path)


def load_checkpoint(path: str | Path) -> tuple[Seq2SeqWithAttention, Vocab]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    cfg = ModelConfig(**payload["config"])
    model = Seq2SeqWithAttention(cfg)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, Vocab.from_dict(payload["vocab"])
