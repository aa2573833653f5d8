"""Beam-search generation plus forced-decode attention capture.

Beam search only selects the output token sequence; the cross-attention
that the dump carries is re-gathered afterwards by one forced decoding
pass over the winning hypothesis. With causal masking that pass produces
exactly the stepwise rows, independent of beam bookkeeping.
"""

from __future__ import annotations

import torch

from .model import Seq2SeqWithAttention
from .tokenizer import Vocab


@torch.no_grad()
def beam_search(
    model: Seq2SeqWithAttention,
    vocab: Vocab,
    src_ids: list[int],
    beam_size: int,
    max_target_length: int,
) -> list[int]:
    """Token ids of the best hypothesis (no BOS/EOS)."""
    device = next(model.parameters()).device
    src = torch.tensor([src_ids], device=device)
    padding = torch.zeros_like(src, dtype=torch.bool)
    memory = model.encode(src, padding)

    # (tokens, logprob, finished)
    beams: list[tuple[list[int], float, bool]] = [([vocab.bos], 0.0, False)]
    for _ in range(max_target_length):
        if all(done for _, _, done in beams):
            break
        candidates: list[tuple[list[int], float, bool]] = []
        for tokens, score, done in beams:
            if done:
                candidates.append((tokens, score, True))
                continue
            tgt = torch.tensor([tokens], device=device)
            logits, _ = model.decode(
                tgt, memory, padding)
            log_probs = torch.log_softmax(logits[0, -1], dim=-1)
            top = torch.topk(log_probs, min(beam_size, log_probs.numel()))
            for logp, idx in zip(top.values.tolist(), top.indices.tolist()):
                candidates.append(
                    (tokens + [idx], score + logp, idx == vocab.eos))
        candidates.sort(key=lambda c: c[1] / max(1, len(c[0]) - 1),
                        reverse=True)
        beams = candidates[:beam_size]

    best_tokens, _, _ = beams[0]
    out = best_tokens[1:]  # drop BOS
    if out and out[-1] == vocab.eos:
        out = out[:-1]
    return out


@torch.no_grad()
def forced_decode_attention(
    model: Seq2SeqWithAttention,
    vocab: Vocab,
    src_ids: list[int],
    out_ids: list[int],
    per_head: bool = False,
) -> torch.Tensor:
    """Cross-attention rows for each generated token of a fixed output.

    Returns [layers, steps, src_len]; with per_head=True heads become
    pseudo-layers: [layers*heads, steps, src_len]. Row for generated
    token s is the decoder's attention at query position s (the prefix
    [BOS, y1..y_{s-1}] ends at that position under causal masking).
    """
    device = next(model.parameters()).device
    src = torch.tensor([src_ids], device=device)
    padding = torch.zeros_like(src, dtype=torch.bool)
    tgt = torch.tensor([[vocab.bos] + list(out_ids)], device=device)
    memory = model.encode(src, padding)
    _, attn = model.decode(tgt, memory, padding,
                           average_heads=not per_head)
    n_steps = len(out_ids)
    if per_head:
        # attn: [layers, batch, heads, tgt, src]
        layers, _, heads, _, src_len = attn.shape
        rows = attn[:, 0, :, :n_steps, :]
        return rows.reshape(layers * heads, n_steps, src_len)
    # attn: [layers, batch, tgt, src]
    return attn[:, 0, :n_steps, :]
