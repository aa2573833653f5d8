"""attn-export: dump per-layer cross-attention from an encoder-decoder
checkpoint in the attnlens wire format."""

from .export import DatasetRow, ExportConfig, export_rows, read_split
from .generate import beam_search, forced_decode_attention
from .model import ModelConfig, Seq2SeqWithAttention, load_checkpoint, save_checkpoint
from .tokenizer import Vocab, split_with_offsets

__version__ = "0.1.0"

__all__ = [
    "DatasetRow",
    "ExportConfig",
    "ModelConfig",
    "Seq2SeqWithAttention",
    "Vocab",
    "beam_search",
    "export_rows",
    "forced_decode_attention",
    "load_checkpoint",
    "read_split",
    "save_checkpoint",
    "split_with_offsets",
]
