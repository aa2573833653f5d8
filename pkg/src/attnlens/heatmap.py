"""Static HTML attention heatmaps.

One (layer, step) attention row is min-max normalized to [0, 1] per
sample and rendered as background opacity behind each code token, with
the original source layout preserved.
"""

from __future__ import annotations

import html

import numpy as np

from .alignment import AlignedSample

_STYLE = (
    "<style>\n"
    ".attn-heatmap pre { background: #fbfbfb; padding: 0.8em; "
    "border: 1px solid #ddd; line-height: 1.5; }\n"
    ".attn-heatmap .tok { border-radius: 2px; }\n"
    ".attn-heatmap .caption { font: 13px sans-serif; color: #333; "
    "margin: 0.3em 0; }\n"
    "</style>\n"
)


def render_heatmap(
    sample: AlignedSample,
    source_text: str,
    layer: int,
    step: int,
) -> str:
    """HTML fragment highlighting one attention row over the source."""
    if not 0 <= layer < sample.num_layers:
        raise IndexError(f"layer {layer} outside [0, {sample.num_layers})")
    if not 0 <= step < sample.num_steps:
        raise IndexError(f"step {step} outside [0, {sample.num_steps})")

    row = sample.attention[layer, step]
    lo = float(row.min()) if row.size else 0.0
    hi = float(row.max()) if row.size else 0.0
    degenerate = hi <= lo
    if degenerate:
        opacities = np.zeros_like(row)
    else:
        opacities = (row - lo) / (hi - lo)

    source_bytes = source_text.encode("utf-8")
    parts: list[str] = []
    cursor = 0
    for tok, opacity in zip(sample.code_tokens, opacities):
        if tok.char_start > cursor:
            parts.append(html.escape(
                source_bytes[cursor:tok.char_start].decode("utf-8")))
        text = source_bytes[tok.char_start:tok.char_end].decode("utf-8")
        parts.append(
            f'<span class="tok" '
            f'style="background-color: rgba(30, 100, 200, {opacity:.6f})">'
            f"{html.escape(text)}</span>"
        )
        cursor = tok.char_end
    if cursor < len(source_bytes):
        parts.append(html.escape(source_bytes[cursor:].decode("utf-8")))

    step_token = (
        sample.output_steps[step] if step < len(sample.output_steps) else ""
    )
    caption = (
        f"sample {html.escape(sample.record_id)} &middot; layer {layer} "
        f"&middot; step {step} ({html.escape(step_token)!s})"
    )
    if degenerate:
        caption += " &middot; constant attention row; normalization degenerate"
    return (
        '<div class="attn-heatmap">'
        f'<div class="caption">{caption}</div>'
        f"<pre>{''.join(parts)}</pre>"
        "</div>"
    )


def render_report(
    fragments: list[str],
    title: str,
    config_hash: str,
) -> str:
    """Assemble heatmap fragments into a standalone HTML page (no
    timestamps; a config hash identifies the run)."""
    body = "\n".join(fragments)
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>{html.escape(title)}</title>\n{_STYLE}</head>\n<body>\n"
        f"<h1>{html.escape(title)}</h1>\n"
        f'<p class="caption">config {html.escape(config_hash)}</p>\n'
        f"{body}\n</body></html>\n"
    )
