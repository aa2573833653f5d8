"""attn-export command line.

    attn-export --model ckpt.pt --task CR --lang java --data data/ \
                --split test --out dump.jsonl --max-src 256 --max-tgt 128 \
                --beam 10 [--per-head]

Output is the analyzer's dump wire format plus a .meta.json sidecar.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .export import ExportConfig, export_rows, read_split


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attn-export",
        description="Export per-layer cross-attention dumps from an "
                    "encoder-decoder checkpoint",
    )
    parser.add_argument("--model", required=True,
                        help="checkpoint path")
    parser.add_argument("--task", choices=("CDG", "CR", "CT"), default="CR")
    parser.add_argument("--lang", choices=("java", "python", "csharp"),
                        default="java", dest="language")
    parser.add_argument("--data", required=True,
                        help="directory containing <split>.jsonl")
    parser.add_argument("--split", default="test")
    parser.add_argument("--out", default="dump.jsonl")
    parser.add_argument("--max-src", type=int, default=256)
    parser.add_argument("--max-tgt", type=int, default=128)
    parser.add_argument("--beam", type=int, default=10)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--per-head", action="store_true",
                        help="export one pseudo-layer per attention head")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = ExportConfig(
            model_path=args.model,
            task=args.task,
            source_language=args.language,
            max_source_length=args.max_src,
            max_target_length=args.max_tgt,
            beam_size=args.beam,
            device=args.device,
            per_head=args.per_head,
            out_path=args.out,
        )
        rows = read_split(args.data, args.split)
        sidecar = export_rows(rows, config)
    except (OSError, ValueError, KeyError) as exc:
        print(json.dumps({"error": {
            "type": type(exc).__name__, "message": str(exc),
        }}), file=sys.stderr)
        return 1
    print(json.dumps({
        "records": len(rows),
        "out": config.out_path,
        "num_layers": sidecar["num_layers"],
        "truncated": len(sidecar["truncated_ids"]),
    }))
    return 0


if __name__ == "__main__":
    sys.exit(main())
