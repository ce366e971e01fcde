"""Extraction command line: audio + TextGrids + frozen backbone -> corpus."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import ExtractError
from .extract import ExtractionJob, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonoextract",
        description="Extract phone-level mean embeddings into the corpus interchange format",
    )
    parser.add_argument("--version", action="version", version=f"phonoextract {__version__}")
    parser.add_argument("--audio", required=True, help="directory of <speaker>/<utt>.wav files")
    parser.add_argument("--textgrids", required=True, help="directory of matching TextGrids")
    parser.add_argument("--backbone", required=True, help="'fbank64' or 'hf:<model_id>'")
    parser.add_argument("--layer", default="last", help="'last' or a hidden-layer index")
    parser.add_argument("--out", required=True, help="corpus root to write")
    parser.add_argument("--language", default="en")
    parser.add_argument("--dataset", default="extracted")
    parser.add_argument("--corpus-name", default="extracted")
    parser.add_argument("--phone-tier", default="phones")
    parser.add_argument("--word-tier", default="words")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    layer: str | int = args.layer if args.layer == "last" else int(args.layer)
    job = ExtractionJob(
        audio_dir=args.audio,
        textgrid_dir=args.textgrids,
        backbone=args.backbone,
        out_dir=args.out,
        layer=layer,
        phone_tier=args.phone_tier,
        word_tier=args.word_tier,
        corpus_name=args.corpus_name,
        language=args.language,
        dataset=args.dataset,
    )
    try:
        out = extract(job)
    except ExtractError as exc:
        print(f"extraction error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote corpus to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
