"""Command-line frontend: embed a vocabulary listing into a table file.

Exit codes: 0 success, 1 runtime failure, 2 usage error (argparse).
"""
from __future__ import annotations

import argparse
import sys

from .backends import DEFAULT_MODEL, get_backend
from .errors import ExportError
from .export import DEFAULT_PROBE_TEXTS, export_table
from .vocab import parse_vocab_listing


def _read_extra_texts(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        return [line for line in fh.read().splitlines() if line]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedgen",
        description="Export a sentence-embedding table for the forcelang "
                    "vocabulary")
    parser.add_argument("--vocab", required=True,
                        help="vocabulary listing from `forcelang vocab`")
    parser.add_argument("--extra", default=None,
                        help="file of additional texts, one per line")
    parser.add_argument("--out", required=True, help="embedding table TSV path")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="sentence-transformers model id, or hashing:<seed> "
                             "for the deterministic stub")
    parser.add_argument("--manifest", default=None,
                        help="manifest path (default: <out>.manifest.json)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        listing = parse_vocab_listing(args.vocab)
        texts = listing.texts()
        texts.extend(DEFAULT_PROBE_TEXTS)
        if args.extra:
            texts.extend(_read_extra_texts(args.extra))
        backend = get_backend(args.model)
        manifest_path = args.manifest or args.out + ".manifest.json"
        manifest = export_table(texts, backend, args.out, manifest_path)
    except (ExportError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {manifest.token_count} rows to {args.out} "
          f"(model: {manifest.model}; manifest: {manifest_path})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
