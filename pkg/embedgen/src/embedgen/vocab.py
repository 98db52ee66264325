"""Parser for the vocabulary listing printed by `forcelang vocab`.

The listing is plain text: a header line naming the vocabulary version,
then one `kind<TAB>text` line per entry, where kind is modifier,
direction, or phrase.  Phrase text may be empty (the empty phrase) and
may contain spaces.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ListingError

HEADER_PREFIX = "# forcelang vocabulary v"

_KINDS = ("modifier", "direction", "phrase")


@dataclass(frozen=True)
class VocabListing:
    modifiers: tuple
    directions: tuple
    renderings: tuple

    def texts(self) -> list:
        """Unique export texts in listing order: words first, then phrase
        renderings.  Single-word renderings collapse onto their word."""
        seen = set()
        out = []
        for text in (*self.modifiers, *self.directions, *self.renderings):
            if text not in seen:
                seen.add(text)
                out.append(text)
        return out


def parse_vocab_listing(path) -> VocabListing:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise ListingError(f"cannot read vocabulary listing {path}: {e}") from None
    if not lines or not lines[0].startswith(HEADER_PREFIX):
        raise ListingError(f"{path}: line 1: expected header {HEADER_PREFIX!r}...")
    bins = {kind: [] for kind in _KINDS}
    for num, line in enumerate(lines[1:], start=2):
        if "\t" not in line:
            raise ListingError(f"{path}: line {num}: expected kind<TAB>text")
        kind, text = line.split("\t", 1)
        if kind not in _KINDS:
            raise ListingError(f"{path}: line {num}: unknown entry kind {kind!r}")
        if text in bins[kind]:
            raise ListingError(f"{path}: line {num}: duplicate {kind} {text!r}")
        bins[kind].append(text)
    if not bins["phrase"]:
        raise ListingError(f"{path}: no phrase entries")
    return VocabListing(
        modifiers=tuple(bins["modifier"]),
        directions=tuple(bins["direction"]),
        renderings=tuple(bins["phrase"]),
    )
