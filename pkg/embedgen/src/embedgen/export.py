"""Table export: embed texts, L2-normalize, write the TSV the primary
toolkit's table provider parses, plus a manifest recording what was done.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .backends import EMBED_DIM
from .errors import ExportError

# Fixed probe set appended to every export.  The first entries exercise
# directional paraphrases and off-vocabulary text for downstream matcher
# checks; the rest pad the table with unrelated sentences.  They also
# keep the row count above the minimum the manifest contract requires.
DEFAULT_PROBE_TEXTS = (
    "Let's go upward and to the right",
    "I like apples",
    "push up and to the right",
    "pull back gently",
    "shove it forward hard",
    "ease it down slowly",
    "nudge left",
    "yank it backward quickly",
    "press down firmly",
    "lift straight up",
    "drag it to the right",
    "slide it to the left smoothly",
    "move diagonally forward and left",
    "tap it lightly",
    "drive forward with force",
    "let go",
    "hold still",
    "the weather is nice today",
    "robots are interesting",
    "seven green bottles",
    "turn the page",
    "open the window",
    "a quick brown fox",
    "do nothing at all",
)

MIN_TOKEN_COUNT = 277


@dataclass(frozen=True)
class ExportManifest:
    model: str
    dim: int
    token_count: int
    sha256: str
    sanity: dict

    def __post_init__(self):
        if self.dim != EMBED_DIM:
            raise ExportError(f"embedding dimension must be {EMBED_DIM}, got {self.dim}")
        if self.token_count < MIN_TOKEN_COUNT:
            raise ExportError(
                f"table needs at least {MIN_TOKEN_COUNT} rows, got {self.token_count}")

    def payload(self) -> dict:
        return {
            "model": self.model,
            "dim": self.dim,
            "token_count": self.token_count,
            "sha256": self.sha256,
            "sanity": self.sanity,
        }


def _cosine(a, b) -> float:
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


def _sanity_report(texts, rows) -> dict:
    # recorded for attribution, never a build failure: real encoders are
    # expected to place "immediately" nearer "quickly" than "backward" is
    index = {t: i for i, t in enumerate(texts)}
    needed = ("quickly", "immediately", "backward")
    if any(w not in index for w in needed):
        return {}
    cos_qi = _cosine(rows[index["quickly"]], rows[index["immediately"]])
    cos_qb = _cosine(rows[index["quickly"]], rows[index["backward"]])
    return {
        "cos_quickly_immediately": cos_qi,
        "cos_quickly_backward": cos_qb,
        "semantic_ordering_ok": bool(cos_qi > cos_qb),
    }


def export_table(texts, backend, out_path, manifest_path) -> ExportManifest:
    """Embed every text once (duplicates collapse), unit-normalize, and
    write the TAB-delimited table plus its manifest.  Returns the manifest.
    """
    seen = set()
    unique = []
    for text in texts:
        if text not in seen:
            seen.add(text)
            unique.append(text)
    if not unique:
        raise ExportError("nothing to export")

    vecs = np.asarray(backend.embed_many(unique), dtype=float)
    if vecs.shape != (len(unique), EMBED_DIM):
        raise ExportError(
            f"backend returned shape {vecs.shape}, expected ({len(unique)}, {EMBED_DIM})")
    if not np.all(np.isfinite(vecs)):
        raise ExportError("backend returned non-finite values")
    norms = np.linalg.norm(vecs, axis=1)
    if np.any(norms == 0.0):
        bad = unique[int(np.argmin(norms))]
        raise ExportError(f"backend returned a zero vector for {bad!r}")
    rows = vecs / norms[:, None]

    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(f"dim\t{EMBED_DIM}\n")
        for text, row in zip(unique, rows):
            fh.write(text + "\t" + "\t".join("%.8g" % v for v in row) + "\n")
    with open(out_path, "rb") as fh:
        checksum = hashlib.sha256(fh.read()).hexdigest()

    manifest = ExportManifest(
        model=backend.identifier,
        dim=EMBED_DIM,
        token_count=len(unique),
        sha256=checksum,
        sanity=_sanity_report(unique, rows),
    )
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest.payload(), fh, sort_keys=True, indent=1)
        fh.write("\n")
    return manifest
