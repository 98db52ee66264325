"""Phrase representations and embedding providers.

Two phrase encodings exist side by side: a 62-entry two-hot binary vector
(one 31-wide block per word slot, last index of each block = empty) and a
768-dim sentence embedding supplied by a pluggable provider.
"""
from __future__ import annotations

import hashlib

import numpy as np

from .core import (
    BLOCK_SIZE,
    DIRECTIONS,
    EMBED_DIM,
    EMPTY_INDEX,
    MODIFIERS,
    PHRASE_VEC_DIM,
    Phrase,
    all_phrases,
    phrase_to_text,
)
from .errors import EmbeddingLookupError, InputError, TableFormatError

DEFAULT_SIGMA = 0.6


def encode_binary(phrase: Phrase) -> np.ndarray:
    """Two-hot encoding: exactly one hot index per 31-wide block."""
    vec = np.zeros(PHRASE_VEC_DIM)
    m = EMPTY_INDEX if phrase.modifier is None else MODIFIERS.index(phrase.modifier)
    d = EMPTY_INDEX if phrase.direction is None else DIRECTIONS.index(phrase.direction)
    vec[m] = 1.0
    vec[BLOCK_SIZE + d] = 1.0
    return vec


def decode_binary(vec: np.ndarray) -> Phrase:
    """Argmax per block; ties resolve to the lowest index.  Indices past
    the word lists (including the reserved empty slot) decode to empty."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (PHRASE_VEC_DIM,):
        raise InputError(f"expected {PHRASE_VEC_DIM}-entry vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise InputError("phrase vector contains non-finite values")
    m = int(np.argmax(vec[:BLOCK_SIZE]))
    d = int(np.argmax(vec[BLOCK_SIZE:]))
    modifier = MODIFIERS[m] if m < len(MODIFIERS) else None
    direction = DIRECTIONS[d] if d < len(DIRECTIONS) else None
    return Phrase(modifier, direction)


def required_table_texts() -> list[str]:
    """Texts every embedding table must cover: each vocabulary word, every
    canonical phrase rendering, and the empty text.  Deduplicated, stable
    order."""
    seen = {}
    for word in MODIFIERS + DIRECTIONS:
        seen.setdefault(word, None)
    for phrase in all_phrases():
        seen.setdefault(phrase_to_text(phrase), None)
    return list(seen)


class HashingProvider:
    """Deterministic stand-in for a real sentence encoder: each text maps
    to a unit vector drawn from an RNG keyed by (seed, text).  Distinct
    texts land nearly orthogonal in 768 dims, so exact-match structure is
    preserved while semantic similarity is absent."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, text: str) -> np.ndarray:
        if not isinstance(text, str):
            raise InputError("text must be a string")
        hit = self._cache.get(text)
        if hit is not None:
            return hit
        digest = hashlib.sha256(f"{self.seed}\x1f{text}".encode("utf-8")).digest()
        words = np.frombuffer(digest[:16], dtype=np.uint32)
        rng = np.random.default_rng(words)
        v = rng.standard_normal(EMBED_DIM)
        v /= np.linalg.norm(v)
        v.flags.writeable = False
        self._cache[text] = v
        return v


class TableProvider:
    """Embedding lookup backed by a TSV table; texts absent from the table
    are an error rather than a guess."""

    def __init__(self, vectors: dict[str, np.ndarray], source: str = "<memory>"):
        self.source = source
        self._vectors = vectors

    def embed(self, text: str) -> np.ndarray:
        if not isinstance(text, str):
            raise InputError("text must be a string")
        try:
            return self._vectors[text]
        except KeyError:
            raise EmbeddingLookupError(f"no embedding for {text!r} in {self.source}") from None

    def __len__(self):
        return len(self._vectors)

    def texts(self):
        return list(self._vectors)


def hashing_provider(seed: int = 0) -> HashingProvider:
    return HashingProvider(seed)


def table_provider(path, require_vocabulary: bool = True) -> TableProvider:
    """Load a TSV embedding table.

    Line 1 is the header "dim<TAB>768"; every following line is a text
    followed by 768 tab-separated floats.  Duplicate texts, wrong widths,
    and non-finite values are format errors.  Vectors are unit-normalized
    at load time.  With require_vocabulary, the table must cover every
    vocabulary word, every phrase rendering, and the empty text.
    """
    path = str(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as e:
        raise TableFormatError(f"cannot read embedding table {path}: {e}") from e
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise TableFormatError(f"{path}: empty table")
    header = lines[0].split("\t")
    if len(header) != 2 or header[0] != "dim":
        raise TableFormatError(f"{path}, line 1: expected 'dim<TAB><n>' header")
    try:
        dim = int(header[1])
    except ValueError:
        raise TableFormatError(f"{path}, line 1: bad dimension {header[1]!r}") from None
    if dim != EMBED_DIM:
        raise TableFormatError(f"{path}, line 1: dimension {dim} != {EMBED_DIM}")
    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != dim + 1:
            raise TableFormatError(
                f"{path}, line {lineno}: expected text + {dim} values, got {len(fields)} fields"
            )
        text = fields[0]
        if text in vectors:
            raise TableFormatError(f"{path}, line {lineno}: duplicate text {text!r}")
        try:
            v = np.array(fields[1:], dtype=float)
        except ValueError:
            raise TableFormatError(f"{path}, line {lineno}: non-numeric value") from None
        if not np.all(np.isfinite(v)):
            raise TableFormatError(f"{path}, line {lineno}: non-finite value")
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise TableFormatError(f"{path}, line {lineno}: zero vector")
        v /= norm
        v.flags.writeable = False
        vectors[text] = v
    if require_vocabulary:
        missing = [t for t in required_table_texts() if t not in vectors]
        if missing:
            raise TableFormatError(
                f"{path}: table is missing {len(missing)} required texts, "
                f"first: {missing[0]!r}"
            )
    return TableProvider(vectors, source=path)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Plain cosine; 0.0 when either vector has zero norm.  Clamped to
    [-1, 1] so parallel vectors cannot drift past the bound in float."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def _phrase_matrix(provider):
    """(phrases, unit row matrix) of all phrase-rendering embeddings,
    computed once per provider instance."""
    cached = getattr(provider, "_mvv_matrix", None)
    if cached is not None:
        return cached
    phrases = all_phrases()
    mat = np.stack([provider.embed(phrase_to_text(p)) for p in phrases])
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    mat = mat / norms
    entry = (phrases, mat)
    try:
        provider._mvv_matrix = entry
    except AttributeError:
        pass
    return entry


def nearest_phrase_to_vector(vec: np.ndarray, provider, sigma: float = DEFAULT_SIGMA) -> Phrase:
    """Most-similar phrase rendering by cosine, gated by sigma: if the best
    similarity is not strictly above sigma the empty phrase is returned.
    Ties resolve to the earliest phrase in canonical order."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (EMBED_DIM,):
        raise InputError(f"expected {EMBED_DIM}-dim vector, got shape {vec.shape}")
    phrases, mat = _phrase_matrix(provider)
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        return Phrase(None, None)
    # clamp so a float ulp cannot push a self-match past sigma = 1
    sims = np.clip(mat @ (vec / norm), -1.0, 1.0)
    best = int(np.argmax(sims))
    if sims[best] > sigma:
        return phrases[best]
    return Phrase(None, None)


def nearest_mvv(text: str, provider, sigma: float = DEFAULT_SIGMA) -> Phrase:
    """Match free text onto the closed phrase set via provider embeddings.

    sigma >= 1 therefore always yields the empty phrase; any text equal to
    a phrase rendering matches itself for sigma < 1.
    """
    if not isinstance(text, str):
        raise InputError("text must be a string")
    return nearest_phrase_to_vector(provider.embed(text), provider, sigma)
