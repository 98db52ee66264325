"""Embedding backends.

Two kinds: a pretrained sentence-transformers encoder (the point of the
tool), and a seeded hashing stub that produces deterministic unit normals
so the pipeline can be exercised hermetically without model downloads.
"""
from __future__ import annotations

import hashlib

import numpy as np

from .errors import BackendError

EMBED_DIM = 768

DEFAULT_MODEL = "sentence-transformers/all-mpnet-base-v2"


class HashBackend:
    """Deterministic per-text unit vectors derived from sha256."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.identifier = f"hashing:{self.seed}"

    def _embed_one(self, text: str) -> np.ndarray:
        digest = hashlib.sha256(f"{self.seed}\x1f{text}".encode("utf-8")).digest()
        words = np.frombuffer(digest[:16], dtype=np.uint32)
        rng = np.random.default_rng(words)
        vec = rng.standard_normal(EMBED_DIM)
        return vec / np.linalg.norm(vec)

    def embed_many(self, texts) -> np.ndarray:
        return np.stack([self._embed_one(t) for t in texts])


class SentenceTransformerBackend:
    """Lazy wrapper; imports and loads the model only when constructed."""

    def __init__(self, model_id: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError:
            raise BackendError(
                "sentence-transformers is not installed; "
                "pip install 'embedgen[real]'") from None
        try:
            self._model = SentenceTransformer(model_id)
        except Exception as e:
            raise BackendError(f"cannot load model {model_id!r}: {e}") from None
        self.identifier = model_id

    def embed_many(self, texts) -> np.ndarray:
        vecs = self._model.encode(list(texts), convert_to_numpy=True,
                                  normalize_embeddings=False)
        return np.asarray(vecs, dtype=float)


def get_backend(spec: str):
    """"hashing" or "hashing:<seed>" selects the stub; any other spec is
    treated as a sentence-transformers model id."""
    if spec == "hashing":
        return HashBackend(0)
    if spec.startswith("hashing:"):
        raw = spec.split(":", 1)[1]
        try:
            seed = int(raw)
        except ValueError:
            raise BackendError(f"bad hashing seed {raw!r}") from None
        return HashBackend(seed)
    return SentenceTransformerBackend(spec)
