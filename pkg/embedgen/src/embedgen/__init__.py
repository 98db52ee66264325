"""Sentence-embedding table exporter for the forcelang vocabulary."""

from .backends import DEFAULT_MODEL, EMBED_DIM, HashBackend, get_backend
from .errors import BackendError, ExportError, ListingError
from .export import DEFAULT_PROBE_TEXTS, ExportManifest, export_table
from .vocab import VocabListing, parse_vocab_listing

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "DEFAULT_MODEL",
    "DEFAULT_PROBE_TEXTS",
    "EMBED_DIM",
    "ExportError",
    "ExportManifest",
    "HashBackend",
    "ListingError",
    "VocabListing",
    "export_table",
    "get_backend",
    "parse_vocab_listing",
    "__version__",
]
