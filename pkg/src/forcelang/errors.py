"""Exception types shared across the package."""


class ForcelangError(Exception):
    pass


class InputError(ForcelangError, ValueError):
    """Invalid argument values or malformed in-memory data."""


class VocabularyError(InputError):
    """Word is not part of the fixed vocabulary."""


class TableFormatError(ForcelangError):
    """Embedding table file is malformed or incomplete."""


class EmbeddingLookupError(ForcelangError, KeyError):
    """Text has no entry in a table-backed embedding provider."""


class DatasetError(ForcelangError):
    """Dataset file is malformed; message names the offending line."""


class CheckpointError(ForcelangError):
    """Checkpoint file is unreadable, truncated, or incompatible."""
