"""Fixed vocabulary, coordinate conventions, and the value types shared by
every other module.

Coordinate convention: +x = right, +y = forward, +z = up.  Compound
direction words ("forward-right") map to the normalized sum of their
component axis vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, VocabularyError

VOCAB_VERSION = 1

# Modifier and direction word lists.  Order is load-bearing: one-hot block
# indices, canonical phrase enumeration, and tie-breaks all follow it.
MODIFIERS: tuple[str, ...] = (
    "slightly",
    "greatly",
    "smoothly",
    "sharply",
    "slowly",
    "quickly",
    "lightly",
    "significantly",
    "softly",
    "harshly",
    "gradually",
    "immediately",
)

DIRECTIONS: tuple[str, ...] = (
    "backward",
    "backward-down",
    "backward-left",
    "backward-right",
    "backward-up",
    "down",
    "down-forward",
    "down-left",
    "down-right",
    "forward",
    "forward-left",
    "forward-right",
    "forward-up",
    "left",
    "left-up",
    "right",
    "right-up",
    "up",
)

# Grid the whole pipeline standardizes on: force profiles are resampled to
# GRID_N steps spanning HORIZON_S seconds, impulse features are the three
# resampled axes concatenated.
GRID_N = 256
HORIZON_S = 4.0
FEATURE_DIM = 3 * GRID_N
LATENT_DIM = 16

# Two-hot phrase vector layout: two blocks of BLOCK_SIZE, index EMPTY_INDEX
# inside each block means "no word in this slot".
BLOCK_SIZE = 31
EMPTY_INDEX = 30
PHRASE_VEC_DIM = 2 * BLOCK_SIZE

EMBED_DIM = 768

_AXIS = {
    "right": np.array([1.0, 0.0, 0.0]),
    "left": np.array([-1.0, 0.0, 0.0]),
    "forward": np.array([0.0, 1.0, 0.0]),
    "backward": np.array([0.0, -1.0, 0.0]),
    "up": np.array([0.0, 0.0, 1.0]),
    "down": np.array([0.0, 0.0, -1.0]),
}


@dataclass(frozen=True)
class Vocabulary:
    modifiers: tuple[str, ...]
    directions: tuple[str, ...]
    version: int

    def __post_init__(self):
        if len(set(self.modifiers)) != len(self.modifiers):
            raise InputError("duplicate modifier words")
        if len(set(self.directions)) != len(self.directions):
            raise InputError("duplicate direction words")


VOCABULARY = Vocabulary(modifiers=MODIFIERS, directions=DIRECTIONS, version=VOCAB_VERSION)


@dataclass(frozen=True)
class Phrase:
    """A (modifier, direction) pair; either slot may be empty (None)."""

    modifier: str | None = None
    direction: str | None = None

    def __post_init__(self):
        if self.modifier is not None and self.modifier not in MODIFIERS:
            raise VocabularyError(f"unknown modifier: {self.modifier!r}")
        if self.direction is not None and self.direction not in DIRECTIONS:
            raise VocabularyError(f"unknown direction: {self.direction!r}")

    def is_empty(self) -> bool:
        return self.modifier is None and self.direction is None


def direction_unit_vector(word: str) -> np.ndarray:
    """Unit 3-vector for a direction word; compounds are normalized sums."""
    if word not in DIRECTIONS:
        raise VocabularyError(f"unknown direction: {word!r}")
    v = np.zeros(3)
    for part in word.split("-"):
        v = v + _AXIS[part]
    return v / np.linalg.norm(v)


def expand_direction(word: str) -> str:
    """Render a direction word as plain text: hyphens become ' and '."""
    if word not in DIRECTIONS:
        raise VocabularyError(f"unknown direction: {word!r}")
    return " and ".join(word.split("-"))


def phrase_to_text(phrase: Phrase) -> str:
    """Canonical text rendering of a phrase.

    Empty phrase renders as the empty string; a missing slot simply
    drops out.  Injective over all valid phrases.
    """
    parts = []
    if phrase.modifier is not None:
        parts.append(phrase.modifier)
    if phrase.direction is not None:
        parts.append(expand_direction(phrase.direction))
    return " ".join(parts)


def all_phrases() -> list[Phrase]:
    """Every valid phrase in canonical order: modifier-major, word-list
    order, with the empty slot enumerated last in each position."""
    out = []
    for m in MODIFIERS + (None,):
        for d in DIRECTIONS + (None,):
            out.append(Phrase(m, d))
    return out


def _as_float_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"{name} must be 1-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class ForceProfile:
    """A recorded 3-axis force time series.

    Timestamps start at 0, are strictly increasing, and stay finite; the
    three force arrays match their length.
    """

    timestamps: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    fz: np.ndarray

    def __post_init__(self):
        t = _as_float_vector(self.timestamps, "timestamps")
        if t.size < 2:
            raise InputError("profile needs at least 2 samples")
        if t[0] != 0.0:
            raise InputError("timestamps must start at 0")
        if not np.all(np.diff(t) > 0):
            raise InputError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", t)
        for name in ("fx", "fy", "fz"):
            arr = _as_float_vector(getattr(self, name), name)
            if arr.size != t.size:
                raise InputError(f"{name} length {arr.size} != timestamps length {t.size}")
            object.__setattr__(self, name, arr)

    @property
    def duration(self) -> float:
        return float(self.timestamps[-1])

    def forces(self) -> np.ndarray:
        """Axes stacked as a (3, N) matrix in x, y, z order."""
        return np.stack([self.fx, self.fy, self.fz])


@dataclass(frozen=True, eq=False)
class ImpulseFeature:
    """Flattened cumulative-impulse feature: the three per-axis curves
    concatenated as [Jx | Jy | Jz], FEATURE_DIM entries.

    Raw (Newton-second) features start each axis at 0 by construction;
    normalized features generally do not.
    """

    values: np.ndarray

    def __post_init__(self):
        v = _as_float_vector(self.values, "values")
        if v.size != FEATURE_DIM:
            raise InputError(f"impulse feature must have {FEATURE_DIM} entries, got {v.size}")
        object.__setattr__(self, "values", v)

    def axes(self) -> np.ndarray:
        """View as a (3, GRID_N) matrix."""
        return self.values.reshape(3, GRID_N)

    def final_impulse(self) -> np.ndarray:
        """Last cumulative value per axis, shape (3,)."""
        return self.axes()[:, -1].copy()
