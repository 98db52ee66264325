"""Synthetic paired-corpus generation and dataset file I/O.

Two collection procedures are simulated per participant: commanded phrases
executed as half-sine pulses (phrase-to-force), and robot-played random
pulses labeled by the participant (force-to-phrase).  Participants carry
deterministic per-seed quirks: a strength factor, a small angular bias,
and shifted labeling thresholds.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DIRECTIONS, HORIZON_S, MODIFIERS, ForceProfile, Phrase, direction_unit_vector
from .errors import DatasetError, InputError, VocabularyError

PROVENANCE_PTF = "phrase-to-force"
PROVENANCE_FTP = "force-to-phrase"

BASE_FORCE_N = 6.0

# Magnitude bands: peak-force multiplier relative to the participant-scaled
# base force.  Duration bands in seconds.  A modifier missing from a table
# falls in the neutral band; the empty modifier is neutral on both axes.
_MAGNITUDE_BANDS = {"soft": (0.3, 0.6), "neutral": (0.6, 1.0), "strong": (1.0, 1.6)}
_DURATION_BANDS = {"fast": (1.0, 1.8), "neutral": (1.8, 3.0), "slow": (3.0, 4.0)}

_MAGNITUDE_CLASS = {
    "slightly": "soft",
    "smoothly": "soft",
    "lightly": "soft",
    "softly": "soft",
    "greatly": "strong",
    "sharply": "strong",
    "quickly": "strong",
    "significantly": "strong",
    "harshly": "strong",
    "immediately": "strong",
}
_DURATION_CLASS = {
    "sharply": "fast",
    "quickly": "fast",
    "immediately": "fast",
    "smoothly": "slow",
    "slowly": "slow",
    "gradually": "slow",
}

# rng stream salts so the schedule, profile, pulse, and labeling draws stay
# independent of each other
_S_USER, _S_SCHEDULE, _S_PTF, _S_PULSE, _S_LABEL = 1, 2, 3, 4, 5


def magnitude_class(modifier: str | None) -> str:
    if modifier is not None and modifier not in MODIFIERS:
        raise VocabularyError(f"unknown modifier: {modifier!r}")
    return _MAGNITUDE_CLASS.get(modifier, "neutral")


def duration_class(modifier: str | None) -> str:
    if modifier is not None and modifier not in MODIFIERS:
        raise VocabularyError(f"unknown modifier: {modifier!r}")
    return _DURATION_CLASS.get(modifier, "neutral")


def magnitude_band(modifier: str | None) -> tuple:
    return _MAGNITUDE_BANDS[magnitude_class(modifier)]


def duration_band(modifier: str | None) -> tuple:
    return _DURATION_BANDS[duration_class(modifier)]


@dataclass(frozen=True)
class ParticipantModel:
    """Deterministic per-participant quirks applied during generation."""

    participant: int
    strength: float
    bias_axis: tuple
    bias_angle: float  # radians
    speed_bias: float  # seconds added to both duration thresholds
    strength_bias: float  # added to both relative-magnitude thresholds

    @classmethod
    def derive(cls, seed: int, participant: int) -> "ParticipantModel":
        if participant < 1:
            raise InputError("participant ids start at 1")
        rng = np.random.default_rng([_S_USER, seed, participant])
        strength = rng.uniform(0.7, 1.3)
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(0.0, math.radians(10.0))
        speed_bias = rng.uniform(-0.3, 0.3)
        strength_bias = rng.uniform(-0.08, 0.08)
        return cls(participant, float(strength), tuple(axis), float(angle),
                   float(speed_bias), float(strength_bias))

    @classmethod
    def neutral(cls, participant: int = 1) -> "ParticipantModel":
        return cls(participant, 1.0, (1.0, 0.0, 0.0), 0.0, 0.0, 0.0)

    def rotation(self) -> np.ndarray:
        """Rodrigues rotation by bias_angle about bias_axis."""
        if self.bias_angle == 0.0:
            return np.eye(3)
        kx, ky, kz = self.bias_axis
        k = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
        return np.eye(3) + math.sin(self.bias_angle) * k + (1 - math.cos(self.bias_angle)) * (k @ k)


@dataclass(frozen=True)
class GeneratorConfig:
    participants: int = 10
    phrase_trials: int = 42
    description_trials: int = 42
    noise: float = 0.1
    base_force_n: float = BASE_FORCE_N
    magnitude_range: tuple = (0.5, 15.0)
    duration_range: tuple = (1.0, 4.0)
    sample_rate_hz: float = 100.0
    seed: int = 42

    def __post_init__(self):
        if self.participants < 1:
            raise InputError("need at least one participant")
        if self.phrase_trials < 0 or self.description_trials < 0:
            raise InputError("trial counts must be non-negative")
        if self.noise < 0:
            raise InputError("noise must be non-negative")
        if self.base_force_n <= 0:
            raise InputError("base force must be positive")
        lo, hi = self.magnitude_range
        if not (0 < lo <= hi):
            raise InputError("magnitude range must be positive and ordered")
        lo, hi = self.duration_range
        if not (0 < lo <= hi <= HORIZON_S):
            raise InputError(f"duration range must sit inside (0, {HORIZON_S}]")
        if self.sample_rate_hz <= 0:
            raise InputError("sample rate must be positive")


@dataclass(frozen=True, eq=False)
class PairedSample:
    id: str
    participant: int
    phrase: Phrase
    profile: ForceProfile
    provenance: str

    def __post_init__(self):
        if self.participant < 1:
            raise InputError("participant ids start at 1")
        if self.provenance not in (PROVENANCE_PTF, PROVENANCE_FTP):
            raise InputError(f"unknown provenance {self.provenance!r}")
        if self.profile.duration > HORIZON_S:
            raise InputError("profile exceeds the resampling horizon")


def half_sine_profile(amplitude: float, duration: float, unit: np.ndarray,
                      rate: float = 100.0) -> ForceProfile:
    """Half-sine pulse A*sin(pi*t/D) along a fixed unit vector, sampled at
    the given rate from t=0 through the last grid point <= D."""
    if amplitude < 0 or duration <= 0 or rate <= 0:
        raise InputError("amplitude >= 0, duration > 0, rate > 0 required")
    n = int(math.floor(duration * rate))
    if n < 1:
        raise InputError("duration shorter than one sample interval")
    t = np.arange(n + 1) / rate
    magnitude = amplitude * np.sin(np.pi * t / duration)
    unit = np.asarray(unit, dtype=float)
    return ForceProfile(
        timestamps=t,
        fx=magnitude * unit[0],
        fy=magnitude * unit[1],
        fz=magnitude * unit[2],
    )


def synthesize_profile(phrase: Phrase, user: ParticipantModel, seed,
                       noise: float = 0.1, base_force: float = BASE_FORCE_N,
                       rate: float = 100.0) -> ForceProfile:
    """Half-sine pulse realizing a phrase under a participant's quirks.

    Duration and peak multiplier draw uniformly from the modifier's bands;
    the peak scales with the participant's strength; the direction is the
    word's unit vector through the participant's bias rotation plus
    zero-mean jitter scaled by the noise level.  Deterministic given
    (phrase, user, seed).  An empty direction yields a zero-force profile
    of nominal 1 s duration.
    """
    rng = np.random.default_rng(_stable_entropy(_S_PTF, seed))
    if phrase.direction is None:
        n = int(round(rate))
        t = np.arange(n + 1) / rate
        zero = np.zeros(n + 1)
        return ForceProfile(timestamps=t, fx=zero, fy=zero, fz=zero)
    d_lo, d_hi = duration_band(phrase.modifier)
    m_lo, m_hi = magnitude_band(phrase.modifier)
    duration = d_lo + (d_hi - d_lo) * rng.random()
    multiplier = m_lo + (m_hi - m_lo) * rng.random()
    amplitude = base_force * multiplier * user.strength
    amplitude *= max(0.05, 1.0 + noise * rng.standard_normal())
    u = user.rotation() @ direction_unit_vector(phrase.direction)
    if noise > 0.0:
        u = u + noise * 0.3 * rng.standard_normal(3)
        u /= np.linalg.norm(u)
    return half_sine_profile(amplitude, duration, u, rate)


def _felt_modifier(duration: float, rel_magnitude: float, user: ParticipantModel, rng) -> str | None:
    """Pick a modifier whose bands contain what the participant felt."""
    if duration < _DURATION_BANDS["fast"][1] + user.speed_bias:
        speed = "fast"
    elif duration > _DURATION_BANDS["neutral"][1] + user.speed_bias:
        speed = "slow"
    else:
        speed = "neutral"
    if rel_magnitude < _MAGNITUDE_BANDS["soft"][1] + user.strength_bias:
        strength = "soft"
    elif rel_magnitude > _MAGNITUDE_BANDS["neutral"][1] + user.strength_bias:
        strength = "strong"
    else:
        strength = "neutral"
    exact = [m for m in MODIFIERS
             if magnitude_class(m) == strength and duration_class(m) == speed]
    candidates = exact
    if not candidates and speed != "neutral":
        candidates = [m for m in MODIFIERS if duration_class(m) == speed]
    if not candidates and strength != "neutral":
        candidates = [m for m in MODIFIERS if magnitude_class(m) == strength]
    if not candidates:
        return None
    return candidates[int(rng.integers(len(candidates)))]


def synthesize_description(profile: ForceProfile, user: ParticipantModel, seed,
                           base_force: float = BASE_FORCE_N) -> Phrase:
    """Label a profile the way a participant would: direction = closest
    direction word to the total impulse, modifier = a word whose magnitude
    and duration bands match what was felt (thresholds shifted by the
    participant's biases).  A zero-impulse profile reads as nothing felt."""
    rng = np.random.default_rng(_stable_entropy(_S_LABEL, seed))
    t = profile.timestamps
    forces = profile.forces()
    j = np.trapezoid(forces, t, axis=1)
    norm = np.linalg.norm(j)
    if norm < 1e-9:
        return Phrase(None, None)
    jhat = j / norm
    sims = [float(np.dot(jhat, direction_unit_vector(d))) for d in DIRECTIONS]
    direction = DIRECTIONS[int(np.argmax(sims))]
    peak = float(np.max(np.linalg.norm(forces, axis=0)))
    rel = peak / (base_force * user.strength)
    modifier = _felt_modifier(profile.duration, rel, user, rng)
    return Phrase(modifier, direction)


def _stable_entropy(salt: int, seed) -> list:
    """Flatten a salt plus an int or int-sequence seed into rng entropy."""
    if isinstance(seed, (list, tuple)):
        return [salt] + [int(s) for s in seed]
    return [salt, int(seed)]


_PURE_AXES = ("up", "down", "left", "right", "forward", "backward")


def generate_corpus(cfg: GeneratorConfig = GeneratorConfig()) -> list:
    """Full synthetic corpus: per participant, phrase_trials commanded
    phrases (the first six are the shuffled pure-axis directions with no
    modifier) and description_trials robot pulses with random direction,
    magnitude, and duration, labeled by the participant."""
    samples = []
    for pid in range(1, cfg.participants + 1):
        user = ParticipantModel.derive(cfg.seed, pid)
        rng = np.random.default_rng([_S_SCHEDULE, cfg.seed, pid])
        phrases = []
        order = rng.permutation(len(_PURE_AXES))
        for idx in order[: min(cfg.phrase_trials, len(_PURE_AXES))]:
            phrases.append(Phrase(None, _PURE_AXES[idx]))
        while len(phrases) < cfg.phrase_trials:
            direction = DIRECTIONS[int(rng.integers(len(DIRECTIONS)))]
            modifier = None
            if rng.random() >= 0.25:
                modifier = MODIFIERS[int(rng.integers(len(MODIFIERS)))]
            phrases.append(Phrase(modifier, direction))
        for k, phrase in enumerate(phrases):
            profile = synthesize_profile(
                phrase, user, seed=[cfg.seed, pid, k], noise=cfg.noise,
                base_force=cfg.base_force_n, rate=cfg.sample_rate_hz)
            samples.append(PairedSample(
                id=f"p{pid:02d}-ptf-{k:02d}", participant=pid, phrase=phrase,
                profile=profile, provenance=PROVENANCE_PTF))
        for k in range(cfg.description_trials):
            rng_pulse = np.random.default_rng([_S_PULSE, cfg.seed, pid, k])
            u = rng_pulse.standard_normal(3)
            while np.linalg.norm(u) < 1e-9:
                u = rng_pulse.standard_normal(3)
            u /= np.linalg.norm(u)
            lo, hi = cfg.magnitude_range
            amplitude = lo + (hi - lo) * rng_pulse.random()
            lo, hi = cfg.duration_range
            duration = lo + (hi - lo) * rng_pulse.random()
            profile = half_sine_profile(amplitude, duration, u, cfg.sample_rate_hz)
            phrase = synthesize_description(
                profile, user, seed=[cfg.seed, pid, k], base_force=cfg.base_force_n)
            samples.append(PairedSample(
                id=f"p{pid:02d}-ftp-{k:02d}", participant=pid, phrase=phrase,
                profile=profile, provenance=PROVENANCE_FTP))
    return samples


def corpus_manifest(cfg: GeneratorConfig, samples: list) -> dict:
    by_provenance = {PROVENANCE_PTF: 0, PROVENANCE_FTP: 0}
    for s in samples:
        by_provenance[s.provenance] += 1
    return {
        "seed": cfg.seed,
        "config": {
            "participants": cfg.participants,
            "phrase_trials": cfg.phrase_trials,
            "description_trials": cfg.description_trials,
            "noise": cfg.noise,
            "base_force_n": cfg.base_force_n,
            "magnitude_range": list(cfg.magnitude_range),
            "duration_range": list(cfg.duration_range),
            "sample_rate_hz": cfg.sample_rate_hz,
        },
        "counts": {
            "total": len(samples),
            "phrase_to_force": by_provenance[PROVENANCE_PTF],
            "force_to_phrase": by_provenance[PROVENANCE_FTP],
        },
    }


def write_dataset(samples: list, path) -> None:
    """One JSON record per line; key order and float reprs are stable, so
    identical inputs produce byte-identical files."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            record = {
                "id": s.id,
                "participant": s.participant,
                "provenance": s.provenance,
                "modifier": s.phrase.modifier,
                "direction": s.phrase.direction,
                "duration_s": float(s.profile.duration),
                "timestamps": s.profile.timestamps.tolist(),
                "fx": s.profile.fx.tolist(),
                "fy": s.profile.fy.tolist(),
                "fz": s.profile.fz.tolist(),
            }
            fh.write(json.dumps(record, separators=(",", ":")))
            fh.write("\n")


_REQUIRED_FIELDS = ("id", "participant", "provenance", "modifier", "direction",
                    "duration_s", "timestamps", "fx", "fy", "fz")


def read_dataset(path) -> list:
    """Parse a dataset file; any malformed line raises DatasetError naming
    the line number.  An empty file is an empty corpus."""
    samples = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}, line {lineno}: invalid JSON ({e.msg})") from None
            if not isinstance(record, dict):
                raise DatasetError(f"{path}, line {lineno}: record must be an object")
            missing = [f for f in _REQUIRED_FIELDS if f not in record]
            if missing:
                raise DatasetError(f"{path}, line {lineno}: missing field {missing[0]!r}")
            if record["id"] in seen_ids:
                raise DatasetError(f"{path}, line {lineno}: duplicate id {record['id']!r}")
            try:
                phrase = Phrase(record["modifier"], record["direction"])
                profile = ForceProfile(
                    timestamps=record["timestamps"], fx=record["fx"],
                    fy=record["fy"], fz=record["fz"])
                sample = PairedSample(
                    id=str(record["id"]), participant=int(record["participant"]),
                    phrase=phrase, profile=profile,
                    provenance=str(record["provenance"]))
            except (InputError, TypeError) as e:
                raise DatasetError(f"{path}, line {lineno}: {e}") from None
            if abs(float(record["duration_s"]) - profile.duration) > 1e-9:
                raise DatasetError(
                    f"{path}, line {lineno}: duration_s does not match timestamps")
            seen_ids.add(sample.id)
            samples.append(sample)
    return samples


def split_random(samples: list, test_fraction: float = 0.1, seed: int = 0):
    """Seeded shuffle split preserving input order inside each side.
    Returns (train, test); the sides are disjoint and exhaustive."""
    n = len(samples)
    if n < 2:
        raise InputError("need at least 2 samples to split")
    if not 0.0 < test_fraction < 1.0:
        raise InputError("test fraction must be in (0, 1)")
    k = int(math.floor(n * test_fraction + 0.5))
    if k == 0 or k == n:
        raise InputError(f"degenerate split: {n - k} train / {k} test")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx = set(int(i) for i in perm[:k])
    train = [s for i, s in enumerate(samples) if i not in test_idx]
    test = [s for i, s in enumerate(samples) if i in test_idx]
    return train, test


def split_holdout_token(samples: list, token: str, slot: str):
    """Hold out every sample whose phrase uses the exact token in the given
    slot ("modifier" or "direction").  Compound direction words containing
    the token as a substring stay in train."""
    if slot == "modifier":
        if token not in MODIFIERS:
            raise VocabularyError(f"unknown modifier: {token!r}")
    elif slot == "direction":
        if token not in DIRECTIONS:
            raise VocabularyError(f"unknown direction: {token!r}")
    else:
        raise InputError(f"slot must be 'modifier' or 'direction', got {slot!r}")
    test = [s for s in samples if getattr(s.phrase, slot) == token]
    train = [s for s in samples if getattr(s.phrase, slot) != token]
    if not test:
        warnings.warn(f"holdout token {token!r} does not occur in the corpus; test split is empty")
    return train, test
