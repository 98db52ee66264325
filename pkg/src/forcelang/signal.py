"""Force-profile preprocessing: resampling onto the fixed grid, cumulative
impulse integration, min-max normalization, and the inverse mappings back
to force space."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FEATURE_DIM, GRID_N, HORIZON_S, ForceProfile, ImpulseFeature
from .errors import InputError


def resample(profile: ForceProfile, n: int = GRID_N, horizon: float = HORIZON_S) -> np.ndarray:
    """Sample the profile onto n evenly spaced times over [0, horizon].

    Linear interpolation inside the recorded span; zero beyond it (the
    force has ceased).  Returns a (3, n) matrix in Newtons.
    """
    if n < 2:
        raise InputError("need at least 2 grid points")
    if horizon <= 0:
        raise InputError("horizon must be positive")
    grid = np.linspace(0.0, horizon, n)
    out = np.empty((3, n))
    t = profile.timestamps
    for i, f in enumerate((profile.fx, profile.fy, profile.fz)):
        out[i] = np.interp(grid, t, f, right=0.0)
    return out


def integrate_impulse(forces: np.ndarray, horizon: float = HORIZON_S) -> ImpulseFeature:
    """Cumulative trapezoidal impulse of a (3, GRID_N) force matrix.

    Each axis starts at exactly 0; output is the flattened [Jx | Jy | Jz]
    feature in Newton-seconds.
    """
    forces = np.asarray(forces, dtype=float)
    if forces.shape != (3, GRID_N):
        raise InputError(f"expected (3, {GRID_N}) force matrix, got {forces.shape}")
    if not np.all(np.isfinite(forces)):
        raise InputError("force matrix contains non-finite values")
    dt = horizon / (GRID_N - 1)
    steps = dt * (forces[:, :-1] + forces[:, 1:]) / 2.0
    j = np.concatenate([np.zeros((3, 1)), np.cumsum(steps, axis=1)], axis=1)
    return ImpulseFeature(j.reshape(-1))


def impulse_to_force(feature: ImpulseFeature, horizon: float = HORIZON_S) -> np.ndarray:
    """Invert integrate_impulse: recover a (3, GRID_N) force matrix whose
    cumulative trapezoidal impulse reproduces the feature exactly.

    The trapezoid rule drops one degree of freedom per axis; the initial
    force is taken as the first forward difference, which is exact for
    locally linear impulse curves.
    """
    j = feature.axes()
    dt = horizon / (GRID_N - 1)
    f = np.empty_like(j)
    f[:, 0] = (j[:, 1] - j[:, 0]) / dt
    diffs = np.diff(j, axis=1)
    for i in range(GRID_N - 1):
        # trapezoid step: J[i+1]-J[i] = dt*(f[i]+f[i+1])/2
        f[:, i + 1] = 2.0 * diffs[:, i] / dt - f[:, i]
    return f


@dataclass(frozen=True)
class NormalizationParams:
    """Per-axis min/max of the flattened impulse features, fit on a corpus."""

    lo: np.ndarray  # (3,)
    hi: np.ndarray  # (3,)

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,):
            raise InputError("normalization params need one (lo, hi) pair per axis")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InputError("normalization params must be finite")
        if not np.all(hi > lo):
            raise InputError("each axis needs hi > lo")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)


def fit_normalizer(corpus) -> NormalizationParams:
    """Per-axis min/max over every entry of every feature in the corpus.

    A degenerate axis (min == max) widens to (min, min + 1) so the scale
    stays invertible.
    """
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    count = 0
    for feature in corpus:
        axes = feature.axes()
        lo = np.minimum(lo, axes.min(axis=1))
        hi = np.maximum(hi, axes.max(axis=1))
        count += 1
    if count == 0:
        raise InputError("cannot fit normalizer on an empty corpus")
    degenerate = hi == lo
    hi = np.where(degenerate, lo + 1.0, hi)
    return NormalizationParams(lo=lo, hi=hi)


def normalize(feature: ImpulseFeature, params: NormalizationParams) -> ImpulseFeature:
    """Map each axis affinely so [lo, hi] lands on [-1, 1]."""
    axes = feature.axes()
    lo = params.lo[:, None]
    hi = params.hi[:, None]
    scaled = 2.0 * (axes - lo) / (hi - lo) - 1.0
    return ImpulseFeature(scaled.reshape(-1))


def denormalize(feature: ImpulseFeature, params: NormalizationParams) -> ImpulseFeature:
    """Inverse of normalize."""
    axes = feature.axes()
    lo = params.lo[:, None]
    hi = params.hi[:, None]
    raw = (axes + 1.0) / 2.0 * (hi - lo) + lo
    return ImpulseFeature(raw.reshape(-1))


def final_impulse(forces: np.ndarray, horizon: float = HORIZON_S) -> np.ndarray:
    """Total impulse per axis of a (3, GRID_N) force matrix, shape (3,)."""
    return integrate_impulse(forces, horizon).final_impulse()
