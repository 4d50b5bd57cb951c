"""Brownian paths on a uniform time grid with reproducible, counter-based streams.

Every random draw in the package comes from a Philox generator keyed by
``(master_seed, purpose, subindex, path_index)``.  Streams are therefore
independent of scheduling order: regenerating path i alone reproduces it
bit-exactly, and worker count cannot change any result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GENERATOR_ALGORITHM = "philox4x64"

# purpose tags for the second key word
_PURPOSE_INCREMENTS = 0
_PURPOSE_REFINE = 1
_PURPOSE_DATA = 2
_PURPOSE_GENERIC = 3

_MAX_INDEX = 1 << 40
_MAX_SUB = 1 << 16


def stream(master_seed: int, purpose: int, sub: int, index: int) -> np.random.Generator:
    """Independent generator for one (purpose, sub, index) cell of a campaign."""
    if not 0 <= index < _MAX_INDEX:
        raise ValueError(f"stream index out of range: {index}")
    if not 0 <= sub < _MAX_SUB:
        raise ValueError(f"stream subindex out of range: {sub}")
    word = (purpose << 56) | (sub << 40) | index
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, word], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def data_stream(master_seed: int, index: int, sub: int = 0) -> np.random.Generator:
    """Stream for sampling initial data; independent of every path stream."""
    return stream(master_seed, _PURPOSE_DATA, sub, index)


def generic_stream(master_seed: int, sub: int = 0) -> np.random.Generator:
    return stream(master_seed, _PURPOSE_GENERIC, sub, 0)


def _steps_of(horizon: float, step: float) -> int:
    n = horizon / step
    n_round = round(n)
    if n_round < 1 or abs(n - n_round) > 1e-9 * max(1.0, n_round):
        raise ValueError(f"horizon/step = {n} is not a positive integer")
    return int(n_round)


@dataclass(frozen=True)
class EnsembleSpec:
    """Defines a reproducible family of Brownian paths."""

    num_paths: int
    master_seed: int
    horizon: float
    step: float

    def __post_init__(self):
        if self.num_paths < 1:
            raise ValueError("num_paths must be >= 1")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        _steps_of(self.horizon, self.step)

    @property
    def n_steps(self) -> int:
        return _steps_of(self.horizon, self.step)


@dataclass(frozen=True)
class BrownianPath:
    """One sampled Wiener trajectory; ``values[j]`` is W at t_j = j*step."""

    horizon: float
    step: float
    values: np.ndarray = field(repr=False)
    seed: int
    path_index: int
    level: int = 0  # number of bridge refinements applied

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = _steps_of(self.horizon, self.step)
        if v.shape != (n + 1,):
            raise ValueError(f"expected {n + 1} knot values, got shape {v.shape}")
        if v[0] != 0.0:
            raise ValueError("a Brownian path starts at W_0 = 0")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n_steps(self) -> int:
        return _steps_of(self.horizon, self.step)

    def times(self) -> np.ndarray:
        return self.step * np.arange(self.n_steps + 1)

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def value_at_index(self, j: int) -> float:
        return float(self.values[j])


def sample_path(spec: EnsembleSpec, path_index: int) -> BrownianPath:
    """Draw path ``path_index`` of the ensemble; independent of any other draw."""
    if not 0 <= path_index < spec.num_paths:
        raise ValueError(f"path_index {path_index} outside [0, {spec.num_paths})")
    n = spec.n_steps
    g = stream(spec.master_seed, _PURPOSE_INCREMENTS, 0, path_index)
    incr = math.sqrt(spec.step) * g.standard_normal(n)
    vals = np.concatenate([[0.0], np.cumsum(incr)])
    return BrownianPath(spec.horizon, spec.step, vals, spec.master_seed, path_index)


def refine(path: BrownianPath) -> BrownianPath:
    """Halve the step by Brownian-bridge midpoint insertion.

    The midpoint between knots j and j+1 is Normal((W_j+W_{j+1})/2, step/4),
    drawn from the path's own refinement stream, so existing knots are kept
    exactly and repeated refinement is deterministic.
    """
    W = path.values
    g = stream(path.seed, _PURPOSE_REFINE, path.level + 1, path.path_index)
    mids = 0.5 * (W[:-1] + W[1:]) + 0.5 * math.sqrt(path.step) * g.standard_normal(path.n_steps)
    out = np.empty(2 * path.n_steps + 1)
    out[0::2] = W
    out[1::2] = mids
    return BrownianPath(path.horizon, path.step / 2.0, out, path.seed, path.path_index, path.level + 1)


def restrict(path: BrownianPath, factor: int = 2) -> BrownianPath:
    """Keep every ``factor``-th knot (inverse of ``refine`` for factor 2)."""
    if path.n_steps % factor:
        raise ValueError("step count not divisible by restriction factor")
    return BrownianPath(
        path.horizon,
        path.step * factor,
        path.values[::factor],
        path.seed,
        path.path_index,
        max(path.level - 1, 0),
    )


@dataclass(frozen=True)
class CharacteristicCheck:
    """Monte Carlo test of E e^{i a W_t} = e^{-a^2 t / 2}."""

    a: float
    t: float
    n_paths: int
    empirical: complex
    reference: float
    std_error: float
    z_score: float


def characteristic_check(a: float, t: float, n_paths: int, master_seed: int = 0) -> CharacteristicCheck:
    """Compare the empirical mean of e^{iaW_t} with the Gaussian characteristic
    function e^{-a^2 t/2}; the z-score is |deviation| / standard error."""
    if n_paths < 100:
        raise ValueError("need at least 100 paths for a meaningful check")
    g = generic_stream(master_seed)
    w = math.sqrt(t) * g.standard_normal(n_paths) if t > 0 else np.zeros(n_paths)
    samples = np.exp(1j * a * w)
    emp = complex(samples.mean())
    ref = math.exp(-0.5 * a * a * t)
    dev = samples - emp
    se = math.sqrt(float(np.mean(dev.real**2 + dev.imag**2)) / (n_paths - 1))
    delta = abs(emp - ref)
    z = 0.0 if se == 0.0 and delta == 0.0 else (delta / se if se > 0 else math.inf)
    return CharacteristicCheck(a, t, n_paths, emp, ref, se, z)
