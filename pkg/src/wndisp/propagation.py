"""Exact substeps and the splitting solver for i du = Lap(u) o dW + |u|^{p-1} u dt.

In Fourier variables the dispersive flow over an increment dW is the exact
unimodular multiplier a_k -> e^{i k^2 dW} a_k, and the nonlinear flow over a
time h is the exact pointwise phase u -> e^{-i h |u|^{p-1}} u (the modulus is
constant along that flow).  The splitting therefore only commits operator
splitting and truncation errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .brownian import BrownianPath
from .torus import AliasingError, SpectralField, to_spectral

SCHEMES = ("lie", "strang")


def linear_flow(fld: SpectralField, dw: float) -> SpectralField:
    """Dispersive propagator over a Brownian increment: a_k -> e^{i k^2 dw} a_k."""
    k = fld.grid.modes()
    return SpectralField(fld.grid, fld.coeffs * np.exp(1j * (k * k) * dw))


def _check_nonlinear_alias(grid, p) -> None:
    if p == int(p) and int(p) % 2 == 1:
        degree = int(p)
        if grid.alias_free_degree < degree:
            raise AliasingError(
                f"grid M={grid.phys_points}, K={grid.max_mode} cannot resolve the "
                f"degree-{degree} product alias-free (need M >= {(degree + 1) * grid.max_mode + 1})"
            )


def nonlinear_flow(fld: SpectralField, h: float, p: float) -> SpectralField:
    """Exact flow of i u_t = |u|^{p-1} u over time h: pointwise phase rotation.

    Evaluated on the oversampled physical grid, then truncated back to
    |k| <= K.  Forward flow only (h >= 0).
    """
    if h < 0:
        raise ValueError("nonlinear flow runs forward in time only")
    if p <= 1:
        raise ValueError(f"nonlinearity exponent must satisfy p > 1, got {p}")
    _check_nonlinear_alias(fld.grid, p)
    if h == 0:
        return fld
    u = fld.to_physical()
    u = u * np.exp(-1j * h * np.abs(u) ** (p - 1))
    return to_spectral(u, fld.grid)


@dataclass(frozen=True)
class Trajectory:
    """Solution fields at every knot of one Brownian path."""

    path: BrownianPath
    fields: tuple
    p: float
    scheme: str

    def __post_init__(self):
        if len(self.fields) != self.path.n_steps + 1:
            raise ValueError("one field per path knot required")

    @property
    def grid(self):
        return self.fields[0].grid

    def times(self) -> np.ndarray:
        return self.path.times()

    def final(self) -> SpectralField:
        return self.fields[-1]


def solve_nls(u0: SpectralField, path: BrownianPath, p: float, scheme: str = "strang") -> Trajectory:
    """Split-step integration along one path.

    lie:    per step, dispersive flow over the increment, then nonlinear flow
            over the full step.
    strang: nonlinear half step, dispersive flow over the increment,
            nonlinear half step.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    _check_nonlinear_alias(u0.grid, p)
    dt = path.step
    incr = path.increments()
    fields = [u0]
    u = u0
    for dw in incr:
        if scheme == "lie":
            u = nonlinear_flow(linear_flow(u, dw), dt, p)
        else:
            u = nonlinear_flow(linear_flow(nonlinear_flow(u, dt / 2.0, p), dw), dt / 2.0, p)
        fields.append(u)
    return Trajectory(path, tuple(fields), p, scheme)


def linear_trajectory(u0: SpectralField, path: BrownianPath) -> Trajectory:
    """Trajectory of the dispersive flow alone (nonlinearity switched off)."""
    k2 = u0.grid.modes() ** 2
    fields = tuple(
        SpectralField(u0.grid, u0.coeffs * np.exp(1j * k2 * w)) for w in path.values
    )
    return Trajectory(path, fields, 1.0, "linear")


def duhamel(forcing: Sequence[SpectralField], path: BrownianPath, t_index: int) -> SpectralField:
    """Trapezoidal Duhamel integral int_0^{t} of the dispersive flow applied to
    the forcing: sum_j w_j e^{i k^2 (W_t - W_j)} F_j(k) over knots j <= t_index.

    ``forcing`` must provide a field at every knot up to ``t_index``.
    """
    if not 0 <= t_index <= path.n_steps:
        raise ValueError(f"t_index {t_index} outside [0, {path.n_steps}]")
    if len(forcing) < t_index + 1:
        raise ValueError("forcing not defined on every knot up to t_index")
    grid = forcing[0].grid
    k2 = grid.modes() ** 2
    acc = np.zeros(2 * grid.max_mode + 1, dtype=complex)
    if t_index == 0:
        return SpectralField(grid, acc)
    dt = path.step
    for j in range(t_index + 1):
        w = dt / 2.0 if j in (0, t_index) else dt
        acc += w * np.exp(-1j * k2 * path.values[j]) * forcing[j].coeffs
    return SpectralField(grid, np.exp(1j * k2 * path.values[t_index]) * acc)
