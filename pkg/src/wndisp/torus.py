"""Fields on the 2pi-torus represented by their Fourier coefficients.

Convention: a field u with coefficients ``a_k`` (|k| <= K) is
``u(x) = sum_k a_k e^{ikx}`` and ``a_k = (1/2pi) int u(x) e^{-ikx} dx``,
so Plancherel reads ``||u||_{L2}^2 = 2pi * sum_k |a_k|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.fft import next_fast_len


class AliasingError(RuntimeError):
    """A pointwise product would fold spectral content back onto retained modes."""


@dataclass(frozen=True)
class TorusGrid:
    """Uniform discretization of the 2pi-torus.

    ``max_mode`` is the spectral cutoff K (modes k in -K..K) and
    ``phys_points`` the number M of physical samples x_j = 2pi*j/M.
    Sampling is injective when M >= 2K+1; a degree-d pointwise product
    is recovered alias-free on the retained modes when M >= (d+1)K+1.
    """

    max_mode: int
    phys_points: int

    def __post_init__(self):
        if self.max_mode < 1:
            raise ValueError(f"max_mode must be >= 1, got {self.max_mode}")
        if self.phys_points < 2 * self.max_mode + 1:
            raise ValueError(
                f"phys_points={self.phys_points} < 2K+1={2 * self.max_mode + 1}: sampling not injective"
            )

    @classmethod
    def for_bandwidth(cls, max_mode: int, product_degree: int = 5) -> "TorusGrid":
        """Smallest FFT-friendly grid that keeps degree-``product_degree``
        pointwise products alias-free on the retained modes.

        The default degree 5 covers quintic nonlinearities, the most
        demanding consumer in this package.
        """
        target = (product_degree + 1) * max_mode + 2
        return cls(max_mode, next_fast_len(target))

    @property
    def padding_factor(self) -> Fraction:
        return Fraction(self.phys_points, 2 * self.max_mode + 1)

    @property
    def alias_free_degree(self) -> int:
        """Largest product degree recovered alias-free: max d with M >= (d+1)K+1."""
        return (self.phys_points - 1) // self.max_mode - 1

    def modes(self) -> np.ndarray:
        return np.arange(-self.max_mode, self.max_mode + 1)

    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.phys_points) / self.phys_points


def _smooth_bump(x: np.ndarray) -> np.ndarray:
    """C-infinity cutoff: 1 on [-1,1], supported in (-2,2)."""
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.zeros_like(ax)
    out[ax <= 1.0] = 1.0
    band = (ax > 1.0) & (ax < 2.0)
    if np.any(band):
        s = 2.0 - ax[band]  # in (0,1)
        g = np.exp(-1.0 / s)
        gc = np.exp(-1.0 / (1.0 - s))
        out[band] = g / (g + gc)
    return out


@dataclass(frozen=True)
class SpectralField:
    """Immutable spectral representation of a field on a :class:`TorusGrid`.

    ``coeffs[i]`` is the coefficient of ``e^{ikx}`` for ``k = i - K``.
    """

    grid: TorusGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2 * self.grid.max_mode + 1,):
            raise ValueError(
                f"expected {2 * self.grid.max_mode + 1} coefficients, got shape {c.shape}"
            )
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "SpectralField":
        return cls(grid, np.zeros(2 * grid.max_mode + 1, dtype=complex))

    @classmethod
    def from_modes(cls, grid: TorusGrid, amplitudes: dict) -> "SpectralField":
        c = np.zeros(2 * grid.max_mode + 1, dtype=complex)
        for k, a in amplitudes.items():
            if abs(k) > grid.max_mode:
                raise ValueError(f"mode {k} outside |k| <= {grid.max_mode}")
            c[k + grid.max_mode] = a
        return cls(grid, c)

    def coeff(self, k: int) -> complex:
        if abs(k) > self.grid.max_mode:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + self.grid.max_mode])

    def to_physical(self) -> np.ndarray:
        """Samples sum_k a_k e^{ikx_j} on the M physical nodes (zero-padded)."""
        M = self.grid.phys_points
        full = np.zeros(M, dtype=complex)
        full[self.grid.modes() % M] = self.coeffs
        return np.fft.ifft(full) * M

    def l2_norm(self) -> float:
        return math.sqrt(2.0 * np.pi * float(np.sum(np.abs(self.coeffs) ** 2)))

    def lp_norm(self, r: float) -> float:
        """Lebesgue norm (int |u|^r dx)^{1/r} by the rectangle rule.

        The rule is exact for trigonometric polynomials of degree < M,
        hence exact for even r whenever r*K < M.  ``r = inf`` returns the
        maximum of |u| over the sample nodes.
        """
        if r != math.inf and r < 1:
            raise ValueError(f"exponent must satisfy r >= 1, got {r}")
        mod = np.abs(self.to_physical())
        if r == math.inf:
            return float(mod.max())
        M = self.grid.phys_points
        return float((np.sum(mod**r) * 2.0 * np.pi / M) ** (1.0 / r))

    def project_leq(self, N: int, mode: str = "sharp") -> "SpectralField":
        """Frequency projection onto |k| <~ N.

        ``sharp`` zeroes every coefficient with |k| > N; ``smooth``
        multiplies by the bump chi(k/N), which is 1 on [-N, N] and
        vanishes for |k| >= 2N.
        """
        if N < 1:
            raise ValueError(f"N must be >= 1, got {N}")
        k = self.grid.modes()
        if mode == "sharp":
            mult = (np.abs(k) <= N).astype(float)
        elif mode == "smooth":
            mult = _smooth_bump(k / N)
        else:
            raise ValueError(f"unknown projection mode {mode!r}")
        return SpectralField(self.grid, self.coeffs * mult)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


def to_physical(fld: SpectralField) -> np.ndarray:
    return fld.to_physical()


def to_spectral(samples: np.ndarray, grid: TorusGrid) -> SpectralField:
    """Discrete Fourier coefficients of M uniform samples, truncated to |k| <= K."""
    samples = np.asarray(samples, dtype=complex)
    M = grid.phys_points
    if samples.shape != (M,):
        raise ValueError(f"expected {M} samples, got shape {samples.shape}")
    full = np.fft.fft(samples) / M
    return SpectralField(grid, full[grid.modes() % M])


def lp_norm(fld: SpectralField, r: float) -> float:
    return fld.lp_norm(r)


def project_leq(fld: SpectralField, N: int, mode: str = "sharp") -> SpectralField:
    return fld.project_leq(N, mode)


def serialize_field(fld: SpectralField) -> list:
    """Flat record [K, M, re a_{-K}, im a_{-K}, ..., re a_K, im a_K]."""
    flat: list = [fld.grid.max_mode, fld.grid.phys_points]
    for c in fld.coeffs:
        flat.extend((float(c.real), float(c.imag)))
    return flat


def deserialize_field(record) -> SpectralField:
    K, M = int(record[0]), int(record[1])
    body = np.asarray(record[2:], dtype=float)
    if body.size != 2 * (2 * K + 1):
        raise ValueError("field record length inconsistent with K")
    return SpectralField(TorusGrid(K, M), body[0::2] + 1j * body[1::2])
