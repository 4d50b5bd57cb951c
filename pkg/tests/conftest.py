"""Shared data-family helpers and the acceptance summary hook."""

import numpy as np

from wndisp.torus import SpectralField, TorusGrid


def pytest_terminal_summary(terminalreporter):
    """Echo one pass/fail line per acceptance criterion after the run."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)


def decaying_random_field(grid: TorusGrid, seed: int, decay: float = 0.8) -> SpectralField:
    """Random coefficients with exponential spectral decay, unit l2 mass."""
    rng = np.random.default_rng(seed)
    k = grid.modes()
    c = (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) * np.exp(
        -decay * np.abs(k)
    )
    c /= np.linalg.norm(c)
    return SpectralField(grid, c)


def offset_random_field(
    grid: TorusGrid, seed: int, decay: float = 0.8, sideband_l1: float = 0.4
) -> SpectralField:
    """Decaying random field with a dominant zero mode so |u| stays away from 0.

    Required when the nonlinearity involves |u| itself (even exponent p):
    the modulus is only as smooth as u is nonvanishing, and the split-step
    truncation needs a fast spectral tail to conserve mass at 1e-11.
    """
    rng = np.random.default_rng(seed)
    k = grid.modes()
    c = (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) * np.exp(
        -decay * np.abs(k)
    )
    c[grid.max_mode] = 0.0
    c *= sideband_l1 / np.abs(c).sum()
    c[grid.max_mode] = 1.0
    c /= np.linalg.norm(c)
    return SpectralField(grid, c)
