"""The quintic illposedness witness: the fifth-derivative functional

    A[phi](t) = int_0^t  e^{-i(W_t - W_s)Lap} |e^{-iW_s Lap} phi|^4 e^{-iW_s Lap} phi  ds

evaluated on the flat-band data phi_N = N^{-1/2} sum_{|k| <= N} e^{ikx}.
Its expected twisted Fourier coefficients have the exact form

    E e^{-i W_t k^2} FT(A[phi_N])(t, k) = N^{-5/2} sum_kappa psi(Omega(k, kappa))

with psi(0) = t and psi(Om) = 2 (1 - e^{-t Om^2 / 2}) / Om^2, the sum running
over quintuples in [-N, N]^5 with alternating sum k.  Resonant quintuples
alone already force growth ~ t log N of the L2 norm of the expectation; the
module computes the exact sum (small N), that resonant lower bound (large N),
and a Monte Carlo estimate, and fits the measured growth against log N and
sqrt(log N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from .lattice_counts import omega_histogram, quintic_resonant_count
from .parallel import run_blocks
from .torus import AliasingError, SpectralField, TorusGrid

EXACT_SUM_CAP = 24      # O(N^4) histogram per k beyond this is not desk-scale
LOWER_BOUND_CAP = 512   # divisor-table counting per k

PLANCHEREL_FACTOR = math.sqrt(2.0 * math.pi)


def witness_field(n_band: int, grid: Optional[TorusGrid] = None) -> SpectralField:
    """phi_N with coefficients N^{-1/2} on |k| <= N, on a grid that retains the
    full bandwidth 5N of the quintic output."""
    if n_band < 1:
        raise ValueError("N must be >= 1")
    if grid is None:
        grid = TorusGrid.for_bandwidth(5 * n_band)
    if grid.max_mode < 5 * n_band:
        raise ValueError(f"grid must retain modes up to 5N = {5 * n_band}")
    k = grid.modes()
    coeffs = np.where(np.abs(k) <= n_band, n_band**-0.5, 0.0).astype(complex)
    return SpectralField(grid, coeffs)


def witness_l2_norm(n_band: int) -> float:
    """||phi_N||_{L2} = sqrt(2 pi (2N+1)/N), bounded as N grows."""
    return math.sqrt(2.0 * math.pi * (2 * n_band + 1) / n_band)


def exact_expected_amplitude(
    n_band: int, t: float, k: int, s_grid=None, cap: int = EXACT_SUM_CAP
) -> float:
    """Exact expectation of the twisted witness coefficient at mode k.

    Computed as N^{-5/2} sum_Q H(Q) psi(2Q) from the integer histogram H of
    the phase parameter Q; ``s_grid`` replaces the closed-form time integral
    psi by its trapezoid approximation for quadrature-bias diagnostics.
    """
    if n_band > cap:
        raise ValueError(
            f"exact sum capped at N = {cap}; use lower_bound_norm or mc_witness beyond that"
        )
    if t < 0:
        raise ValueError("t must be nonnegative")
    H, q_max = omega_histogram(n_band, k)
    if H.sum() == 0:
        return 0.0
    q = np.arange(-q_max, q_max + 1, dtype=float)
    om2 = (2.0 * q) ** 2
    if s_grid is None:
        safe = np.where(om2 == 0.0, 1.0, om2)
        psi = np.where(om2 == 0.0, t, -2.0 * np.expm1(-0.5 * t * safe) / safe)
    else:
        psi = np.trapezoid(np.exp(-0.5 * np.outer(np.asarray(s_grid), om2)), s_grid, axis=0)
    return float(n_band**-2.5 * np.dot(H, psi))


def exact_norm_of_expectation(n_band: int, t: float, s_grid=None, cap: int = EXACT_SUM_CAP) -> float:
    """L2 norm of the expected twisted witness field: sqrt(2pi sum_k amp(k)^2)."""
    amps = [
        exact_expected_amplitude(n_band, t, k, s_grid=s_grid, cap=cap)
        for k in range(-5 * n_band, 5 * n_band + 1)
    ]
    return PLANCHEREL_FACTOR * float(np.linalg.norm(amps))


def lower_bound_norm(
    n_band: int,
    t: float,
    with_plancherel_factor: bool = True,
    cap: int = LOWER_BOUND_CAP,
) -> float:
    """Resonant lower bound t N^{-5/2} (sum_{|k| <= N/4} |S_N(k)|^2)^{1/2}.

    Dropping every nonresonant term of the exact expectation only decreases
    it, so this is a true lower bound for ``exact_norm_of_expectation``.  The
    sqrt(2 pi) factor converts the coefficient sum to the L2 normalization;
    set ``with_plancherel_factor=False`` for the bare coefficient form.
    """
    if n_band > cap:
        raise ValueError(f"lower bound capped at N = {cap}")
    ssum = 0
    for k in range(0, n_band // 4 + 1):
        c = quintic_resonant_count(n_band, k).count
        ssum += c * c if k == 0 else 2 * c * c  # S_N(-k) = S_N(k)
    value = t * n_band**-2.5 * math.sqrt(ssum)
    return value * PLANCHEREL_FACTOR if with_plancherel_factor else value


def data_bandwidth(phi: SpectralField) -> int:
    """Largest |k| carrying a nonzero coefficient."""
    k = phi.grid.modes()
    nz = k[np.abs(phi.coeffs) > 0]
    return int(np.abs(nz).max()) if nz.size else 0


def _check_witness_grid(phi: SpectralField) -> int:
    band = data_bandwidth(phi)
    grid = phi.grid
    if grid.max_mode < 5 * band or grid.phys_points < 10 * band + 1:
        raise AliasingError(
            f"grid (K={grid.max_mode}, M={grid.phys_points}) cannot hold the quintic of "
            f"bandwidth-{band} data (need K >= {5 * band}, M >= {10 * band + 1})"
        )
    return band


def quintic_functional(phi: SpectralField, path) -> SpectralField:
    """The twisted fifth-derivative functional e^{i W_T Lap} A[phi](T) for one
    path: the trapezoid over the path knots of e^{-i W_s k^2} FT(|v_s|^4 v_s),
    with v_s the dispersive flow of phi.  Since e^{i W_T Lap} is unitary this
    field also carries ||A[phi](T)||."""
    _check_witness_grid(phi)
    grid = phi.grid
    K, M = grid.max_mode, grid.phys_points
    k2 = grid.modes().astype(float) ** 2
    idx = grid.modes() % M
    W = path.values
    dt = path.step
    w = np.full(len(W), dt)
    w[0] = w[-1] = dt / 2.0
    acc = np.zeros(2 * K + 1, dtype=complex)
    for j, Wj in enumerate(W):
        v = phi.coeffs * np.exp(1j * k2 * Wj)
        full = np.zeros(M, dtype=complex)
        full[idx] = v
        u = np.fft.ifft(full) * M
        x_hat = (np.fft.fft(np.abs(u) ** 4 * u) / M)[idx]
        acc += w[j] * np.exp(-1j * k2 * Wj) * x_hat
    return SpectralField(grid, acc)


def _witness_block(
    n_band: int, t: float, n_steps: int, master_seed: int, grid: TorusGrid, lo: int, hi: int
) -> np.ndarray:
    """Twisted witness coefficient vectors for paths lo..hi-1."""
    from .brownian import EnsembleSpec, sample_path

    phi = witness_field(n_band, grid)
    spec = EnsembleSpec(max(hi, 1), master_seed, t, t / n_steps)
    out = np.empty((hi - lo, 2 * grid.max_mode + 1), dtype=complex)
    for i in range(hi - lo):
        out[i] = quintic_functional(phi, sample_path(spec, lo + i)).coeffs
    return out


@dataclass(frozen=True)
class WitnessStatistics:
    """Monte Carlo estimates of ||E e^{iW_t Lap} A[phi_N](t)||_{L2} (norm of the
    path-averaged field) and of E ||A[phi_N](t)||_{L2} (average of norms)."""

    n_band: int
    t: float
    n_paths: int
    n_steps: int
    norm_of_mean: float
    norm_of_mean_se: float
    mean_norm: float
    mean_norm_se: float
    master_seed: int


def mc_witness(
    n_band: int,
    t: float,
    n_paths: int,
    dt: float,
    master_seed: int = 0,
    workers: int = 1,
    grid: Optional[TorusGrid] = None,
) -> WitnessStatistics:
    """Estimate both witness statistics over ``n_paths`` Brownian paths.

    The time integral uses the trapezoid rule on the path knots; since
    e^{iW_t Lap} is unitary, the average of per-path norms equals
    E ||A[phi_N]|| while the norm of the cross-path average estimates
    ||E e^{iW_t Lap} A[phi_N]||.
    """
    if grid is None:
        grid = TorusGrid.for_bandwidth(5 * n_band)
    if grid.max_mode < 5 * n_band or grid.phys_points < 10 * n_band + 1:
        raise AliasingError(
            f"grid (K={grid.max_mode}, M={grid.phys_points}) cannot hold the quintic of "
            f"bandwidth-{n_band} data (need K >= {5 * n_band}, M >= {10 * n_band + 1})"
        )
    n_steps = round(t / dt)
    if n_steps < 1 or abs(t / dt - n_steps) > 1e-9 * n_steps:
        raise ValueError("t/dt must be a positive integer")
    blocks = run_blocks(
        partial(_witness_block, n_band, t, n_steps, master_seed, grid), n_paths, workers
    )
    C = np.concatenate(blocks, axis=0)
    mean = C.mean(axis=0)
    nom = PLANCHEREL_FACTOR * float(np.linalg.norm(mean))
    if n_paths > 1 and nom > 0:
        proj = np.real(np.sum(np.conj(mean)[None, :] * C, axis=1))
        nom_se = 2.0 * math.pi * float(proj.std(ddof=1)) / math.sqrt(n_paths) / nom
    else:
        nom_se = 0.0
    norms = PLANCHEREL_FACTOR * np.linalg.norm(C, axis=1)
    mn = float(norms.mean())
    mn_se = float(norms.std(ddof=1)) / math.sqrt(n_paths) if n_paths > 1 else 0.0
    return WitnessStatistics(n_band, t, n_paths, n_steps, nom, nom_se, mn, mn_se, master_seed)


def quadrature_bias(n_band: int, t: float, n_steps: int, cap: int = EXACT_SUM_CAP) -> float:
    """Deterministic bias of the trapezoid time quadrature on the first
    statistic: trapezoid-weighted exact norm minus the closed form."""
    s_grid = np.linspace(0.0, t, n_steps + 1)
    return exact_norm_of_expectation(n_band, t, s_grid=s_grid, cap=cap) - exact_norm_of_expectation(
        n_band, t, cap=cap
    )


def _fit_against(x: np.ndarray, y: np.ndarray) -> dict:
    """Least-squares line y = a x + b with slope standard error and residual."""
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, _, _ = np.linalg.lstsq(A, y, rcond=None)
    n = len(x)
    if n > 2:
        dof = n - 2
        s2 = float(res[0]) / dof if res.size else 0.0
        cov = s2 * np.linalg.inv(A.T @ A)
        slope_se = math.sqrt(max(cov[0, 0], 0.0))
    else:
        slope_se = float("nan")
    resid = y - A @ coef
    return {
        "slope": float(coef[0]),
        "intercept": float(coef[1]),
        "slope_se": slope_se,
        "rms_residual": float(np.sqrt(np.mean(resid**2))),
    }


@dataclass(frozen=True)
class GrowthRow:
    n_band: int
    t: float
    lower_bound: float
    exact_norm: Optional[float]
    mc_estimate: Optional[float]
    mc_se: Optional[float]
    divergence_diag: float  # value(t_N) * log N at t_N = 1 / log^2 N


@dataclass(frozen=True)
class GrowthReport:
    rows: tuple
    fit_log: dict = field(default_factory=dict)
    fit_sqrt_log: dict = field(default_factory=dict)
    better_fit: str = ""

    def csv_rows(self):
        header = ["N", "t", "lower_bound", "exact_norm", "mc_estimate", "mc_se", "divergence_diag"]
        body = [
            [
                r.n_band,
                r.t,
                r.lower_bound,
                "" if r.exact_norm is None else r.exact_norm,
                "" if r.mc_estimate is None else r.mc_estimate,
                "" if r.mc_se is None else r.mc_se,
                r.divergence_diag,
            ]
            for r in self.rows
        ]
        return header, body


def growth_scan(
    n_list: Sequence[int],
    t_rule: "float | str | Callable[[int], float]" = 1.0,
    exact_cap: int = 16,
    mc_paths: int = 0,
    mc_dt: float = 1.0 / 256,
    master_seed: int = 0,
    workers: int = 1,
) -> GrowthReport:
    """Tabulate the witness growth over ``n_list`` and fit value/t against
    log N and sqrt(log N).

    ``t_rule`` is a constant, a callable N -> t, or the string
    ``"1/log^2"`` for the blow-up scaling t_N = (log N)^{-2}.
    """
    if list(n_list) != sorted(set(n_list)):
        raise ValueError("n_list must be strictly ascending")

    def t_of(n: int) -> float:
        if callable(t_rule):
            return float(t_rule(n))
        if t_rule == "1/log^2":
            return 1.0 / math.log(n) ** 2
        return float(t_rule)

    rows = []
    for n in n_list:
        t = t_of(n)
        lb = lower_bound_norm(n, t)
        exact = exact_norm_of_expectation(n, t) if n <= exact_cap else None
        mc_est = mc_se = None
        if mc_paths > 0:
            stats = mc_witness(n, t, mc_paths, mc_dt, master_seed=master_seed, workers=workers)
            mc_est, mc_se = stats.norm_of_mean, stats.norm_of_mean_se
        t_n = 1.0 / math.log(n) ** 2 if n > 1 else 1.0
        diag = lower_bound_norm(n, t_n) * math.log(max(n, 2))
        rows.append(GrowthRow(n, t, lb, exact, mc_est, mc_se, diag))
    if len(rows) < 2:
        return GrowthReport(tuple(rows))
    slopes_y = np.array([r.lower_bound / r.t for r in rows])
    logs = np.array([math.log(r.n_band) for r in rows])
    fit_log = _fit_against(logs, slopes_y)
    fit_sqrt = _fit_against(np.sqrt(logs), slopes_y)
    better = "log" if fit_log["rms_residual"] <= fit_sqrt["rms_residual"] else "sqrt_log"
    return GrowthReport(tuple(rows), fit_log, fit_sqrt, better)
