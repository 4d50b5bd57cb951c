import math

import numpy as np
import pytest

from wndisp.brownian import BrownianPath, EnsembleSpec, refine, sample_path
from wndisp.propagation import (
    Trajectory,
    duhamel,
    linear_flow,
    linear_trajectory,
    nonlinear_flow,
    solve_nls,
)
from wndisp.torus import AliasingError, SpectralField, TorusGrid


def smooth_random_field(grid, seed, decay=0.8):
    rng = np.random.default_rng(seed)
    k = grid.modes()
    c = (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) * np.exp(-decay * np.abs(k))
    c /= np.linalg.norm(c)
    return SpectralField(grid, c)


class TestLinearFlow:
    def test_single_mode_phase(self):
        g = TorusGrid.for_bandwidth(2)
        f = SpectralField.from_modes(g, {1: 1.0})
        out = linear_flow(f, 0.7)
        assert out.coeff(1) == pytest.approx(np.exp(0.7j))

    def test_zero_mode_unchanged(self):
        g = TorusGrid.for_bandwidth(2)
        f = SpectralField.from_modes(g, {0: 1.0})
        assert linear_flow(f, 123.456).coeff(0) == pytest.approx(1.0)

    def test_unitary_to_machine_precision(self):
        g = TorusGrid.for_bandwidth(16)
        f = smooth_random_field(g, 0)
        out = linear_flow(f, -2.34)
        assert abs(out.l2_norm() - f.l2_norm()) <= 1e-14 * f.l2_norm()


class TestNonlinearFlow:
    def test_zero_time_is_identity(self):
        g = TorusGrid.for_bandwidth(8)
        f = smooth_random_field(g, 1)
        out = nonlinear_flow(f, 0.0, 3.0)
        assert np.array_equal(out.coeffs, f.coeffs)

    def test_constant_field_closed_form(self):
        g = TorusGrid.for_bandwidth(2)
        c = 1.5 - 0.5j
        f = SpectralField.from_modes(g, {0: c})
        out = nonlinear_flow(f, 0.3, 3.0)
        assert out.coeff(0) == pytest.approx(c * np.exp(-0.3j * abs(c) ** 2))

    def test_negative_time_rejected(self):
        g = TorusGrid.for_bandwidth(2)
        f = SpectralField.from_modes(g, {0: 1.0})
        with pytest.raises(ValueError):
            nonlinear_flow(f, -0.1, 3.0)

    def test_pointwise_modulus_preserved_before_truncation(self):
        g = TorusGrid.for_bandwidth(8)
        f = smooth_random_field(g, 2)
        u = f.to_physical()
        v = u * np.exp(-1j * 0.05 * np.abs(u) ** 2)
        assert np.allclose(np.abs(v), np.abs(u), rtol=1e-14)

    def test_l2_norm_preserved_after_truncation(self):
        g = TorusGrid.for_bandwidth(16)
        f = smooth_random_field(g, 3)
        out = nonlinear_flow(f, 1e-3, 3.0)
        assert abs(out.l2_norm() - f.l2_norm()) <= 1e-11 * f.l2_norm()

    def test_alias_guard_for_odd_integer_exponent(self):
        g = TorusGrid(8, 20)  # supports degree (20-1)//8 - 1 = 1 products only
        f = SpectralField.from_modes(g, {1: 1.0})
        with pytest.raises(AliasingError):
            nonlinear_flow(f, 0.1, 3.0)

    def test_noninteger_exponent_runs_pointwise(self):
        g = TorusGrid.for_bandwidth(8)
        f = smooth_random_field(g, 4)
        out = nonlinear_flow(f, 1e-3, 2.5)
        assert abs(out.l2_norm() - f.l2_norm()) <= 1e-10 * f.l2_norm()


class TestSolveNls:
    @pytest.mark.parametrize("scheme", ["lie", "strang"])
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_single_mode_exact_solution(self, scheme, k):
        # |u| stays 1, so the equation reduces to the phase e^{i(k^2 W_t - t)}
        spec = EnsembleSpec(1, 314159, 1.0, 1.0 / 128)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(max(4, k))
        u0 = SpectralField.from_modes(g, {k: 1.0})
        traj = solve_nls(u0, path, 3.0, scheme)
        times = traj.times()
        for j, fld in enumerate(traj.fields):
            expected = np.exp(1j * (k * k * path.values[j] - times[j]))
            assert abs(fld.coeff(k) - expected) < 1e-10
            others = np.abs(fld.coeffs).sum() - abs(fld.coeff(k))
            assert others < 1e-12

    def test_mass_conserved_over_thousand_steps(self):
        from conftest import offset_random_field

        spec = EnsembleSpec(1, 7, 1.0, 1e-3)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(16)
        u0 = offset_random_field(g, 5)
        for p in (2.0, 3.0):
            traj = solve_nls(u0, path, p)
            norms = np.array([f.l2_norm() for f in traj.fields])
            assert np.abs(norms - norms[0]).max() <= 1e-11 * norms[0]

    def test_global_phase_equivariance(self):
        spec = EnsembleSpec(1, 21, 0.5, 1.0 / 64)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(8)
        u0 = smooth_random_field(g, 6)
        theta = 0.9
        a = solve_nls(SpectralField(g, np.exp(1j * theta) * u0.coeffs), path, 3.0)
        b = solve_nls(u0, path, 3.0)
        diff = np.abs(a.final().coeffs - np.exp(1j * theta) * b.final().coeffs).max()
        assert diff < 1e-12

    def test_commutes_with_spatial_translation(self):
        spec = EnsembleSpec(1, 22, 0.5, 1.0 / 64)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(8)
        u0 = smooth_random_field(g, 7)
        y = 0.37
        shift = np.exp(-1j * g.modes() * y)
        translated_first = solve_nls(SpectralField(g, u0.coeffs * shift), path, 3.0)
        translated_last = solve_nls(u0, path, 3.0).final().coeffs * shift
        assert np.abs(translated_first.final().coeffs - translated_last).max() < 1e-10

    def test_unknown_scheme_rejected(self):
        spec = EnsembleSpec(1, 1, 1.0, 0.5)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(2)
        with pytest.raises(ValueError):
            solve_nls(SpectralField.from_modes(g, {0: 1.0}), path, 3.0, "midpoint")

    def test_pathwise_self_convergence_under_bridge_refinement(self):
        # RMS distance between solutions at step dt and dt/2 shrinks by >= 1.5x
        # per refinement over a small fixed ensemble
        g = TorusGrid.for_bandwidth(16)
        u0 = smooth_random_field(g, 42)
        n_paths, levels = 16, 4
        errs = np.zeros((n_paths, levels - 1))
        spec = EnsembleSpec(n_paths, 1234, 0.5, 0.5 / 16)
        for i in range(n_paths):
            paths = [sample_path(spec, i)]
            for _ in range(levels - 1):
                paths.append(refine(paths[-1]))
            finals = [solve_nls(u0, p, 3.0).final() for p in paths]
            for lev in range(levels - 1):
                errs[i, lev] = (finals[lev] - finals[lev + 1]).l2_norm()
        rms = np.sqrt((errs**2).mean(axis=0))
        ratios = rms[:-1] / rms[1:]
        assert np.all(ratios >= 1.5), ratios


class TestLinearTrajectory:
    def test_matches_multiplier_at_every_knot(self):
        spec = EnsembleSpec(1, 5, 1.0, 0.125)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(4)
        u0 = smooth_random_field(g, 8)
        traj = linear_trajectory(u0, path)
        k2 = g.modes() ** 2
        for w, fld in zip(path.values, traj.fields):
            assert np.allclose(fld.coeffs, u0.coeffs * np.exp(1j * k2 * w))


class TestDuhamel:
    def test_zero_forcing_gives_zero(self):
        spec = EnsembleSpec(1, 5, 1.0, 0.25)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(2)
        F = [SpectralField.zeros(g)] * (path.n_steps + 1)
        out = duhamel(F, path, path.n_steps)
        assert np.abs(out.coeffs).max() == 0.0

    def test_constant_forcing_on_frozen_path(self):
        # with W identically zero the integrand is constant: result t * f
        g = TorusGrid.for_bandwidth(2)
        n = 8
        frozen = BrownianPath(1.0, 1.0 / n, np.zeros(n + 1), 0, 0)
        f = SpectralField.from_modes(g, {1: 2.0 - 1.0j})
        F = [f] * (n + 1)
        out = duhamel(F, frozen, n)
        assert out.coeff(1) == pytest.approx((2.0 - 1.0j) * 1.0)

    def test_single_mode_reduces_to_scalar_quadrature(self):
        spec = EnsembleSpec(1, 17, 1.0, 0.0625)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(2)
        rng = np.random.default_rng(3)
        gs = rng.standard_normal(path.n_steps + 1) + 1j * rng.standard_normal(path.n_steps + 1)
        F = [SpectralField.from_modes(g, {1: c}) for c in gs]
        t_index = path.n_steps - 2
        out = duhamel(F, path, t_index)
        W = path.values
        dt = path.step
        scalar = 0.0 + 0.0j
        for j in range(t_index + 1):
            w = dt / 2 if j in (0, t_index) else dt
            scalar += w * np.exp(1j * (W[t_index] - W[j])) * gs[j]
        assert abs(out.coeff(1) - scalar) < 1e-12

    def test_out_of_range_index_rejected(self):
        spec = EnsembleSpec(1, 5, 1.0, 0.25)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(2)
        F = [SpectralField.zeros(g)] * (path.n_steps + 1)
        with pytest.raises(ValueError):
            duhamel(F, path, path.n_steps + 1)

    def test_forcing_shorter_than_index_rejected(self):
        spec = EnsembleSpec(1, 5, 1.0, 0.25)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(2)
        F = [SpectralField.zeros(g)] * 2
        with pytest.raises(ValueError):
            duhamel(F, path, path.n_steps)


class TestTrajectoryInvariants:
    def test_initial_field_is_supplied_datum(self):
        spec = EnsembleSpec(1, 5, 1.0, 0.25)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(4)
        u0 = smooth_random_field(g, 9)
        traj = solve_nls(u0, path, 3.0)
        assert np.array_equal(traj.fields[0].coeffs, u0.coeffs)

    def test_field_count_must_match_knots(self):
        spec = EnsembleSpec(1, 5, 1.0, 0.25)
        path = sample_path(spec, 0)
        g = TorusGrid.for_bandwidth(2)
        with pytest.raises(ValueError):
            Trajectory(path, (SpectralField.zeros(g),), 3.0, "strang")
