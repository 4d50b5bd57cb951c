import math

import numpy as np
import pytest

from conftest import decaying_random_field
from wndisp.brownian import EnsembleSpec, sample_path
from wndisp.moments import (
    MixedNormSpec,
    convolution_bound_check,
    estimate_mixed_norm,
    exact_fourth_moment,
    mc_vs_exact_fourth,
)
from wndisp.propagation import linear_trajectory, solve_nls
from wndisp.torus import SpectralField, TorusGrid


def brute_fourth_moment(coeffs: dict, horizon: float) -> float:
    """Independent oracle: enumerate mode quadruples (k1,k2,k3,k4) with
    k1 - k2 + k3 - k4 = 0 and integrate each Gaussian damping factor in
    closed form, without the (k, n, l) reparametrization."""
    ks = list(coeffs)
    total = 0.0 + 0.0j
    for k1 in ks:
        for k2 in ks:
            for k3 in ks:
                k4 = k1 - k2 + k3
                if k4 not in coeffs:
                    continue
                lam = (k1**2 - k2**2 + k3**2 - k4**2) ** 2 / 2.0
                w = horizon if lam == 0 else (1.0 - math.exp(-lam * horizon)) / lam
                total += coeffs[k1] * np.conj(coeffs[k2]) * coeffs[k3] * np.conj(coeffs[k4]) * w
    return float((2 * math.pi * total).real)


def field_of(coeffs: dict, K: int = None) -> SpectralField:
    K = K or max(abs(k) for k in coeffs)
    return SpectralField.from_modes(TorusGrid.for_bandwidth(max(K, 1)), coeffs)


class TestExactFourthMoment:
    def test_single_mode(self):
        for T in (0.25, 1.0):
            assert exact_fourth_moment(field_of({1: 1.0}), T) == pytest.approx(2 * math.pi * T)

    def test_two_modes_all_resonant(self):
        assert exact_fourth_moment(field_of({0: 1.0, 1: 1.0}), 1.0) == pytest.approx(12 * math.pi)

    def test_three_modes_with_damped_pairs(self):
        for T in (0.5, 1.0, 2.0):
            expected = 2 * math.pi * (15 * T + 2 * (1 - math.exp(-2 * T)))
            got = exact_fourth_moment(field_of({0: 1.0, 1: 1.0, 2: 1.0}), T)
            assert got == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize(
        "coeffs",
        [
            {-2: 0.8 - 0.3j, 1: 1.0, 3: -0.7 + 0.2j},
            {-3: 0.5j, -1: 1.0, 0: 0.25, 2: -1.0},
            {0: 1.0, 4: 0.5, 5: 0.5j},
        ],
    )
    def test_matches_independent_quadruple_enumeration(self, coeffs):
        T = 0.8
        assert exact_fourth_moment(field_of(coeffs, 8), T) == pytest.approx(
            brute_fourth_moment(coeffs, T), rel=1e-12
        )

    def test_invariant_under_global_phase(self):
        g = TorusGrid.for_bandwidth(8)
        u0 = decaying_random_field(g, 3)
        rotated = SpectralField(g, u0.coeffs * np.exp(0.456j))
        a = exact_fourth_moment(u0, 1.0)
        b = exact_fourth_moment(rotated, 1.0)
        assert b == pytest.approx(a, rel=1e-12)

    def test_invariant_under_spatial_translation(self):
        g = TorusGrid.for_bandwidth(8)
        u0 = decaying_random_field(g, 4)
        shifted = SpectralField(g, u0.coeffs * np.exp(-1j * g.modes() * 1.234))
        a = exact_fourth_moment(u0, 1.0)
        b = exact_fourth_moment(shifted, 1.0)
        assert b == pytest.approx(a, rel=1e-12)

    def test_horizon_coefficient_equals_resonant_sum(self):
        # the T-linear part of the output is the resonant sum alone: compare
        # the T-slope at two horizons against brute-force resonant enumeration
        coeffs = {-1: 0.5, 0: 1.0, 2: 0.25 - 0.5j}
        u0 = field_of(coeffs, 4)
        t1, t2 = 40.0, 80.0  # damped terms saturate, slope is purely resonant
        slope = (exact_fourth_moment(u0, t2) - exact_fourth_moment(u0, t1)) / (t2 - t1)
        resonant = 0.0 + 0.0j
        ks = list(coeffs)
        for k1 in ks:
            for k2 in ks:
                for k3 in ks:
                    k4 = k1 - k2 + k3
                    if k4 in coeffs and k1**2 - k2**2 + k3**2 - k4**2 == 0:
                        resonant += (
                            coeffs[k1] * np.conj(coeffs[k2]) * coeffs[k3] * np.conj(coeffs[k4])
                        )
        assert slope == pytest.approx(float((2 * math.pi * resonant).real), rel=1e-12)

    def test_trapezoid_weights_converge_to_closed_form(self):
        u0 = field_of({0: 1.0, 1: 1.0, 2: 1.0})
        exact = exact_fourth_moment(u0, 1.0)
        coarse = exact_fourth_moment(u0, 1.0, s_grid=np.linspace(0, 1, 9))
        fine = exact_fourth_moment(u0, 1.0, s_grid=np.linspace(0, 1, 1025))
        assert abs(fine - exact) < abs(coarse - exact)
        assert fine == pytest.approx(exact, rel=1e-4)


class TestMonteCarloFourthMoment:
    def test_zero_horizon(self):
        res = mc_vs_exact_fourth(field_of({1: 1.0}), 0.0, 100)
        assert res.exact == 0.0 and res.z_score == 0.0

    def test_single_mode_consistency(self):
        res = mc_vs_exact_fourth(field_of({1: 1.0}), 1.0, 2000, master_seed=10)
        assert res.exact == pytest.approx(2 * math.pi)
        assert res.z_score <= 4.0

    def test_three_mode_consistency(self):
        res = mc_vs_exact_fourth(field_of({0: 1.0, 1: 1.0, 2: 1.0}), 1.0, 2000, master_seed=11)
        assert res.z_score <= 4.0

    def test_worker_count_does_not_change_values(self):
        u0 = field_of({0: 1.0, 1: 1.0})
        a = mc_vs_exact_fourth(u0, 1.0, 300, master_seed=3, n_steps=64, workers=1)
        b = mc_vs_exact_fourth(u0, 1.0, 300, master_seed=3, n_steps=64, workers=3)
        assert a.fourth_power_mean == b.fourth_power_mean

    def test_bandwidth_cap(self):
        g = TorusGrid.for_bandwidth(65)
        with pytest.raises(ValueError):
            mc_vs_exact_fourth(SpectralField.zeros(g), 1.0, 10)


class TestEstimateMixedNorm:
    def test_degenerate_ensemble_returns_exact_norm(self):
        spec = EnsembleSpec(1, 5, 1.0, 0.125)
        path = sample_path(spec, 0)
        u0 = field_of({1: 1.0}, 4)
        traj = linear_trajectory(u0, path)
        norm_spec = MixedNormSpec(2.0, 4.0, 4.0, 1.0)
        res = estimate_mixed_norm([traj], norm_spec)
        assert res.std_error == 0.0 and res.n_paths == 1
        # |u| = 1 throughout: L4_T L4_x norm is (T * 2pi)^{1/4}
        assert res.value == pytest.approx((2 * math.pi) ** 0.25, rel=1e-12)

    def test_frozen_plane_wave_any_rho(self):
        spec = EnsembleSpec(3, 5, 1.0, 0.25)
        u0 = field_of({1: 1.0}, 4)
        trajs = [linear_trajectory(u0, sample_path(spec, i)) for i in range(3)]
        res = estimate_mixed_norm(trajs, MixedNormSpec(4.0, 4.0, 4.0, 1.0))
        assert res.value == pytest.approx((2 * math.pi) ** 0.25, rel=1e-12)
        assert res.std_error <= 1e-12

    def test_matches_fast_block_estimator(self):
        g = TorusGrid.for_bandwidth(4)
        u0 = decaying_random_field(g, 8, decay=0.5)
        n, steps = 24, 32
        spec = EnsembleSpec(n, 77, 1.0, 1.0 / steps)
        trajs = (linear_trajectory(u0, sample_path(spec, i)) for i in range(n))
        res = estimate_mixed_norm(trajs, MixedNormSpec(4.0, 4.0, 4.0, 1.0))
        check = mc_vs_exact_fourth(u0, 1.0, n, master_seed=77, n_steps=steps)
        assert res.value**4 == pytest.approx(check.fourth_power_mean, rel=1e-10)

    def test_mismatched_ensembles_rejected(self):
        u0 = field_of({1: 1.0}, 4)
        t1 = linear_trajectory(u0, sample_path(EnsembleSpec(1, 5, 1.0, 0.25), 0))
        t2 = linear_trajectory(u0, sample_path(EnsembleSpec(1, 5, 1.0, 0.125), 0))
        with pytest.raises(ValueError):
            estimate_mixed_norm([t1, t2], MixedNormSpec(2.0, 4.0, 4.0, 1.0))

    def test_invalid_exponents_rejected(self):
        with pytest.raises(ValueError):
            MixedNormSpec(0.5, 4.0, 4.0, 1.0)

    def test_mc_matches_exact_for_three_mode_datum(self):
        u0 = field_of({0: 1.0, 1: 1.0, 2: 1.0})
        n = 600
        spec = EnsembleSpec(n, 2023, 1.0, 1.0 / 128)
        trajs = (linear_trajectory(u0, sample_path(spec, i)) for i in range(n))
        res = estimate_mixed_norm(trajs, MixedNormSpec(4.0, 4.0, 4.0, 1.0))
        exact = exact_fourth_moment(u0, 1.0)
        se4 = 4 * res.value**3 * res.std_error
        assert abs(res.value**4 - exact) <= 3.5 * se4


class TestConvolutionBound:
    def test_single_delta_saturates(self):
        res = convolution_bound_check([1.0], [1.0], [1.0], [[1.0]])
        assert res.lhs == pytest.approx(1.0)
        assert res.rhs == pytest.approx(1.0)
        assert res.ratio == pytest.approx(1.0)

    def test_zero_kernel_gives_zero(self):
        res = convolution_bound_check([1.0, 2.0], [1.0], [3.0], np.zeros((4, 4)))
        assert res.lhs == 0.0

    def test_thousand_random_trials_stay_below_one(self):
        rng = np.random.default_rng(12345)
        worst = 0.0
        for _ in range(1000):
            lf, lg, lh = rng.integers(1, 33, size=3)
            ln, ll = rng.integers(1, 33, size=2)
            f = rng.standard_normal(lf) + 1j * rng.standard_normal(lf)
            g = rng.standard_normal(lg) + 1j * rng.standard_normal(lg)
            h = rng.standard_normal(lh) + 1j * rng.standard_normal(lh)
            r = rng.standard_normal((ln, ll)) + 1j * rng.standard_normal((ln, ll))
            res = convolution_bound_check(f, g, h, r)
            worst = max(worst, res.ratio)
            assert res.ratio <= 1.0 + 1e-12
        assert worst > 0.1  # the trials are not vacuous
