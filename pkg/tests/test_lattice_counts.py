import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wndisp.lattice_counts import (
    CorrespondenceCheck,
    divisor_tau,
    ellipse_correspondence_check,
    ellipse_points,
    omega_histogram,
    quintic_phase,
    quintic_resonant_count,
    reparam_quintuple,
    s_kj_count,
    zero_product_count,
)


class TestSkjCount:
    def test_origin(self):
        for bound in (1, 5, 40):
            assert s_kj_count(0, 0, bound).count == 1

    def test_odd_level_sets_at_k0_are_empty(self):
        # k1^2 + k2^2 + (k1+k2)^2 = 2(k1^2 + k1 k2 + k2^2) is even
        for j in (1, 3, 5, 7, 99):
            assert s_kj_count(0, j, 12).count == 0

    def test_level_two(self):
        res = s_kj_count(0, 2, 4, with_members=True)
        assert res.count == 6
        assert set(res.members) == {(-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0)}

    def test_bound_clips_members(self):
        unbounded = s_kj_count(0, 8, 10).count
        clipped = s_kj_count(0, 8, 1).count
        assert clipped <= unbounded

    def test_members_consistency(self):
        res = s_kj_count(3, 29, 16, with_members=True)
        assert len(res.members) == res.count
        for (k1, k2) in res.members:
            assert k1**2 + k2**2 + (3 - k1 - k2) ** 2 == 29


class TestEllipsePoints:
    def test_zero(self):
        assert ellipse_points(0).count == 1

    def test_one(self):
        res = ellipse_points(1, with_members=True)
        assert res.count == 2 and set(res.members) == {(1, 0), (-1, 0)}

    def test_twelve(self):
        res = ellipse_points(12, with_members=True)
        assert res.count == 6
        assert set(res.members) == {(3, 1), (3, -1), (-3, 1), (-3, -1), (0, 2), (0, -2)}

    def test_members_lie_on_curve(self):
        for t in (4, 7, 28, 97, 300):
            for (x, y) in ellipse_points(t, with_members=True).members or ():
                assert x * x + 3 * y * y == t

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ellipse_points(-1)


class TestEllipseCorrespondence:
    def test_level_two_maps_six_to_six(self):
        res = ellipse_correspondence_check(0, 2, 4)
        assert res.ok and res.s_count == 6 and res.ellipse_count == 6

    def test_origin(self):
        res = ellipse_correspondence_check(0, 0, 4)
        assert res.ok and res.s_count == 1

    def test_exhaustive_sweep(self):
        for k in range(-8, 9):
            for j in range(0, 201):
                if 6 * j - 2 * k * k < 0:
                    continue
                res = ellipse_correspondence_check(k, j, 40)
                assert isinstance(res, CorrespondenceCheck)
                assert res.ok, (k, j, res)
                assert res.s_count <= res.ellipse_count


class TestDivisorTau:
    @pytest.mark.parametrize("n,expected", [(1, 1), (12, 6), (97, 2), (2**10, 11), (360, 24)])
    def test_values(self, n, expected):
        assert divisor_tau(n) == expected

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            divisor_tau(0)

    def test_multiplicative_on_coprimes(self):
        assert divisor_tau(35) == divisor_tau(5) * divisor_tau(7)


class TestZeroProductCount:
    def test_trivial_box(self):
        assert zero_product_count(0) == 1

    def test_unit_box(self):
        assert zero_product_count(1) == 33
        assert zero_product_count(1, method="brute") == 33

    def test_histogram_equals_brute_force_up_to_twenty(self):
        for m in range(0, 21):
            assert zero_product_count(m) == zero_product_count(m, method="brute"), m

    def test_brute_force_capped(self):
        with pytest.raises(ValueError):
            zero_product_count(21, method="brute")

    def test_growth_band(self):
        ratios = [
            zero_product_count(m) / (m * m * math.log(m)) for m in (8, 16, 32, 64)
        ]
        assert max(ratios) / min(ratios) <= 4.0


class TestQuinticResonantCount:
    def test_unit_band(self):
        assert quintic_resonant_count(1, 0).count == 31

    def test_reparam_equals_direct_definition(self):
        for n in (1, 2, 3, 4, 6, 8):
            for k in range(-n, n + 1, max(1, n // 2)):
                a = quintic_resonant_count(n, k, method="reparam").count
                b = quintic_resonant_count(n, k, method="direct").count
                assert a == b, (n, k, a, b)

    def test_symmetric_in_k(self):
        for n in (2, 5, 9):
            for k in range(0, n + 1):
                assert (
                    quintic_resonant_count(n, k).count == quintic_resonant_count(n, -k).count
                )

    def test_box_lower_bound(self):
        # for |k| <= N/4 every quadruple with |n_i| <= N/4 yields an admissible
        # quintuple, so the count dominates the zero-product box count
        for n in (8, 16, 32):
            box = zero_product_count(n // 4)
            for k in range(-(n // 4), n // 4 + 1, 2):
                assert quintic_resonant_count(n, k).count >= box

    def test_k_outside_band_rejected(self):
        with pytest.raises(ValueError):
            quintic_resonant_count(4, 5)

    def test_direct_capped(self):
        with pytest.raises(ValueError):
            quintic_resonant_count(9, 0, method="direct")


class TestReparametrization:
    @settings(max_examples=200, deadline=None)
    @given(
        k=st.integers(-50, 50),
        n1=st.integers(-50, 50),
        n2=st.integers(-50, 50),
        n3=st.integers(-50, 50),
        n4=st.integers(-50, 50),
    )
    def test_phase_identity_and_alternating_sum(self, k, n1, n2, n3, n4):
        # expanding the squares yields -2(n1 n2 + n3 n4); only the magnitude
        # and the vanishing set matter downstream
        kappa = reparam_quintuple(k, n1, n2, n3, n4)
        assert kappa[0] - kappa[1] + kappa[2] - kappa[3] + kappa[4] == k
        assert quintic_phase(k, kappa) == -2 * (n1 * n2 + n3 * n4)


class TestOmegaHistogram:
    def test_center_equals_resonant_count(self):
        for n in (1, 2, 4, 8):
            for k in (0, 1, n):
                H, qmax = omega_histogram(n, k)
                assert int(H[qmax]) == quintic_resonant_count(n, k).count

    def test_total_equals_all_admissible_quadruples(self):
        # the histogram total counts every quintuple with alternating sum k
        n, k = 3, 1
        H, _ = omega_histogram(n, k)
        v = np.arange(-n, n + 1)
        K1, K2, K3, K4 = np.meshgrid(v, v, v, v, indexing="ij")
        K5 = k - K1 + K2 - K3 + K4
        total = int(np.count_nonzero(np.abs(K5) <= n))
        assert int(H.sum()) == total


class TestBombieriPilaSanity:
    def test_max_pair_count_grows_slower_than_sqrt(self):
        maxima = {}
        for bound in (8, 16, 32, 64):
            worst = 0
            for k in range(-bound, bound + 1):
                k1 = np.arange(-bound, bound + 1, dtype=np.int64)
                K1, K2 = np.meshgrid(k1, k1, indexing="ij")
                K3 = k - K1 - K2
                ok = np.abs(K3) <= bound
                j = (K1 * K1 + K2 * K2 + K3 * K3)[ok]
                if j.size:
                    worst = max(worst, int(np.bincount(j).max()))
            maxima[bound] = worst
        assert maxima[64] / maxima[8] < (64 / 8) ** 0.5
