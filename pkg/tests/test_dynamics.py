"""
Tests for the drift kernel, noise matrix and stability analysis.
"""

from fractions import Fraction

import numpy as np
import pytest

from optomech.dynamics import (
    DIM,
    DRIFT_PATTERN,
    build_drift,
    build_noise,
    characteristic_polynomial,
    drift_from_rates,
    hurwitz_matrix,
    optical_damping,
    routh_hurwitz,
    stability,
)
from optomech.errors import DegenerateInput
from optomech.model import derive, with_overrides


def _cofactor_det(M) -> int:
    n = len(M)
    if n == 1:
        return M[0][0]
    total = 0
    for j in range(n):
        if M[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1 :] for row in M[1:]]
        total += (-1) ** j * M[0][j] * _cofactor_det(minor)
    return total


def _pattern_kernel(rng) -> np.ndarray:
    K = np.zeros((DIM, DIM), dtype=int)
    K[DRIFT_PATTERN] = rng.integers(-5, 6, size=int(DRIFT_PATTERN.sum()))
    return K


class TestKernelConstruction:
    """Tests for K and N built from physical parameters"""

    def test_structural_slots(self, lab_params):
        """Test the kernel is zero outside its fifteen structural slots"""
        d = derive(lab_params)
        K = build_drift(d, lab_params).entries
        assert DRIFT_PATTERN.sum() == 15
        assert np.all(K[~DRIFT_PATTERN] == 0.0)

    def test_entries(self, lab_params):
        """Test coupling, detuning and damping entries"""
        d = derive(lab_params)
        K = build_drift(d, lab_params).entries
        kappa_a = lab_params.cavity_a.kappa
        delta_b = lab_params.cavity_b.detuning_effective
        omega_m = lab_params.mirror.omega_m

        assert K[0, 0] == -kappa_a
        assert K[0, 1] == lab_params.cavity_a.detuning_effective
        assert K[3, 2] == -delta_b
        assert K[1, 4] == pytest.approx(d.g_eff.a)
        assert K[3, 4] == pytest.approx(-d.g_eff.b)
        assert K[5, 0] == pytest.approx(d.g_eff.a)
        assert K[5, 2] == pytest.approx(-d.g_eff.b)
        assert K[4, 5] == omega_m
        assert K[5, 4] == -omega_m
        assert K[5, 5] == -lab_params.mirror.gamma_m

    def test_kernel_is_read_only(self, lab_params):
        """Test the stored kernel cannot be mutated"""
        K = build_drift(derive(lab_params), lab_params)
        with pytest.raises(ValueError):
            K.entries[0, 0] = 1.0

    def test_noise_matrix(self, lab_params):
        """Test N = diag(kA, kA, kB, kB, 0, gamma (2 nbar + 1))"""
        d = derive(lab_params)
        N = build_noise(d, lab_params).entries
        kappa_a, kappa_b = lab_params.cavity_a.kappa, lab_params.cavity_b.kappa
        gamma = lab_params.mirror.gamma_m
        expected = np.diag([kappa_a, kappa_a, kappa_b, kappa_b, 0.0, gamma * (2 * d.nbar + 1)])
        np.testing.assert_allclose(N, expected)


class TestCharacteristicPolynomial:
    """Tests for the Faddeev-LeVerrier coefficients"""

    def test_cayley_hamilton_exact(self, rng):
        """Test p(K) = 0 exactly for integer kernels"""
        for _ in range(20):
            K = _pattern_kernel(rng)
            coeffs = characteristic_polynomial(K)
            assert all(isinstance(c, Fraction) for c in coeffs)

            A = K.astype(object)
            acc = np.zeros((DIM, DIM), dtype=object)
            for c in coeffs:
                acc = acc.dot(A) + c * np.eye(DIM, dtype=int).astype(object)
            assert all(v == 0 for v in acc.ravel())

    def test_trace_and_determinant(self, rng):
        """Test the second coefficient is -tr K and the last is det K"""
        for _ in range(20):
            K = _pattern_kernel(rng)
            coeffs = characteristic_polynomial(K)
            assert coeffs[1] == -int(np.trace(K))
            assert coeffs[-1] == _cofactor_det(K.tolist())

    def test_matches_numpy_poly(self, rng):
        """Test float coefficients agree with numpy's"""
        for _ in range(20):
            K = rng.standard_normal((DIM, DIM))
            np.testing.assert_allclose(characteristic_polynomial(K), np.poly(K), rtol=1e-8, atol=1e-10)

    def test_rejects_non_square(self):
        """Test a rectangular matrix is rejected"""
        with pytest.raises(DegenerateInput):
            characteristic_polynomial(np.zeros((2, 3)))


class TestRouthHurwitz:
    """Tests for the Hurwitz table"""

    def test_hurwitz_matrix_layout(self):
        """Test H[i, j] = a_{2j - i} for a cubic"""
        H = hurwitz_matrix([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(H, [[2.0, 4.0, 0.0], [1.0, 3.0, 0.0], [0.0, 2.0, 4.0]])

    def test_known_polynomials(self):
        """Test (s+1)(s+2)(s+3) is stable and (s-1)(s+2)(s+3) is not"""
        assert routh_hurwitz(np.poly([-1.0, -2.0, -3.0])).stable
        assert not routh_hurwitz(np.poly([1.0, -2.0, -3.0])).stable

    def test_nan_coefficients(self):
        """Test NaN coefficients are rejected"""
        with pytest.raises(DegenerateInput):
            routh_hurwitz([1.0, np.nan, 1.0])

    def test_verdict_agrees_with_eigenvalues(self, rng):
        """Test the two criteria agree away from the stability boundary"""
        seen = {True: 0, False: 0}
        for _ in range(1000):
            K = rng.standard_normal((DIM, DIM)) - rng.uniform(0.0, 4.0) * np.eye(DIM)
            report = stability(K)
            if abs(report.margin) < 0.05:
                continue
            assert report.hurwitz_stable == report.stable
            seen[report.stable] += 1
        assert seen[True] > 50 and seen[False] > 50


class TestStability:
    """Tests for stability at physical and scaled working points"""

    def test_desk_kernel_stable(self, desk_system):
        """Test the scaled kernel is stable with positive C1 and C2"""
        K, _ = desk_system
        report = stability(K)
        assert report.stable
        assert report.margin > 0
        assert report.c1 > 0
        assert report.c2 > 0
        assert report.hurwitz_stable

    def test_laboratory_point_stable(self, lab_params):
        """Test the nominal laboratory working point is stable"""
        report = stability(build_drift(derive(lab_params), lab_params))
        assert report.stable

    def test_eigen_margins_sorted(self, desk_system):
        """Test real parts are reported in descending order"""
        report = stability(desk_system[0])
        assert np.all(np.diff(report.eigen_margins) <= 0)
        assert report.margin == pytest.approx(-report.eigen_margins[0])

    def test_marginal_kernel_unstable(self):
        """Test a kernel with a purely imaginary pair counts as unstable"""
        K = drift_from_rates(kappa=(1.0, 1.0), delta=(0.0, 0.0), g_eff=(0.0, 0.0), omega_m=1.0, gamma_m=1e-300)
        assert not stability(K).stable

    def test_strong_blue_drive_unstable(self, lab_params):
        """Test a strong blue-detuned second cavity destabilizes the mirror"""
        kappa_b = lab_params.cavity_b.kappa
        p_a = lab_params.cavity_a.power
        hot = with_overrides(lab_params, delta_b=-0.44 * kappa_b, p_b=0.9 * p_a)
        mild = with_overrides(lab_params, delta_b=-0.44 * kappa_b, p_b=0.2 * p_a)
        assert not stability(build_drift(derive(hot), hot)).stable
        assert stability(build_drift(derive(mild), mild)).stable


class TestOpticalDamping:
    """Tests for the weak-coupling optical damping rate"""

    def test_sign_follows_detuning(self):
        """Test red detuning cools, blue detuning heats, resonance is neutral"""
        assert optical_damping(0.1, 1.0, 1.0, 1.0) > 0
        assert optical_damping(0.1, 1.0, -1.0, 1.0) < 0
        assert optical_damping(0.1, 1.0, 0.0, 1.0) == 0.0

    def test_laboratory_pump_rate(self, lab_params):
        """Test the pump adds about 1.2e5 rad/s of damping"""
        d = derive(lab_params)
        rate = optical_damping(
            d.g_eff.a,
            lab_params.cavity_a.kappa,
            lab_params.cavity_a.detuning_effective,
            lab_params.mirror.omega_m,
        )
        assert rate == pytest.approx(1.17e5, rel=0.05)

    def test_predicts_stability(self, lab_params):
        """Test the verdict matches the sign of the net damping when it is far from zero"""
        kappa_b = lab_params.cavity_b.kappa
        p_a = lab_params.cavity_a.power
        omega_m = lab_params.mirror.omega_m
        gamma_m = lab_params.mirror.gamma_m
        d0 = derive(lab_params)
        pump = optical_damping(d0.g_eff.a, lab_params.cavity_a.kappa, lab_params.cavity_a.detuning_effective, omega_m)

        checked = 0
        for delta_b in np.linspace(-kappa_b, kappa_b, 11):
            for ratio in np.linspace(0.1, 1.0, 10):
                params = with_overrides(lab_params, delta_b=delta_b, p_b=ratio * p_a)
                d = derive(params)
                net = gamma_m + pump + optical_damping(d.g_eff.b, kappa_b, delta_b, omega_m)
                if abs(net) < 0.2 * pump:
                    continue
                assert stability(build_drift(d, params)).stable == (net > 0)
                checked += 1
        assert checked > 50
