import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tbbackflow.errors import NonPositiveData, NotSymmetric
from tbbackflow.numerics import (
    gauss_legendre,
    golden_section_max,
    largest_eigenpair,
    powerlaw_fit,
    symmetric_eigen,
)


class TestGaussLegendre:
    def test_sin_integral(self):
        assert abs(gauss_legendre(20, 0.0, math.pi).integrate(np.sin) - 2.0) <= 1e-14

    def test_degree_exactness_x4(self):
        assert gauss_legendre(3).integrate(lambda x: x ** 4) == pytest.approx(0.4, abs=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 5, 17, 64, 400])
    def test_symmetry_and_weight_sum(self, n):
        r = gauss_legendre(n, -0.3, 2.9)
        mid = 0.5 * (-0.3 + 2.9)
        assert np.max(np.abs((r.nodes - mid) + (r.nodes[::-1] - mid))) <= 1e-14
        assert abs(r.weights.sum() - 3.2) <= 1e-12
        assert np.all(np.diff(r.nodes) > 0) and np.all(r.weights > 0)

    @pytest.mark.parametrize("n", [1, 4, 9, 30, 200])
    def test_matches_reference_rule(self, n):
        x, w = np.polynomial.legendre.leggauss(n)
        r = gauss_legendre(n)
        assert np.allclose(r.nodes, x, atol=1e-13, rtol=0)
        assert np.allclose(r.weights, w, atol=1e-13, rtol=0)

    @given(st.integers(1, 12), st.integers(0, 23))
    def test_polynomial_exactness(self, n, deg):
        if deg > 2 * n - 1:
            return
        exact = (1.0 - (-1.0) ** (deg + 1)) / (deg + 1)
        assert gauss_legendre(n).integrate(lambda x: x ** deg) == pytest.approx(exact, abs=1e-13)

    @pytest.mark.parametrize("args", [(0,), (3, 1.0, 1.0), (3, 2.0, 1.0)])
    def test_bad_input(self, args):
        with pytest.raises(ValueError):
            gauss_legendre(*args)


class TestSymmetricEigen:
    def test_swap_matrix(self):
        res = symmetric_eigen(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(res.eigenvalues, [-1.0, 1.0], atol=1e-15)

    def test_diagonal_sorted(self):
        d = np.array([3.0, -1.0, 2.5, 0.0])
        assert np.array_equal(symmetric_eigen(np.diag(d)).eigenvalues, np.sort(d))

    def test_reconstruction_50(self):
        rng = np.random.default_rng(0xB0F107)
        a = rng.normal(size=(50, 50))
        a = 0.5 * (a + a.T)
        res = symmetric_eigen(a)
        v, lam = res.eigenvectors, res.eigenvalues
        assert np.max(np.abs(v @ np.diag(lam) @ v.T - a)) <= 1e-10
        assert np.max(np.abs(v.T @ v - np.eye(50))) <= 1e-10
        assert res.residual <= 1e-10 * np.linalg.norm(a, 2)

    def test_largest_pair(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(30, 30))
        a = a + a.T
        lam, v, res = largest_eigenpair(a)
        assert lam == pytest.approx(np.linalg.eigvalsh(a)[-1], abs=1e-12)
        assert np.linalg.norm(a @ v - lam * v) <= 1e-10 * np.linalg.norm(a, 2)

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            symmetric_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_not_square(self):
        with pytest.raises(ValueError):
            symmetric_eigen(np.zeros((2, 3)))


class TestGolden:
    def test_parabola(self):
        assert abs(golden_section_max(lambda x: -(x - 2) ** 2, 0, 5).x_star - 2) <= 1e-8

    def test_sine(self):
        g = golden_section_max(math.sin, 0, math.pi)
        assert abs(g.x_star - math.pi / 2) <= 1e-8
        assert g.f_star == pytest.approx(1.0, abs=1e-15)

    def test_monotone_goes_to_endpoint(self):
        g = golden_section_max(lambda x: x, 0.0, 1.0)
        assert g.x_star == pytest.approx(1.0, abs=1e-8)

    def test_deterministic(self):
        f = lambda x: math.cos(3 * x) * math.exp(-x)  # noqa: E731
        assert golden_section_max(f, 0, 1.5) == golden_section_max(f, 0, 1.5)

    @pytest.mark.parametrize("args", [(1.0, 0.0, 1e-8), (0.0, 1.0, 0.0)])
    def test_bad_input(self, args):
        with pytest.raises(ValueError):
            golden_section_max(math.sin, *args)


class TestPowerLaw:
    def test_exact_square(self):
        xs = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
        fit = powerlaw_fit(xs, 3 * xs ** 2)
        assert fit.exponent == pytest.approx(2.0, abs=1e-12)
        assert fit.prefactor == pytest.approx(3.0, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_noisy_synthetic(self):
        rng = np.random.default_rng(0xB0F107)
        xs = np.geomspace(8, 128, 9)
        ys = 5 * xs ** -1.7 * (1 + 1e-6 * rng.normal(size=xs.size))
        assert abs(powerlaw_fit(xs, ys).exponent + 1.7) <= 1e-3

    def test_constant(self):
        assert powerlaw_fit([1, 2, 3, 4], [7, 7, 7, 7]).exponent == pytest.approx(0.0, abs=1e-12)

    def test_non_positive(self):
        with pytest.raises(NonPositiveData):
            powerlaw_fit([1, 2, 3], [1, -1, 2])

    def test_too_short(self):
        with pytest.raises(ValueError):
            powerlaw_fit([1, 2], [1, 2])
