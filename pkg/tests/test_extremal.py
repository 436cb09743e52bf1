import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tbbackflow import extremal, flux
from tbbackflow.errors import WindowTooSmall
from tbbackflow.lattice import ChainParams, positive_momentum_window
from tbbackflow.numerics import gauss_legendre

EPS = [0.0, 0.5, 1.0]
RINGS = range(4, 31)


class TestInfinite:
    def test_unbiased_values(self):
        b = extremal.infinite_bounds(ChainParams())
        assert b.lambda_plus == pytest.approx((2 + math.pi) / (2 * math.pi), abs=1e-15)
        assert b.lambda_minus == pytest.approx((2 - math.pi) / (2 * math.pi), abs=1e-15)
        assert b.lambda_plus == pytest.approx(0.8183098861837907, abs=1e-15)

    @given(st.floats(-20, 20))
    def test_bias_scaling(self, eps):
        b0 = extremal.infinite_bounds(ChainParams())
        b = extremal.infinite_bounds(ChainParams(eps))
        assert b.lambda_plus / b0.lambda_plus == pytest.approx(math.hypot(1, eps), rel=1e-15)
        assert b.lambda_minus / b0.lambda_minus == pytest.approx(math.hypot(1, eps), rel=1e-15)

    def test_eps1_minus(self):
        assert extremal.infinite_bounds(ChainParams(1.0)).lambda_minus == pytest.approx(
            -0.18169011381620928 * math.sqrt(2), abs=1e-15)

    @pytest.mark.parametrize("eps", EPS)
    @pytest.mark.parametrize("branch", ["plus", "minus"])
    def test_weight_norm_and_attainment(self, eps, branch):
        p = ChainParams(eps, tau=1.3, hbar=0.7)
        b = extremal.infinite_bounds(p)
        lam = b.lambda_plus if branch == "plus" else b.lambda_minus
        st_ = extremal.infinite_optimal_weight(p, 3, 3.0, branch)
        assert abs(st_.norm_sq() - 1) <= 1e-10
        assert abs(flux.general_flux_infinite(st_, 3, 3.0) - lam) <= 1e-8

    @pytest.mark.parametrize("eps", EPS)
    @pytest.mark.parametrize("branch", ["plus", "minus"])
    def test_kernel_eigen_relation(self, eps, branch):
        p = ChainParams(eps)
        b = extremal.infinite_bounds(p)
        lam = b.lambda_plus if branch == "plus" else b.lambda_minus
        st_ = extremal.infinite_optimal_weight(p, 2, 1.5, branch)
        k = st_.nodes
        kern = flux.infinite_flux_kernel(p, 2, 1.5, k[:, None], k[None, :])
        pref = p.tau * p.amplitude / (math.pi * p.hbar)
        action = pref * (st_.weights * st_.phi) @ kern
        assert np.max(np.abs(action - lam * st_.phi)) <= 1e-8

    def test_trace_extremum_at_target(self):
        p = ChainParams(1.0)
        st_ = extremal.infinite_optimal_weight(p, 3, 3.0, "minus")
        ts = np.linspace(0, 6, 241)
        vals = np.array([flux.general_flux_infinite(st_, j, ts) for j in range(-2, 9)])
        j_i, t_i = np.unravel_index(np.argmin(vals), vals.shape)
        assert (j_i - 2, ts[t_i]) == (3, pytest.approx(3.0))


class TestRing:
    def test_n4(self):
        b = extremal.ring_bounds(ChainParams(0.0, n_sites=4))
        assert b.lambda_plus == pytest.approx(0.25 * (1 + math.sqrt(3)), abs=1e-15)
        assert b.lambda_minus == pytest.approx(-0.18301270189221933, abs=1e-15)

    def test_n9(self):
        b = extremal.ring_bounds(ChainParams(0.0, n_sites=9))
        cot = 1 / math.tan(math.pi / 18)
        assert b.lambda_plus == pytest.approx((cot + math.sqrt(99)) / 18, abs=1e-15)
        assert b.lambda_minus == pytest.approx((cot - math.sqrt(99)) / 18, abs=1e-15)

    def test_large_ring_tends_to_infinite(self):
        r = extremal.ring_bounds(ChainParams(0.0, n_sites=200))
        i = extremal.infinite_bounds(ChainParams(0.0))
        assert abs(r.lambda_plus / i.lambda_plus - 1) <= 0.02
        assert abs(r.lambda_minus / i.lambda_minus - 1) <= 0.02

    @pytest.mark.parametrize("n", range(3, 41))
    def test_unbiased_closed_form(self, n):
        p = ChainParams(0.0, n_sites=n)
        a, b = extremal.ring_bounds(p), extremal.ring_bounds_unbiased(p)
        assert a.lambda_plus == pytest.approx(b.lambda_plus, abs=1e-12)
        assert a.lambda_minus == pytest.approx(b.lambda_minus, abs=1e-12)
        assert a.lambda_minus < 0 < a.lambda_plus

    def test_extremal_matrix_n9(self):
        a = extremal.ring_extremal_matrix(ChainParams(0.0, n_sites=9))
        ref = math.sin(5 * math.pi / 9) * math.sin(4 * math.pi / 9) / (9 * math.sin(math.pi / 9))
        assert a[0, 0] == pytest.approx(ref, abs=1e-15)

    @pytest.mark.parametrize("eps", EPS)
    @pytest.mark.parametrize("n", [4, 5, 9, 17, 30])
    def test_extremal_matrix_eigenvalues(self, eps, n):
        p = ChainParams(eps, n_sites=n)
        a = extremal.ring_extremal_matrix(p)
        assert a[0, 1] * a[1, 0] >= 0
        lam = np.linalg.eigvals(a)
        assert np.max(np.abs(lam.imag)) == 0
        b = extremal.ring_bounds(p)
        assert np.sort(lam.real) == pytest.approx([b.lambda_minus, b.lambda_plus], abs=1e-12)

    @pytest.mark.parametrize("eps", EPS)
    def test_optimal_coeffs(self, eps):
        for n in RINGS:
            p = ChainParams(eps, tau=0.8, hbar=1.3, n_sites=n)
            b = extremal.ring_bounds(p)
            h = flux.ring_flux_matrix(p, 3, 3.0)
            for branch, lam in (("plus", b.lambda_plus), ("minus", b.lambda_minus)):
                st_ = extremal.ring_optimal_coeffs(p, 3, 3.0, branch)
                assert abs(st_.norm_sq() - 1) <= 1e-10
                assert abs(flux.general_flux_ring(st_, 3, 3.0) - lam) <= 1e-10
                assert np.linalg.norm(h @ st_.coeffs - lam * st_.coeffs) <= 1e-10

    @pytest.mark.parametrize("n", range(4, 31))
    def test_unbiased_coeffs_elementwise(self, n):
        p = ChainParams(0.0, n_sites=n)
        for branch in ("plus", "minus"):
            a = extremal.ring_optimal_coeffs(p, 2, 0.7, branch).coeffs
            b = extremal.ring_optimal_coeffs_unbiased(p, 2, 0.7, branch).coeffs
            assert np.max(np.abs(a - b)) <= 1e-12

    @given(st.integers(-20, 20), st.floats(-10, 10), st.sampled_from(["plus", "minus"]))
    def test_translation_covariance(self, jp, tp, branch):
        p = ChainParams(0.5, n_sites=11)
        a = extremal.ring_optimal_coeffs(p, 3, 3.0, branch).coeffs
        b = extremal.ring_optimal_coeffs(p, jp, tp, branch).coeffs
        assert np.allclose(np.abs(a), np.abs(b), atol=1e-14)

    def test_trace_extremum_at_target(self):
        p = ChainParams(1.0, n_sites=9)
        st_ = extremal.ring_optimal_coeffs(p, 3, 3.0, "minus")
        ts = np.linspace(0, 6, 241)
        vals = np.array([flux.general_flux_ring(st_, j, ts) for j in range(9)])
        j_i, t_i = np.unravel_index(np.argmin(vals), vals.shape)
        assert (j_i, ts[t_i]) == (3, pytest.approx(3.0))
        assert vals.min() == pytest.approx(extremal.ring_bounds(p).lambda_minus, abs=1e-12)

    @pytest.mark.parametrize("n", range(4, 13))
    def test_random_states_within_bounds(self, n):
        rng = np.random.default_rng(0xB0F107 + n)
        for eps in EPS:
            p = ChainParams(eps, n_sites=n)
            b = extremal.ring_bounds(p)
            m = positive_momentum_window(p).size
            c = rng.normal(size=(2000, m)) + 1j * rng.normal(size=(2000, m))
            c /= np.linalg.norm(c, axis=1, keepdims=True)
            for j, t in ((0, 0.0), (3, 3.0), (-4, 11.2)):
                v = np.einsum("sm,mn,sn->s", c.conj(), flux.ring_flux_matrix(p, j, t), c).real
                assert v.max() <= b.lambda_plus + 1e-9
                assert v.min() >= b.lambda_minus - 1e-9

    def test_single_state_window(self):
        p = ChainParams(math.tan(1.5), n_sites=3)
        assert positive_momentum_window(p).size == 1
        with pytest.raises(WindowTooSmall):
            extremal.ring_bounds(p)

    def test_unbiased_forms_reject_bias(self):
        with pytest.raises(ValueError):
            extremal.ring_bounds_unbiased(ChainParams(0.1, n_sites=5))

    def test_bad_branch(self):
        with pytest.raises(ValueError):
            extremal.branch_sign("up")

    def test_dispatch(self):
        assert isinstance(extremal.optimal_state(ChainParams(n_sites=5), 0, 0, "+"), flux.RingCoeffs)
        rule = gauss_legendre(50, 0, math.pi)
        assert isinstance(extremal.optimal_state(ChainParams(), 0, 0, "-", rule), flux.WeightSamples)
