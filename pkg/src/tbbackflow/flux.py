"""Probability flux on the chain, continuity checks and two-state backflow."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NormViolation, SameModeError
from .lattice import (
    ChainParams,
    ContinuousWindow,
    DiscreteWindow,
    dispersion,
    mode_energies,
    positive_momentum_window,
)
from .numerics import QuadratureRule

NORM_TOL = 1e-8
REALITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RingCoeffs:
    """Positive-momentum ring state: coefficients c_n for n = eta1..eta2."""

    params: ChainParams
    coeffs: np.ndarray

    def __post_init__(self):
        if not self.params.is_ring:
            raise ValueError("RingCoeffs needs a ring ChainParams")
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.window.size,):
            raise ValueError(f"expected {self.window.size} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def window(self) -> DiscreteWindow:
        return positive_momentum_window(self.params)

    @property
    def modes(self) -> np.ndarray:
        return self.window.modes

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


@dataclass(frozen=True, eq=False)
class WeightSamples:
    """Infinite-chain weight function phi(k) sampled on a quadrature rule over the window."""

    params: ChainParams
    rule: QuadratureRule
    phi: np.ndarray

    def __post_init__(self):
        if self.params.is_ring:
            raise ValueError("WeightSamples needs an infinite-chain ChainParams")
        phi = np.asarray(self.phi, dtype=complex)
        if phi.shape != self.rule.nodes.shape:
            raise ValueError("phi must be sampled at every quadrature node")
        object.__setattr__(self, "phi", phi)

    @property
    def window(self) -> ContinuousWindow:
        return positive_momentum_window(self.params)

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.rule.weights

    def norm_sq(self) -> float:
        return float(np.dot(self.weights, np.abs(self.phi) ** 2))


PositiveMomentumState = RingCoeffs | WeightSamples


def _require_unit(state) -> None:
    err = abs(state.norm_sq() - 1.0)
    if err > NORM_TOL:
        raise NormViolation(f"state norm deviates from 1 by {err:.3e}")


def _real(z, scale: float = 1.0):
    z = np.asarray(z)
    if np.iscomplexobj(z):
        im = np.max(np.abs(z.imag)) if z.size else 0.0
        if im > REALITY_TOL * max(1.0, scale):
            raise ArithmeticError(f"flux has imaginary part {im:.3e}")
        z = z.real
    return z if z.ndim else float(z)


@dataclass(frozen=True, eq=False)
class FluxSeries:
    site: int
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("flux series times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


def site_flux(psi_left, psi_here, params: ChainParams):
    """Flux from site j-1 to site j given the amplitudes on both sites.

    J = (tau/hbar) [ -i (a* b - a b*) + eps (a* b + a b*) ], a = psi_{j-1}, b = psi_j.
    Accepts arrays; the result is real.
    """
    x = np.conj(psi_left) * np.asarray(psi_here)
    return params.tau / params.hbar * 2.0 * (x.imag + params.epsilon * x.real)


# ---------------------------------------------------------------- ring states


def ring_wavefunction(state: RingCoeffs, j, t=0.0):
    """Psi(j, t) = N^{-1/2} sum_n c_n exp(i (2 pi n j / N - E_n t / hbar))."""
    p = state.params
    n = state.modes
    e = mode_energies(p, n)
    j = np.asarray(j, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    ph = np.exp(1j * (2.0 * np.pi * n * j / p.n_sites - e * t / p.hbar))
    return ph @ state.coeffs / math.sqrt(p.n_sites)


def ring_wavefunction_rate(state: RingCoeffs, j, t=0.0):
    """Exact time derivative of ring_wavefunction from the eigenbasis expansion."""
    p = state.params
    n = state.modes
    e = mode_energies(p, n)
    j = np.asarray(j, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    ph = np.exp(1j * (2.0 * np.pi * n * j / p.n_sites - e * t / p.hbar))
    return ph @ (state.coeffs * (-1j * e / p.hbar)) / math.sqrt(p.n_sites)


def continuity_residual(state: RingCoeffs, j: int, t: float) -> float:
    """|d|Psi(j,t)|^2/dt + J(j+1,t) - J(j,t)| with the derivative taken analytically."""
    p = state.params
    psi = ring_wavefunction(state, [j - 1, j, j + 1], t)
    dpsi = ring_wavefunction_rate(state, j, t)
    rate = 2.0 * (np.conj(psi[1]) * dpsi).real
    j_in = site_flux(psi[0], psi[1], p)
    j_out = site_flux(psi[1], psi[2], p)
    return float(abs(rate + j_out - j_in))


def ring_flux_matrix(params: ChainParams, j, t) -> np.ndarray:
    """Hermitian kernel H with J(j, t) = c^dagger H c over the window modes.

    H_mn = (2 tau sqrt(1+eps^2) / (N hbar))
           exp(i[(2j-1)(n-m) pi/N + (E_m - E_n) t/hbar]) sin((m+n) pi/N + xi)
    """
    w = positive_momentum_window(params)
    n = w.modes
    N = params.n_sites
    e = mode_energies(params, n)
    # u_n = exp(i[(2j-1) n pi/N - E_n t/hbar]); H = conj(u_m) u_n S_mn
    u = np.exp(1j * ((2 * j - 1) * n * np.pi / N - e * t / params.hbar))
    s = np.sin((n[:, None] + n[None, :]) * np.pi / N + params.xi)
    pref = 2.0 * params.tau * params.amplitude / (N * params.hbar)
    return pref * np.conj(u)[:, None] * u[None, :] * s


def general_flux_ring(state: RingCoeffs, j, t):
    """J(j, t) of a unit-norm ring state as the explicit double sum over modes.

    ``t`` may be an array; the result then has its shape.
    """
    _require_unit(state)
    p = state.params
    n = state.modes
    N = p.n_sites
    e = mode_energies(p, n)
    t_arr = np.asarray(t, dtype=float)
    d = state.coeffs * np.exp(
        1j * ((2 * j - 1) * n * np.pi / N - np.multiply.outer(t_arr, e) / p.hbar))
    s = np.sin((n[:, None] + n[None, :]) * np.pi / N + p.xi)
    pref = 2.0 * p.tau * p.amplitude / (N * p.hbar)
    val = pref * np.einsum("...m,mn,...n->...", np.conj(d), s, d)
    return _real(val, pref)


def plane_wave_flux(params: ChainParams, k):
    """Flux of exp(ikj)/sqrt(N) on a ring: 2 tau sqrt(1+eps^2) sin(k+xi) / (N hbar)."""
    return (2.0 * params.tau * params.amplitude / (params.n_sites * params.hbar)
            * np.sin(np.asarray(k) + params.xi))


# ------------------------------------------------------------ infinite chain


def infinite_wavefunction(state: WeightSamples, j, t=0.0):
    """psi(j, t) = (2 pi)^{-1/2} int exp(i(k j - E_k t / hbar)) phi(k) dk, by quadrature."""
    p = state.params
    k = state.nodes
    e = dispersion(p, k)
    j = np.asarray(j, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    ph = np.exp(1j * (k * j - e * t / p.hbar))
    return ph @ (state.weights * state.phi) / math.sqrt(2.0 * math.pi)


def infinite_flux_kernel(params: ChainParams, j, t, k, kp):
    """Integrand weight of the flux functional, J = pref * int int phi*(k') phi(k) K(k, k').

    K(k, k') = exp(i[(j - 1/2)(k - k') + (E_k' - E_k) t / hbar]) sin((k + k')/2 + xi)
    """
    k = np.asarray(k, dtype=float)
    kp = np.asarray(kp, dtype=float)
    phase = (j - 0.5) * (k - kp) + (dispersion(params, kp) - dispersion(params, k)) * t / params.hbar
    return np.exp(1j * phase) * np.sin(0.5 * (k + kp) + params.xi)


def general_flux_infinite(state: WeightSamples, j, t):
    """J(j, t) of a unit-norm weight function, integrated with the attached quadrature rule.

    The sine factor splits as sin(a)cos(b) + cos(a)sin(b) with a, b the
    half-angles (k + xi)/2, (k' + xi)/2, so the double sum collapses to two
    single sums per time.
    """
    _require_unit(state)
    p = state.params
    k = state.nodes
    e = dispersion(p, k)
    t_arr = np.asarray(t, dtype=float)
    g = state.weights * state.phi * np.exp(
        1j * ((j - 0.5) * k - np.multiply.outer(t_arr, e) / p.hbar))
    half = 0.5 * (k + p.xi)
    gs = g @ np.sin(half)
    gc = g @ np.cos(half)
    pref = p.tau * p.amplitude / (math.pi * p.hbar)
    val = pref * (np.conj(gc) * gs + np.conj(gs) * gc)
    return _real(val, pref)


def general_flux(state, j, t):
    if isinstance(state, RingCoeffs):
        return general_flux_ring(state, j, t)
    return general_flux_infinite(state, j, t)


def flux_series(state, site: int, times) -> FluxSeries:
    times = np.asarray(times, dtype=float)
    return FluxSeries(site, times, np.atleast_1d(general_flux(state, site, times)))


# ---------------------------------------------------------------- two states


def _check_pair(params: ChainParams, m1: int, m2: int) -> None:
    if not params.is_ring:
        raise ValueError("two-state analysis is defined on a ring")
    if m1 == m2:
        raise SameModeError(f"modes must differ, got m1 = m2 = {m1}")
    w = positive_momentum_window(params)
    for m in (m1, m2):
        if not w.eta1 <= m <= w.eta2:
            raise ValueError(f"mode {m} outside positive-momentum window {w.eta1}..{w.eta2}")


def two_state_coefficients(params: ChainParams, m1: int, m2: int) -> tuple[float, float, float]:
    """(a, b, c) with J_min(theta) proportional to a + b cos(theta) - c sin(theta)."""
    N = params.n_sites
    diff = (m1 - m2) * math.pi / N
    tot = (m1 + m2) * math.pi / N + params.xi
    return (math.cos(diff) * math.sin(tot),
            math.sin(diff) * math.cos(tot),
            math.sin(tot))


def two_state_state(params: ChainParams, m1: int, m2: int, theta: float, gamma: float) -> RingCoeffs:
    """cos(theta/2)|m1> + exp(i gamma) sin(theta/2)|m2> as ring coefficients."""
    _check_pair(params, m1, m2)
    w = positive_momentum_window(params)
    c = np.zeros(w.size, dtype=complex)
    c[m1 - w.eta1] = math.cos(theta / 2)
    c[m2 - w.eta1] = math.sin(theta / 2) * np.exp(1j * gamma)
    return RingCoeffs(params, c)


def two_state_flux(params: ChainParams, m1: int, m2: int, theta, gamma, j, t):
    """Closed-form flux of the two-mode superposition at site j and time t."""
    _check_pair(params, m1, m2)
    N = params.n_sites
    a, b, c = two_state_coefficients(params, m1, m2)
    e1, e2 = mode_energies(params, [m1, m2])
    arg = ((2 * np.asarray(j) - 1) * (m1 - m2) * np.pi / N
           - (e1 - e2) * np.asarray(t) / params.hbar - gamma)
    pref = 2.0 * params.tau * params.amplitude / (N * params.hbar)
    return pref * (a + np.cos(theta) * b + np.cos(arg) * c * np.sin(theta))


@dataclass(frozen=True)
class TwoStateMin:
    j_min: float
    theta_star: float


def two_state_min(params: ChainParams, m1: int, m2: int) -> TwoStateMin:
    """Lowest flux reachable by mixing modes m1 and m2, over mixing angle, phase and time."""
    _check_pair(params, m1, m2)
    a, b, c = two_state_coefficients(params, m1, m2)
    pref = 2.0 * params.tau * params.amplitude / (params.n_sites * params.hbar)

    # tan(theta) = -c/b has one root mod pi; test it (and its pi-shift) on [0, pi]
    root = math.atan2(-c, b) % math.pi
    cands = [root] + ([root + math.pi] if root + math.pi <= math.pi else [])
    best = min(cands, key=lambda th: a + b * math.cos(th) - c * math.sin(th))
    return TwoStateMin(pref * (a - math.hypot(b, c)), best)
