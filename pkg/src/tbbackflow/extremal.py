"""Closed-form extremal flux bounds and the states that reach them.

For a fixed site j' and time t' the flux is a Hermitian quadratic form in
the state. Its angular factor sin((k + k')/2 + xi) has rank two, so the
extremal problem reduces to a 2x2 eigenproblem whose eigenvalues are the
upper and lower bounds lambda_plus and lambda_minus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import WindowTooSmall
from .flux import RingCoeffs, WeightSamples
from .lattice import (
    ChainParams,
    MomentumWindow,
    dispersion,
    mode_energies,
    positive_momentum_window,
)
from .numerics import QuadratureRule, gauss_legendre

SQRT_CLAMP = 1e-12


@dataclass(frozen=True)
class FluxBounds:
    lambda_plus: float
    lambda_minus: float
    params: ChainParams
    window: MomentumWindow


def branch_sign(branch) -> int:
    """Map '+', 'plus', +1 to +1 and '-', 'minus', -1 to -1."""
    if branch in ("+", "plus", "max", 1):
        return 1
    if branch in ("-", "minus", "min", -1):
        return -1
    raise ValueError(f"unknown branch {branch!r}; use 'plus' or 'minus'")


def _clamped_sqrt(x: float) -> float:
    if x < 0:
        if x < -SQRT_CLAMP:
            raise ArithmeticError(f"negative square-root argument {x:.3e}")
        return 0.0
    return math.sqrt(x)


# ------------------------------------------------------------ infinite chain


def infinite_bounds(params: ChainParams) -> FluxBounds:
    """lambda_pm = (2 +- pi) sqrt(1+eps^2) tau / (2 pi hbar), independent of j' and t'."""
    if params.is_ring:
        raise ValueError("infinite_bounds needs an infinite chain")
    scale = params.amplitude * params.tau / (2.0 * math.pi * params.hbar)
    return FluxBounds((2.0 + math.pi) * scale, (2.0 - math.pi) * scale,
                      params, positive_momentum_window(params))


def default_rule(params: ChainParams, n_nodes: int = 200) -> QuadratureRule:
    w = positive_momentum_window(params)
    return gauss_legendre(n_nodes, w.k_lo, w.k_hi)


def infinite_optimal_weight(params: ChainParams, jprime: int, tprime: float, branch,
                            rule: Optional[QuadratureRule] = None) -> WeightSamples:
    """Weight function whose flux at (j', t') equals lambda_plus or lambda_minus.

    phi(k) = exp(-i[(j' - 1/2) k - E_k t'/hbar]) (+-cos((k+xi)/2) + sin((k+xi)/2)) / sqrt(pi +- 2)
    """
    if params.is_ring:
        raise ValueError("infinite_optimal_weight needs an infinite chain")
    sign = branch_sign(branch)
    if rule is None:
        rule = default_rule(params)
    k = rule.nodes
    half = 0.5 * (k + params.xi)
    phase = np.exp(-1j * ((jprime - 0.5) * k - dispersion(params, k) * tprime / params.hbar))
    amp = (sign * np.cos(half) + np.sin(half)) / math.sqrt(math.pi + 2.0 * sign)
    return WeightSamples(params, rule, phase * amp)


# ---------------------------------------------------------------- ring


def _ring_sums(params: ChainParams) -> tuple[int, float, float]:
    """(M, X, Y): window size, cos-weighted and sin-weighted Dirichlet sums.

    X = cos(pi(eta1+eta2)/N + xi) csc(pi/N) sin(pi M/N)
    Y = sin(pi(eta1+eta2)/N + xi) csc(pi/N) sin(pi M/N)
    """
    w = positive_momentum_window(params)
    N = params.n_sites
    m = w.size
    dirichlet = math.sin(math.pi * m / N) / math.sin(math.pi / N)
    centre = math.pi * (w.eta1 + w.eta2) / N + params.xi
    return m, math.cos(centre) * dirichlet, math.sin(centre) * dirichlet


def _require_ring_window(params: ChainParams):
    if not params.is_ring:
        raise ValueError("ring routines need a ring ChainParams")
    w = positive_momentum_window(params)
    if w.size < 2:
        raise WindowTooSmall(
            f"window {w.eta1}..{w.eta2} holds a single state; no backflow is possible")
    return w


def ring_extremal_matrix(params: ChainParams) -> np.ndarray:
    """The 2x2 matrix acting on the (alpha, beta) projections of the optimal state.

    It does not depend on (j', t'): those only enter through phases.
    """
    _require_ring_window(params)
    m, x, y = _ring_sums(params)
    pref = params.tau * params.amplitude / (params.n_sites * params.hbar)
    return pref * np.array([[y, m - x], [m + x, y]])


def ring_bounds(params: ChainParams) -> FluxBounds:
    w = _require_ring_window(params)
    m, x, y = _ring_sums(params)
    pref = params.tau * params.amplitude / (params.n_sites * params.hbar)
    root = _clamped_sqrt(m * m - x * x)
    return FluxBounds(pref * (y + root), pref * (y - root), params, w)


def ring_bounds_unbiased(params: ChainParams) -> FluxBounds:
    """Bounds for eps = 0, where the window sums reduce to cotangents."""
    w = _require_ring_window(params)
    if params.epsilon != 0.0:
        raise ValueError("ring_bounds_unbiased is only valid for epsilon = 0")
    N = params.n_sites
    if N % 2 == 0:
        pref = params.tau / (N * params.hbar)
        mid, root = 1.0 / math.tan(math.pi / N), math.sqrt(N * N / 4.0 - 1.0)
    else:
        pref = params.tau / (2.0 * N * params.hbar)
        mid, root = 1.0 / math.tan(math.pi / (2 * N)), math.sqrt(N * (N + 2.0))
    return FluxBounds(pref * (mid + root), pref * (mid - root), params, w)


def _ring_phase(params: ChainParams, modes, jprime, tprime) -> np.ndarray:
    e = mode_energies(params, modes)
    return np.exp(-1j * ((2 * jprime - 1) * modes * np.pi / params.n_sites
                         - e * tprime / params.hbar))


def ring_optimal_coeffs(params: ChainParams, jprime: int, tprime: float, branch) -> RingCoeffs:
    """Coefficients whose flux at (j', t') equals the requested bound."""
    w = _require_ring_window(params)
    sign = branch_sign(branch)
    n = w.modes
    m, x, y = _ring_sums(params)
    root = _clamped_sqrt(m * m - x * x)
    norm_sq = root * root + sign * y * root
    ang = n * np.pi / params.n_sites + 0.5 * params.xi
    amp = (sign * _clamped_sqrt(m - x) * np.cos(ang)
           + _clamped_sqrt(m + x) * np.sin(ang)) / math.sqrt(norm_sq)
    return RingCoeffs(params, _ring_phase(params, n, jprime, tprime) * amp)


def ring_optimal_coeffs_unbiased(params: ChainParams, jprime: int, tprime: float,
                                 branch) -> RingCoeffs:
    """eps = 0 specialization of ring_optimal_coeffs written with N only."""
    w = _require_ring_window(params)
    if params.epsilon != 0.0:
        raise ValueError("ring_optimal_coeffs_unbiased is only valid for epsilon = 0")
    sign = branch_sign(branch)
    N = params.n_sites
    n = w.modes
    ang = n * np.pi / N
    if N % 2 == 0:
        r = math.sqrt(N * N - 4.0)
        denom = 0.5 * (N * N - 4.0) + sign * r / math.tan(math.pi / N)
        amp = sign * math.sqrt(N - 2.0) * np.cos(ang) + math.sqrt(N + 2.0) * np.sin(ang)
    else:
        r = math.sqrt(N * (N + 2.0))
        denom = 0.5 * (N * (N + 2.0) + sign * r / math.tan(math.pi / (2 * N)))
        amp = sign * math.sqrt(N) * np.cos(ang) + math.sqrt(N + 2.0) * np.sin(ang)
    return RingCoeffs(params, _ring_phase(params, n, jprime, tprime) * amp / math.sqrt(denom))


def bounds(params: ChainParams) -> FluxBounds:
    return ring_bounds(params) if params.is_ring else infinite_bounds(params)


def optimal_state(params: ChainParams, jprime: int, tprime: float, branch,
                  rule: Optional[QuadratureRule] = None):
    if params.is_ring:
        return ring_optimal_coeffs(params, jprime, tprime, branch)
    return infinite_optimal_weight(params, jprime, tprime, branch, rule)
