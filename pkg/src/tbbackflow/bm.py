"""Maximal integrated backflow over a time window (Bracken-Melloy problem).

The quantity maximized is -int_{-T/2}^{T/2} J(0, t) dt over unit-norm
positive-momentum states, with nu = tau T / hbar. It is a quadratic form in
the state, so its supremum lambda_p is the top eigenvalue of a symmetric
kernel: a Nystrom-discretized integral operator on the infinite chain, a
finite matrix on the ring.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NoInteriorMax
from .flux import FluxSeries, RingCoeffs, WeightSamples, general_flux
from .lattice import ChainParams, positive_momentum_window
from .numerics import (
    QuadratureRule,
    gauss_legendre,
    golden_section_max,
    largest_eigenpair,
    powerlaw_fit,
)

C_BM = 0.0384517
C_CONT_RING = 0.11681564947322964
INFINITE_PEAK = 0.0764734
RING_N5_PEAK = 0.131349787116051

DEFAULT_NODES = 400
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class BMProblem:
    params: ChainParams
    nu: float
    nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.params.is_ring and self.nodes < 8:
            raise ValueError(f"need at least 8 quadrature nodes, got {self.nodes}")

    @property
    def window_time(self) -> float:
        """Physical window length T = nu hbar / tau."""
        return self.nu * self.params.hbar / self.params.tau


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Top eigenpair of a backflow kernel, with the eigenvector as a physical state."""

    eigenvalue: float
    state: RingCoeffs | WeightSamples
    residual: float
    problem: BMProblem


@dataclass(frozen=True)
class BMCurve:
    nus: np.ndarray
    lambdas: np.ndarray
    epsilon: float
    n_sites: Optional[int]
    nodes: Optional[int]

    def __post_init__(self):
        if np.any(np.diff(self.nus) <= 0):
            raise ValueError("nu values must be strictly increasing")
        if not np.all(np.isfinite(self.lambdas)):
            raise ValueError("lambda_p values must be finite")


# ------------------------------------------------------------ kernels


def kernel_infinite(params: ChainParams, nu: float, k, kp):
    """K(k,k') = -sin(2 nu A sin((k+k')/2 + xi) sin((k-k')/2)) / (2 sin((k-k')/2)).

    A = sqrt(1+eps^2). The removable singularity on k = k' is replaced by its
    limit -nu A sin(k + xi); the ratio is never formed there.
    """
    k, kp = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(kp, dtype=float))
    amp = params.amplitude
    s = np.sin(0.5 * (k + kp) + params.xi)
    d = np.sin(0.5 * (k - kp))
    diag = d == 0.0
    safe = np.where(diag, 1.0, d)
    out = -np.sin(2.0 * nu * amp * s * d) / (2.0 * safe)
    out = np.where(diag, -nu * amp * s, out)
    return out if out.ndim else float(out)


def kernel_ring(params: ChainParams, nu: float, m, n):
    """Ring kernel K_mn; the m = n entry is -2 nu A sin(2 n pi/N + xi) / N."""
    m, n = np.broadcast_arrays(np.asarray(m), np.asarray(n))
    N = params.n_sites
    amp = params.amplitude
    s = np.sin((m + n) * np.pi / N + params.xi)
    d = np.sin((m - n) * np.pi / N)
    diag = m == n
    safe = np.where(diag, 1.0, d)
    out = -np.sin(2.0 * nu * amp * s * d) / (N * safe)
    out = np.where(diag, -2.0 * nu * amp * np.sin(2.0 * n * np.pi / N + params.xi) / N, out)
    return out if out.ndim else float(out)


def nystrom_matrix(params: ChainParams, nu: float, rule: QuadratureRule) -> np.ndarray:
    """Symmetrized Nystrom matrix (1/pi) sqrt(w_i w_j) K(k_i, k_j)."""
    k = rule.nodes
    sw = np.sqrt(rule.weights)
    mat = kernel_infinite(params, nu, k[:, None], k[None, :]) * np.outer(sw, sw) / math.pi
    return 0.5 * (mat + mat.T)


def ring_matrix(params: ChainParams, nu: float) -> np.ndarray:
    n = positive_momentum_window(params).modes
    mat = kernel_ring(params, nu, n[:, None], n[None, :])
    return 0.5 * (mat + mat.T)


def bm_rule(params: ChainParams, nodes: int = DEFAULT_NODES) -> QuadratureRule:
    w = positive_momentum_window(params)
    return gauss_legendre(nodes, w.k_lo, w.k_hi)


# ------------------------------------------------------------ eigenproblems


def lambda_p_infinite(params: ChainParams, nu: float, nodes: int = DEFAULT_NODES,
                      rule: Optional[QuadratureRule] = None) -> EigenSolution:
    """Largest integrated backflow on the infinite chain and its optimal weight function."""
    if params.is_ring:
        raise ValueError("lambda_p_infinite needs an infinite chain")
    problem = BMProblem(params, nu, nodes if rule is None else len(rule))
    rule = rule or bm_rule(params, nodes)
    lam, v, res = largest_eigenpair(nystrom_matrix(params, nu, rule))
    # v_i = sqrt(w_i) Phi(k_i), Phi(k) = exp(-ik/2) phi(k)
    big = np.argmax(np.abs(v))
    v = v * np.sign(v[big])
    phi = np.exp(0.5j * rule.nodes) * v / np.sqrt(rule.weights)
    return EigenSolution(lam, WeightSamples(params, rule, phi), res, problem)


def lambda_p_ring(params: ChainParams, nu: float) -> EigenSolution:
    """Largest integrated backflow on the ring and its optimal coefficients c_n."""
    if not params.is_ring:
        raise ValueError("lambda_p_ring needs a ring")
    problem = BMProblem(params, nu)
    n = positive_momentum_window(params).modes
    lam, v, res = largest_eigenpair(ring_matrix(params, nu))
    big = np.argmax(np.abs(v))
    v = v * np.sign(v[big])
    # C_n = exp(-i n pi / N) c_n
    c = np.exp(1j * n * np.pi / params.n_sites) * v
    return EigenSolution(lam, RingCoeffs(params, c), res, problem)


def lambda_p(params: ChainParams, nu: float, nodes: int = DEFAULT_NODES) -> float:
    if params.is_ring:
        return lambda_p_ring(params, nu).eigenvalue
    return lambda_p_infinite(params, nu, nodes).eigenvalue


# ------------------------------------------------------------ nu scans


def _map(f, xs, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(f, xs))
    return [f(x) for x in xs]


@dataclass(frozen=True, eq=False)
class NuPeak:
    nu_star: float
    lambda_star: float
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)


def maximize_over_nu(f: Callable[[float], float], nu_lo: float, nu_hi: float,
                     coarse_steps: int = 200, refine_tol: float = 1e-6,
                     spacing: str = "log", threads: int = 1) -> NuPeak:
    """Coarse scan of f over [nu_lo, nu_hi], then golden-section refinement.

    The refinement bracket is the pair of grid neighbours of the best grid
    point. Raises NoInteriorMax if that point is on the range edge.
    """
    if coarse_steps < 16:
        raise ValueError(f"coarse_steps must be >= 16, got {coarse_steps}")
    if not nu_lo < nu_hi:
        raise ValueError(f"empty nu range [{nu_lo}, {nu_hi}]")
    if spacing == "log":
        if nu_lo <= 0:
            raise ValueError("log spacing needs nu_lo > 0")
        grid = np.geomspace(nu_lo, nu_hi, coarse_steps)
    elif spacing == "linear":
        grid = np.linspace(nu_lo, nu_hi, coarse_steps)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    values = np.array(_map(f, grid, threads), dtype=float)
    i = int(np.argmax(values))
    if i == 0 or i == len(grid) - 1:
        raise NoInteriorMax(
            f"best coarse point nu = {grid[i]:.6g} is on the edge of [{nu_lo}, {nu_hi}]")
    g = golden_section_max(f, grid[i - 1], grid[i + 1], refine_tol)
    if g.f_star >= values[i]:
        return NuPeak(g.x_star, g.f_star, grid, values)
    return NuPeak(float(grid[i]), float(values[i]), grid, values)


def default_nu_range(params: ChainParams) -> tuple[float, float]:
    if params.is_ring:
        return 0.1, 10.0 * params.n_sites ** 2 / math.pi ** 2
    return 0.1, 200.0


def bm_peak(params: ChainParams, nodes: int = DEFAULT_NODES,
            nu_range: Optional[tuple[float, float]] = None, coarse_steps: int = 200,
            refine_tol: float = 1e-6, threads: int = 1) -> NuPeak:
    """max over nu of lambda_p with the default scan for the chain type."""
    lo, hi = nu_range or default_nu_range(params)
    if params.is_ring:
        mat_fn = lambda nu: lambda_p_ring(params, nu).eigenvalue  # noqa: E731
    else:
        rule = bm_rule(params, nodes)
        mat_fn = lambda nu: lambda_p_infinite(params, nu, rule=rule).eigenvalue  # noqa: E731
    return maximize_over_nu(mat_fn, lo, hi, coarse_steps, refine_tol, threads=threads)


def bm_curve(params: ChainParams, nus: Sequence[float], nodes: int = DEFAULT_NODES,
             threads: int = 1) -> BMCurve:
    nus = np.asarray(nus, dtype=float)
    if params.is_ring:
        vals = _map(lambda nu: lambda_p_ring(params, nu).eigenvalue, nus, threads)
        return BMCurve(nus, np.array(vals), params.epsilon, params.n_sites, None)
    rule = bm_rule(params, nodes)
    vals = _map(lambda nu: lambda_p_infinite(params, nu, rule=rule).eigenvalue, nus, threads)
    return BMCurve(nus, np.array(vals), params.epsilon, None, nodes)


# ------------------------------------------------------------ scaling with N


@dataclass(frozen=True)
class ScalingRow:
    n: int
    c_tb: float
    nu_star: float


@dataclass(frozen=True)
class ScalingStudy:
    exponent_gap: float
    exponent_nu: float
    table: list[ScalingRow]


DEFAULT_SCALING_NS = (8, 12, 16, 24, 32, 48, 64, 96, 128)


def ring_scaling_study(n_list: Sequence[int] = DEFAULT_SCALING_NS, epsilon: float = 0.0,
                       c_cont: float = C_CONT_RING, threads: int = 1) -> ScalingStudy:
    """Peak backflow c_tb(N) and its location nu*(N), with log-log fits of
    c_tb - c_cont and nu* against N."""
    ns = [int(n) for n in n_list]
    if len(ns) < 3:
        raise ValueError("scaling fit needs at least 3 ring sizes")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ring sizes must be strictly ascending")
    if ns[0] < 5:
        raise ValueError("ring sizes must be >= 5")

    def one(n):
        pk = bm_peak(ChainParams(epsilon, n_sites=n))
        return ScalingRow(n, pk.lambda_star, pk.nu_star)

    table = _map(one, ns, threads)
    xs = [r.n for r in table]
    gap = powerlaw_fit(xs, [r.c_tb - c_cont for r in table])
    nus = powerlaw_fit(xs, [r.nu_star for r in table])
    return ScalingStudy(gap.exponent, nus.exponent, table)


# ------------------------------------------------------------ flux traces


@dataclass(frozen=True, eq=False)
class BMTrace:
    series: FluxSeries
    backflow: float  # -int J(0,t) dt over [-T/2, T/2], trapezoid rule


def bm_flux_trace(solution: EigenSolution, times=None, samples: int = 2000) -> BMTrace:
    """Flux at j = 0 of the optimal state, plus the trapezoid backflow over the window.

    ``times`` defaults to ``samples`` points spanning [-T/2, T/2]. The
    backflow integral always uses the in-window part of a uniform grid of
    ``samples`` points, independent of ``times``.
    """
    half = 0.5 * solution.problem.window_time
    window_t = np.linspace(-half, half, samples)
    window_j = np.atleast_1d(general_flux(solution.state, 0, window_t))
    backflow = -float(np.trapezoid(window_j, window_t))
    if times is None:
        series = FluxSeries(0, window_t, window_j)
    else:
        times = np.asarray(times, dtype=float)
        series = FluxSeries(0, times, np.atleast_1d(general_flux(solution.state, 0, times)))
    return BMTrace(series, backflow)


def integrated_backflow(state, nu: float) -> float:
    """-int J(0,t) dt as the kernel quadratic form, for any state of matching type."""
    p = state.params
    if isinstance(state, RingCoeffs):
        cap = np.exp(-1j * state.modes * np.pi / p.n_sites) * state.coeffs
        val = np.conj(cap) @ ring_matrix(p, nu) @ cap
    else:
        big_phi = np.exp(-0.5j * state.nodes) * state.phi * np.sqrt(state.weights)
        val = np.conj(big_phi) @ nystrom_matrix(p, nu, state.rule) @ big_phi
    return float(val.real)
