"""Shared numerical kernels: quadrature, symmetric eigensolves, 1-D search, log-log fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, NonPositiveData, NotSymmetric

SYMMETRY_TOL = 1e-12
RESIDUAL_TOL = 1e-10

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> complex | float:
        """Weighted sum of ``values`` at the nodes; a callable is sampled first."""
        if callable(values):
            values = values(self.nodes)
        return np.dot(self.weights, np.broadcast_to(values, self.nodes.shape))


def _legendre_pair(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(P_n(x), P_{n-1}(x)) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return p1, p0


def _legendre_roots(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Newton on P_n from the Tricomi initial guess; positive half only.
    m = (n + 1) // 2
    i = np.arange(1, m + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        pn, pm = _legendre_pair(n, x)
        dx = pn / (n * (x * pn - pm) / (x * x - 1.0))
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    pn, pm = _legendre_pair(n, x)
    dp = n * (x * pn - pm) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)

    nodes = np.empty(n)
    weights = np.empty(n)
    nodes[:m] = -x
    nodes[n - m:] = x[::-1]
    weights[:m] = w
    weights[n - m:] = w[::-1]
    if n % 2 == 1:
        nodes[m - 1] = 0.0
    return nodes, weights


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """n-point Gauss-Legendre rule mapped affinely onto [a, b].

    Exact for polynomials of degree <= 2n - 1. Nodes are returned in
    increasing order.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    x, w = _legendre_roots(n)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return QuadratureRule(nodes=mid + half * x, weights=half * w, a=a, b=b)


@dataclass(frozen=True, eq=False)
class SymmetricEigenResult:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns
    residual: float

    @property
    def largest(self) -> tuple[float, np.ndarray]:
        return float(self.eigenvalues[-1]), self.eigenvectors[:, -1]


def _check_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"matrix must be square, got shape {a.shape}")
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(a))):
        raise NotSymmetric(f"max |A - A^T| = {asym:.3e}")
    return a


def _residual(a, values, vectors) -> float:
    if values.size == 0:
        return 0.0
    r = a @ vectors - vectors * values
    return float(np.max(np.linalg.norm(r, axis=0)))


def symmetric_eigen(matrix) -> SymmetricEigenResult:
    """Full spectrum of a real symmetric matrix.

    Raises NotSymmetric if the input is not symmetric to 1e-12, and
    ConvergenceFailure if max ||Av - lv|| exceeds 1e-10 * ||A||.
    """
    a = _check_symmetric(matrix)
    values, vectors = scipy.linalg.eigh(a)
    res = _residual(a, values, vectors)
    scale = max(1.0, np.linalg.norm(a, 2)) if a.size else 1.0
    if not np.isfinite(res) or res > RESIDUAL_TOL * scale:
        raise ConvergenceFailure(f"eigen residual {res:.3e} exceeds contract")
    return SymmetricEigenResult(values, vectors, res)


def largest_eigenpair(matrix) -> tuple[float, np.ndarray, float]:
    """Largest eigenvalue, its unit eigenvector and the residual norm."""
    a = _check_symmetric(matrix)
    n = a.shape[0]
    values, vectors = scipy.linalg.eigh(a, subset_by_index=[n - 1, n - 1])
    v = vectors[:, 0]
    res = float(np.linalg.norm(a @ v - values[0] * v))
    scale = max(1.0, np.max(np.abs(a)) * n)
    if not np.isfinite(res) or res > RESIDUAL_TOL * scale:
        raise ConvergenceFailure(f"eigen residual {res:.3e} exceeds contract")
    return float(values[0]), v, res


@dataclass(frozen=True)
class GoldenResult:
    x_star: float
    f_star: float


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       tol: float = 1e-8) -> GoldenResult:
    """Maximize a unimodal f on [lo, hi] to within tol in x.

    Exact ties shrink the bracket from both sides, which keeps the search
    centred on plateaus produced by floating-point rounding.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = float(lo), float(hi)
    c = a + INV_PHI_SQ * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI_SQ * (b - a)
            fc = f(c)
        elif fc < fd:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        else:
            a, b = c, d
            c = a + INV_PHI_SQ * (b - a)
            d = a + INV_PHI * (b - a)
            fc, fd = f(c), f(d)
    x = 0.5 * (a + b)
    return GoldenResult(x, f(x))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    r_squared: float


def powerlaw_fit(xs, ys) -> PowerLawFit:
    """Least-squares fit of y = prefactor * x**exponent on log-log axes."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-D and of equal length")
    if len(xs) < 3:
        raise ValueError(f"need at least 3 points, got {len(xs)}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise NonPositiveData("power-law fit needs strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), float(np.exp(intercept)), r2)
