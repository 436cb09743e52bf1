"""Invariant checks behind the ``verify`` command."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from . import bm, extremal, flux
from .lattice import ChainParams, positive_momentum_window
from .numerics import symmetric_eigen

DEFAULT_SEED = 0xB0F107


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    value: float
    tol: float
    passed: bool


def _check(group, name, value, tol) -> Check:
    value = float(value)
    return Check(group, name, value, tol, bool(np.isfinite(value) and value <= tol))


def _random_ring_state(rng, params: ChainParams) -> flux.RingCoeffs:
    m = positive_momentum_window(params).size
    c = rng.normal(size=m) + 1j * rng.normal(size=m)
    return flux.RingCoeffs(params, c / np.linalg.norm(c))


def check_continuity(rng) -> list[Check]:
    p = ChainParams(1.0, n_sites=9)
    worst = 0.0
    for _ in range(100):
        st = _random_ring_state(rng, p)
        j = int(rng.integers(0, 9))
        t = float(rng.uniform(-20, 20))
        worst = max(worst, flux.continuity_residual(st, j, t))
    return [_check("continuity", "random states N=9 eps=1 (100)", worst, 1e-10)]


def check_bounds(rng) -> list[Check]:
    out = []
    attain = 0.0
    for eps in (0.0, 0.5, 1.0):
        for n in range(4, 31):
            p = ChainParams(eps, n_sites=n)
            b = extremal.ring_bounds(p)
            for branch, lam in (("plus", b.lambda_plus), ("minus", b.lambda_minus)):
                st = extremal.ring_optimal_coeffs(p, 3, 3.0, branch)
                attain = max(attain, abs(flux.general_flux_ring(st, 3, 3.0) - lam))
    out.append(_check("bounds", "ring optimal flux = lambda (N 4..30)", attain, 1e-10))

    inf_err = 0.0
    for eps in (0.0, 0.5, 1.0):
        p = ChainParams(eps)
        b = extremal.infinite_bounds(p)
        for branch, lam in (("plus", b.lambda_plus), ("minus", b.lambda_minus)):
            st = extremal.infinite_optimal_weight(p, 3, 3.0, branch)
            inf_err = max(inf_err, abs(flux.general_flux_infinite(st, 3, 3.0) - lam))
    out.append(_check("bounds", "infinite optimal flux = lambda", inf_err, 1e-8))

    excess = -np.inf
    for eps in (0.0, 0.5, 1.0):
        for n in range(4, 13):
            p = ChainParams(eps, n_sites=n)
            b = extremal.ring_bounds(p)
            m = positive_momentum_window(p).size
            c = rng.normal(size=(10_000, m)) + 1j * rng.normal(size=(10_000, m))
            c /= np.linalg.norm(c, axis=1, keepdims=True)
            for j in (0, 1, 3):
                for t in (0.0, 0.7, 3.0):
                    h = flux.ring_flux_matrix(p, j, t)
                    vals = np.einsum("sm,mn,sn->s", np.conj(c), h, c).real
                    excess = max(excess, vals.max() - b.lambda_plus, b.lambda_minus - vals.min())
    out.append(_check("bounds", "10^4 random states inside [lambda-, lambda+]", excess, 1e-9))
    return out


def check_eigen(rng) -> list[Check]:
    out = []
    worst = 0.0
    for n in (5, 9, 20):
        for eps in (0.0, 1.0):
            p = ChainParams(eps, n_sites=n)
            res = symmetric_eigen(bm.ring_matrix(p, 3.0))
            worst = max(worst, res.residual)
    p = ChainParams(0.5)
    res = symmetric_eigen(bm.nystrom_matrix(p, 2.0, bm.bm_rule(p, 200)))
    worst = max(worst, res.residual)
    out.append(_check("eigen", "backflow kernel eigen residual", worst, 1e-10))

    el = 0.0
    for eps in (0.0, 0.5, 1.0):
        for n in (4, 7, 12, 30):
            p = ChainParams(eps, n_sites=n)
            b = extremal.ring_bounds(p)
            h = flux.ring_flux_matrix(p, 2, 1.5)
            for branch, lam in (("plus", b.lambda_plus), ("minus", b.lambda_minus)):
                c = extremal.ring_optimal_coeffs(p, 2, 1.5, branch).coeffs
                el = max(el, np.linalg.norm(h @ c - lam * c))
    out.append(_check("eigen", "Euler-Lagrange residual of optimal coeffs", el, 1e-10))

    ev = 0.0
    for eps in (0.0, 0.5, 1.0):
        for n in (4, 9, 25):
            p = ChainParams(eps, n_sites=n)
            b = extremal.ring_bounds(p)
            lam = np.sort(np.linalg.eigvals(extremal.ring_extremal_matrix(p)).real)
            ev = max(ev, abs(lam[0] - b.lambda_minus), abs(lam[1] - b.lambda_plus))
    out.append(_check("eigen", "2x2 extremal matrix eigenvalues = lambda", ev, 1e-12))
    return out


def check_normalization(rng) -> list[Check]:
    ring = 0.0
    for eps in (0.0, 0.5, 1.0):
        for n in range(4, 31):
            p = ChainParams(eps, n_sites=n)
            for branch in ("plus", "minus"):
                st = extremal.ring_optimal_coeffs(p, 3, 3.0, branch)
                ring = max(ring, abs(st.norm_sq() - 1.0))
    inf = 0.0
    for eps in (0.0, 0.5, 1.0):
        for branch in ("plus", "minus"):
            st = extremal.infinite_optimal_weight(ChainParams(eps), 3, 3.0, branch)
            inf = max(inf, abs(st.norm_sq() - 1.0))
    return [_check("normalization", "sum |c|^2 = 1 (N 4..30)", ring, 1e-10),
            _check("normalization", "int |phi|^2 = 1 (200 nodes)", inf, 1e-10)]


def check_constants(rng) -> list[Check]:
    ratio = bm.C_CONT_RING / bm.C_BM
    gap = 0.0
    for n in range(3, 41):
        p = ChainParams(0.0, n_sites=n)
        a, b = extremal.ring_bounds(p), extremal.ring_bounds_unbiased(p)
        gap = max(gap, abs(a.lambda_plus - b.lambda_plus), abs(a.lambda_minus - b.lambda_minus))
    return [_check("constants", "c_ring_cont / c_BM - 3.0380", abs(ratio - 3.0380), 1e-3),
            _check("constants", "eps=0 ring bounds: general vs cotangent form", gap, 1e-12)]


def check_two_state(rng) -> list[Check]:
    worst = 0.0
    for eps in (0.0, 0.5, 1.0):
        p = ChainParams(eps, n_sites=7)
        w = positive_momentum_window(p)
        for m1 in w.modes:
            for m2 in w.modes:
                if m1 >= m2:
                    continue
                th = rng.uniform(0, math.pi, 50)
                ga = rng.uniform(0, 2 * math.pi, 50)
                js = rng.integers(-5, 6, 50)
                ts = rng.uniform(-10, 10, 50)
                for a, g, j, t in zip(th, ga, js, ts):
                    st = flux.two_state_state(p, int(m1), int(m2), a, g)
                    psi = flux.ring_wavefunction(st, [j - 1, j], t)
                    ref = flux.site_flux(psi[0], psi[1], p)
                    worst = max(worst, abs(flux.two_state_flux(p, int(m1), int(m2), a, g, j, t) - ref))
    return [_check("twostate", "closed form vs explicit wave function", worst, 1e-12)]


GROUPS: dict[str, Callable] = {
    "continuity": check_continuity,
    "bounds": check_bounds,
    "eigen": check_eigen,
    "normalization": check_normalization,
    "constants": check_constants,
    "twostate": check_two_state,
}


def run_checks(groups: Optional[Iterable[str]] = None, seed: int = DEFAULT_SEED) -> list[Check]:
    names = list(GROUPS) if not groups else list(groups)
    unknown = [g for g in names if g not in GROUPS]
    if unknown:
        raise ValueError(f"unknown check group(s): {', '.join(unknown)}")
    results = []
    for g in names:
        results.extend(GROUPS[g](np.random.default_rng(seed)))
    return results


def format_table(results: list[Check]) -> str:
    lines = [f"{'group':<14} {'check':<48} {'value':>12} {'tol':>9}  result"]
    for r in results:
        lines.append(f"{r.group:<14} {r.name:<48} {r.value:>12.3e} {r.tol:>9.1e}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
