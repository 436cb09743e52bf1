"""Chain parameters, dispersion, momentum eigenvalues and the positive-momentum window.

Energies are in units of tau and times in units of hbar/tau wherever the
caller leaves tau = hbar = 1. Momenta are reported in units of
2 * dx * mu * tau / hbar, so the lattice spacing and particle mass never
enter a computed quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import WindowTooSmall


@dataclass(frozen=True)
class ChainParams:
    """Model parameters for a biased tight-binding chain.

    ``n_sites=None`` selects the infinite chain, an integer selects a ring
    with periodic boundary conditions.
    """

    epsilon: float = 0.0
    tau: float = 1.0
    hbar: float = 1.0
    n_sites: Optional[int] = None

    def __post_init__(self):
        if not math.isfinite(self.epsilon):
            raise ValueError(f"epsilon must be finite, got {self.epsilon}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.n_sites is not None:
            if int(self.n_sites) != self.n_sites or self.n_sites < 1:
                raise ValueError(f"ring size must be a positive integer, got {self.n_sites}")
            if self.n_sites < 3:
                # N = 1, 2 never hold two positive-momentum modes
                raise WindowTooSmall(f"a ring needs N >= 3 sites, got {self.n_sites}")

    @property
    def is_ring(self) -> bool:
        return self.n_sites is not None

    @property
    def xi(self) -> float:
        """Bias angle arctan(epsilon), in (-pi/2, pi/2)."""
        return math.atan(self.epsilon)

    @property
    def amplitude(self) -> float:
        """sqrt(1 + epsilon^2), the bias enhancement factor."""
        return math.hypot(1.0, self.epsilon)

    def ring(self, n_sites: int) -> "ChainParams":
        return ChainParams(self.epsilon, self.tau, self.hbar, n_sites)

    def infinite(self) -> "ChainParams":
        return ChainParams(self.epsilon, self.tau, self.hbar, None)


@dataclass(frozen=True)
class ContinuousWindow:
    k_lo: float
    k_hi: float

    @property
    def width(self) -> float:
        return self.k_hi - self.k_lo


@dataclass(frozen=True)
class DiscreteWindow:
    eta1: int
    eta2: int
    n_sites: int

    @property
    def modes(self) -> np.ndarray:
        return np.arange(self.eta1, self.eta2 + 1)

    @property
    def size(self) -> int:
        return self.eta2 + 1 - self.eta1

    def momenta(self) -> np.ndarray:
        """Pseudo-momenta 2 pi n / N of the window modes."""
        return 2.0 * np.pi * self.modes / self.n_sites


MomentumWindow = Union[ContinuousWindow, DiscreteWindow]


def dispersion(params: ChainParams, k):
    """E_k = -2 tau sqrt(1 + eps^2) cos(k + xi)."""
    return -2.0 * params.tau * params.amplitude * np.cos(np.asarray(k) + params.xi)


def momentum_eigenvalue(params: ChainParams, k):
    """Reduced momentum sqrt(1 + eps^2) sin(k + xi); its sign is the direction of motion."""
    return params.amplitude * np.sin(np.asarray(k) + params.xi)


def mode_energies(params: ChainParams, modes) -> np.ndarray:
    """Ring energies E_n for integer mode labels n."""
    return dispersion(params, 2.0 * np.pi * np.asarray(modes) / params.n_sites)


def positive_momentum_window(params: ChainParams) -> MomentumWindow:
    """Pseudo-momenta whose momentum eigenvalue is non-negative.

    Zero-momentum edge states are included. For the unbiased ring the upper
    mode is N/2 - 1 (N even) or (N - 1)/2 (N odd), so the k = pi state is
    not counted alongside k = 0.
    """
    xi = params.xi
    if not params.is_ring:
        return ContinuousWindow(-xi, math.pi - xi)
    n = params.n_sites
    if params.epsilon == 0.0:
        eta2 = n // 2 - 1 if n % 2 == 0 else (n - 1) // 2
        return DiscreteWindow(0, eta2, n)
    eta1 = math.ceil(_snap(-xi * n / (2.0 * math.pi)))
    eta2 = math.floor(_snap((math.pi - xi) * n / (2.0 * math.pi)))
    return DiscreteWindow(eta1, eta2, n)


def _snap(x: float) -> float:
    # zero-momentum modes sitting exactly on the edge must survive rounding
    r = round(x)
    return float(r) if abs(x - r) <= 64 * 2.0 ** -52 * max(1.0, abs(x)) else x
