"""Per-mode Rician amplitude parameters and moments.

The channel under one antenna mode is a complex Gaussian with mean
g(u, theta_0) * los_mean and per-quadrature variance
sigma0^2 * sum_l g(u, theta_l)^2, so its amplitude is Rician with
noncentrality nu(u) = g(u, theta_0) * |los_mean| and scale
varsigma(u) = sigma0 * sqrt(sum_l g(u, theta_l)^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import i0e, i1e

from .errors import ContractError


@dataclass(frozen=True)
class RicianModeParams:
    """Noncentrality amplitude and scale of one mode's amplitude law."""

    nu: float
    varsigma: float

    def __post_init__(self):
        if not (self.nu >= 0.0 and np.isfinite(self.nu)):
            raise ContractError(f"nu must be finite and >= 0, got {self.nu}")
        if not (self.varsigma > 0.0 and np.isfinite(self.varsigma)):
            raise ContractError(
                f"varsigma must be finite and > 0, got {self.varsigma} "
                "(degenerate mode: zero gain on every path)"
            )


def rician_params(profile, mode, los_mean_amplitude: float, sigma0: float, paths):
    """Rician (nu, varsigma) of |h| for one mode on one link."""
    from .antenna import gain  # local import avoids a module cycle

    if paths.path_count < 1:
        raise ContractError("need at least one path")
    g = np.array([gain(profile, mode, a) for a in paths.angles_deg])
    nu = float(g[0] * los_mean_amplitude)
    varsigma = float(sigma0 * np.sqrt(np.sum(g**2)))
    return RicianModeParams(nu=nu, varsigma=varsigma)


def rician_mean_amplitude(nu, varsigma):
    """E|X| for X Rician(nu, varsigma); vectorized, overflow-safe.

    Uses the Laguerre form E|X| = varsigma * sqrt(pi/2) * L_{1/2}(-x)
    with x = nu^2 / (2 varsigma^2) and exponentially scaled Bessel
    functions, valid for arbitrarily large K-factors.
    """
    nu = np.asarray(nu, dtype=float)
    varsigma = np.asarray(varsigma, dtype=float)
    x = nu**2 / (2.0 * varsigma**2)
    # L_{1/2}(-x) = e^{-x/2} [(1+x) I0(x/2) + x I1(x/2)]; i0e/i1e carry the e^{-x/2}
    laguerre = (1.0 + x) * i0e(x / 2.0) + x * i1e(x / 2.0)
    out = varsigma * np.sqrt(np.pi / 2.0) * laguerre
    if out.ndim == 0:
        return float(out)
    return out
