"""Multipath fading coefficients and RSS mapping.

Each link has P+1 complex path coefficients, redrawn once per
coherence block. The LoS coefficient (index 0) has mean los_mean,
NLoS coefficients are zero-mean; all quadratures share the same
standard deviation sigma0 and are independent across paths, links,
and blocks.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError

NEG_INF_DBM = float("-inf")


@dataclass(frozen=True)
class FadingParams:
    """Distribution of one link's path coefficients."""

    los_mean: complex
    sigma0: float

    def __post_init__(self):
        if not (
            math.isfinite(self.los_mean.real) and math.isfinite(self.los_mean.imag)
        ):
            raise ContractError("los_mean must be finite")
        if not (self.sigma0 >= 0.0 and math.isfinite(self.sigma0)):
            raise ContractError("sigma0 must be finite and >= 0")

    def k_factor(self, path_count: int) -> float:
        """Ratio of LoS power to total diffuse power over P+1 paths."""
        if self.sigma0 == 0.0:
            return math.inf
        return abs(self.los_mean) ** 2 / (2.0 * self.sigma0**2 * path_count)

    @classmethod
    def from_k_factor(
        cls, los_amplitude: float, k_factor: float, path_count: int, los_phase_rad: float = 0.0
    ) -> "FadingParams":
        if k_factor <= 0:
            raise ContractError("k_factor must be > 0")
        sigma0 = los_amplitude / math.sqrt(2.0 * k_factor * path_count)
        return cls(
            los_mean=los_amplitude * cmath.exp(1j * los_phase_rad), sigma0=sigma0
        )


@dataclass(frozen=True)
class FadingState:
    """Path coefficients of one link within one coherence block."""

    coefficients: np.ndarray
    block_index: int

    def __post_init__(self):
        coeff = np.asarray(self.coefficients, dtype=complex)
        coeff.setflags(write=False)
        object.__setattr__(self, "coefficients", coeff)

    @property
    def path_count(self) -> int:
        return self.coefficients.size


def sample_fading_block(
    rng: np.random.Generator, params: FadingParams, path_count: int, block_index: int = 0
) -> FadingState:
    """Draw one block's coefficients: LoS mean on path 0, zero-mean NLoS."""
    if path_count < 1:
        raise ContractError("path_count must be >= 1")
    z = params.sigma0 * (
        rng.standard_normal(path_count) + 1j * rng.standard_normal(path_count)
    )
    z[0] += params.los_mean
    return FadingState(coefficients=z, block_index=block_index)


def sample_fading_blocks(
    rng: np.random.Generator, params: FadingParams, path_count: int, n_blocks: int
) -> np.ndarray:
    """Vectorized batch of block coefficients, shape (n_blocks, path_count)."""
    if path_count < 1 or n_blocks < 1:
        raise ContractError("path_count and n_blocks must be >= 1")
    z = params.sigma0 * (
        rng.standard_normal((n_blocks, path_count))
        + 1j * rng.standard_normal((n_blocks, path_count))
    )
    z[:, 0] += params.los_mean
    return z


def channel_gain(state: FadingState, profile, mode, paths) -> complex:
    """h = sum_l g(mode, theta_l) * a_l, the mode-weighted path sum."""
    from .antenna import gain

    if paths.path_count != state.path_count:
        raise ContractError(
            f"path set has {paths.path_count} angles but state has "
            f"{state.path_count} coefficients"
        )
    g = np.array([gain(profile, mode, a) for a in paths.angles_deg])
    return complex(np.sum(g * state.coefficients))


def rss_from_gain(
    h: complex,
    p_x_dbm: float,
    noise_sigma_db: float = 0.0,
    rng: np.random.Generator | None = None,
) -> float:
    """RSS in dBm: 20*log10|h| + P_x plus optional Gaussian dB noise.

    |h| = 0 maps to -inf, the erasure sentinel (below any detection
    threshold; treated as packet loss downstream).
    """
    mag = abs(h)
    if mag == 0.0:
        return NEG_INF_DBM
    rss = 20.0 * math.log10(mag) + p_x_dbm
    if noise_sigma_db > 0.0:
        if rng is None:
            raise ContractError("rng required when noise_sigma_db > 0")
        rss += noise_sigma_db * rng.standard_normal()
    return rss
