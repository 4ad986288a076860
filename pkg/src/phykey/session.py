"""Per-round channel synthesis for a whole probing session.

Rounds are grouped into coherence blocks during which all links keep
the same path coefficients. Alice redraws her antenna mode uniformly at
random every round (RAKG) or keeps the single omni mode (OAKG); within
one round both probe directions see the identical channel, so with
zero measurement noise x_a(i) == x_b(i) exactly on clean rounds.
Mallory's per-round observations of Alice's and Bob's probes ride on
the same frozen fading.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import adversary
from .antenna import AntennaProfile, calibrate_tx_power, omni_profile
from .errors import ContractError
from .fading import FadingParams, sample_fading_blocks
from .geometry import LinkPathSet, Topology, path_angles

RAKG = "RAKG"
OAKG = "OAKG"


@dataclass(frozen=True)
class LinkSet:
    """Path sets and fading parameters for the three links."""

    ab: LinkPathSet
    am: LinkPathSet
    mb_path_count: int
    fading_ab: FadingParams
    fading_am: FadingParams
    fading_mb: FadingParams


@dataclass
class MeasurementTrace:
    """One session's per-round series plus the bookkeeping to replay it."""

    mode: np.ndarray
    x_a: np.ndarray
    x_b: np.ndarray
    rss_ma: np.ndarray
    rss_mb: np.ndarray
    injected: np.ndarray
    p_x_dbm: float
    injection_power_dbm: float
    coherence_block_rounds: int
    scheme: str = RAKG

    def __post_init__(self):
        n = self.x_a.size
        for name in ("mode", "x_b", "rss_ma", "rss_mb", "injected"):
            if getattr(self, name).size != n:
                raise ContractError(f"per-round series {name} has wrong length")

    @property
    def n_rounds(self) -> int:
        return int(self.x_a.size)

    def block_index(self) -> np.ndarray:
        return np.arange(self.n_rounds) // self.coherence_block_rounds


def build_links(topology: Topology, fading_cfg) -> LinkSet:
    """Per-link path sets and fading parameters.

    By default the LoS amplitude decays as reference_amplitude *
    ref_distance / d with its phase advancing along the carrier, and
    sigma0 follows from the configured K-factor over P+1 paths; each
    link can override its amplitude or K-factor individually.
    """
    ab = path_angles(topology, "alice", "bob")
    am = path_angles(topology, "alice", "mallory")
    path_count = 1 + len(topology.scatterers)

    def params(d: float, override) -> FadingParams:
        amp = fading_cfg.reference_amplitude * fading_cfg.reference_distance_m / d
        k = fading_cfg.k_factor
        if override is not None:
            if override.los_amplitude is not None:
                amp = override.los_amplitude
            if override.k_factor is not None:
                k = override.k_factor
        phase = -2.0 * math.pi * d / topology.wavelength_m
        return FadingParams.from_k_factor(amp, k, path_count, phase)

    return LinkSet(
        ab=ab,
        am=am,
        mb_path_count=path_count,
        fading_ab=params(topology.distance("alice", "bob"), getattr(fading_cfg, "ab", None)),
        fading_am=params(topology.distance("alice", "mallory"), getattr(fading_cfg, "ma", None)),
        fading_mb=params(topology.distance("mallory", "bob"), getattr(fading_cfg, "mb", None)),
    )


def _rss(h: np.ndarray, p_x: float) -> np.ndarray:
    mag = np.abs(h)
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(mag) + p_x


def simulate_session(
    *,
    profile: AntennaProfile,
    topology: Topology,
    links: LinkSet,
    scheme: str,
    n_rounds: int,
    coherence_block_rounds: int,
    beta: float,
    noise_sigma_db: float,
    detection_threshold_dbm: float,
    rng: np.random.Generator,
    attack_enabled: bool = True,
    attack_d: float = 3.0,
    injection_power_dbm: float | None = None,
    repeat_injection: bool = False,
) -> MeasurementTrace:
    """Simulate N probing rounds and (optionally) the MitM injections.

    The antenna profile drives both the A-B and the M-A channels
    through Alice's per-round mode; Bob and Mallory are omnidirectional
    so the M-B channel only changes across coherence blocks. Transmit
    power is calibrated so every usable mode reaches the detection
    threshold on the A-B link.
    """
    if n_rounds < 1:
        raise ContractError("n_rounds must be >= 1")
    if coherence_block_rounds < 1:
        raise ContractError("coherence_block_rounds must be >= 1")
    if scheme not in (RAKG, OAKG):
        raise ContractError(f"unknown scheme {scheme!r}")
    if scheme == OAKG:
        profile = omni_profile()

    p_x = calibrate_tx_power(
        profile,
        topology,
        detection_threshold_dbm,
        abs(links.fading_ab.los_mean),
        links.fading_ab.sigma0,
        links.ab,
    )
    p_m = p_x if injection_power_dbm is None else float(injection_power_dbm)

    n_blocks = -(-n_rounds // coherence_block_rounds)
    block = np.arange(n_rounds) // coherence_block_rounds
    a_ab = sample_fading_blocks(rng, links.fading_ab, links.ab.path_count, n_blocks)
    a_am = sample_fading_blocks(rng, links.fading_am, links.am.path_count, n_blocks)
    a_mb = sample_fading_blocks(rng, links.fading_mb, links.mb_path_count, n_blocks)

    if scheme == RAKG:
        mode_idx = rng.integers(0, profile.mode_count, size=n_rounds)
    else:
        mode_idx = np.zeros(n_rounds, dtype=np.int64)
    g_ab = profile.gain_matrix(links.ab.angles_deg)
    g_am = profile.gain_matrix(links.am.angles_deg)

    h_ab = np.sum(g_ab[mode_idx] * a_ab[block], axis=1)
    h_am = np.sum(g_am[mode_idx] * a_am[block], axis=1)
    h_mb = np.sum(a_mb[block], axis=1)

    clean_ab = _rss(h_ab, p_x)
    rss_ma = _rss(h_am, p_x)
    rss_mb = _rss(h_mb, p_x)
    if noise_sigma_db > 0.0:
        x_a = clean_ab + noise_sigma_db * rng.standard_normal(n_rounds)
        x_b = clean_ab + noise_sigma_db * rng.standard_normal(n_rounds)
        rss_ma = rss_ma + noise_sigma_db * rng.standard_normal(n_rounds)
        rss_mb = rss_mb + noise_sigma_db * rng.standard_normal(n_rounds)
    else:
        x_a = clean_ab.copy()
        x_b = clean_ab.copy()

    if attack_enabled:
        x_a, x_b, injected = adversary.apply_attack(
            x_a,
            x_b,
            rss_ma,
            rss_mb,
            beta,
            attack_d,
            power_offset_db=p_m - p_x,
            repeat_injection=repeat_injection,
        )
    else:
        injected = np.zeros(n_rounds, dtype=bool)

    modes = np.asarray(profile.modes, dtype=np.int64)[mode_idx]
    return MeasurementTrace(
        mode=modes,
        x_a=x_a,
        x_b=x_b,
        rss_ma=rss_ma,
        rss_mb=rss_mb,
        injected=injected,
        p_x_dbm=p_x,
        injection_power_dbm=p_m,
        coherence_block_rounds=coherence_block_rounds,
        scheme=scheme,
    )
