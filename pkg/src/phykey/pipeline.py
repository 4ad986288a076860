"""End-to-end orchestration: simulate, quantize, attack-account, reconcile.

The quantization-plus-accounting stage is a pure function of trace
columns, so a session that was exported to CSV and re-ingested yields
byte-identical downstream results (the replay path), and raw
experiment captures can have the attack applied offline the same way
the simulator does it.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adversary, fuzzy, metrics
from .analysis import AnalysisResult, closed_form_p0_p1, expected_rates, guess_count_pmf, key_guess_probability
from .antenna import calibrate_tx_power, omni_profile
from .config import ExperimentConfig
from .errors import ContractError
from .quantize import Bitstream, confirm_excursions, find_excursions, quantize, thresholds
from .session import MeasurementTrace, build_links, simulate_session
from .traceio import export_trace_csv, write_bitstream, write_commitments

_PMF_REPORT_LIMIT = 20_000


@dataclass
class ProtocolResult:
    """Quantization outputs plus attack accounting for one trace."""

    thresholds_alice: tuple[float, float]
    thresholds_bob: tuple[float, float]
    l_a: np.ndarray
    l_b: np.ndarray
    s_a: Bitstream
    s_b: Bitstream
    attack: adversary.AttackTrace | None


def run_protocol(trace: MeasurementTrace, beta: float, excursion_len: int, d: float) -> ProtocolResult:
    """Threshold selection, index exchange, quantization, attack accounting."""
    q_a = thresholds(trace.x_a, beta)
    q_b = thresholds(trace.x_b, beta)
    l_a = find_excursions(trace.x_a, q_a[0], q_a[1], excursion_len)
    l_b = confirm_excursions(trace.x_b, l_a, q_b[0], q_b[1], excursion_len)
    s_a = quantize(trace.x_a, l_b, q_a[0], q_a[1])
    s_b = quantize(trace.x_b, l_b, q_b[0], q_b[1])
    attack = None
    if np.any(trace.injected):
        attack = adversary.account_attacks(
            trace.x_a, trace.x_b, trace.rss_ma, trace.rss_mb, trace.injected,
            d, beta, s_a,
        )
    return ProtocolResult(
        thresholds_alice=q_a,
        thresholds_bob=q_b,
        l_a=l_a,
        l_b=l_b,
        s_a=s_a,
        s_b=s_b,
        attack=attack,
    )


def _simulate_from_config(cfg: ExperimentConfig, rng: np.random.Generator) -> MeasurementTrace:
    topology = cfg.build_topology()
    profile = cfg.build_profile()
    links = build_links(topology, cfg.fading)
    return simulate_session(
        profile=profile,
        topology=topology,
        links=links,
        scheme=cfg.scheme,
        n_rounds=cfg.rounds,
        coherence_block_rounds=cfg.coherence_block_rounds,
        beta=cfg.beta,
        noise_sigma_db=cfg.noise_sigma_db,
        detection_threshold_dbm=cfg.detection_threshold_dbm,
        rng=rng,
        attack_enabled=cfg.attack.enabled,
        attack_d=cfg.attack.d,
        injection_power_dbm=cfg.attack.injection_power_dbm,
        repeat_injection=cfg.attack.repeat_injection,
    )


def _tx_power_gap_vs_oa(cfg: ExperimentConfig) -> float:
    """Calibrated RA power minus the OA baseline on the same geometry."""
    topology = cfg.build_topology()
    links = build_links(topology, cfg.fading)
    amp, sig = abs(links.fading_ab.los_mean), links.fading_ab.sigma0
    p_ra = calibrate_tx_power(
        cfg.build_profile(), topology, cfg.detection_threshold_dbm, amp, sig, links.ab
    )
    p_oa = calibrate_tx_power(
        omni_profile(), topology, cfg.detection_threshold_dbm, amp, sig, links.ab
    )
    return p_ra - p_oa


def build_report(
    cfg: ExperimentConfig,
    trace: MeasurementTrace,
    protocol: ProtocolResult,
    *,
    rng: np.random.Generator,
    include_attack_rounds: bool = True,
) -> metrics.SessionReport:
    """Reconcile, verify, and assemble the session report."""
    ell = len(protocol.s_a)
    attack = protocol.attack
    n = attack.n if attack else 0
    n0 = attack.n0 if attack else 0
    m = attack.m if attack else 0
    kre, krr = metrics.attack_metrics(n, m, ell) if ell else (None, 0.0)

    rs = cfg.rs_params()
    reconciliation_ok: bool | None = None
    verification_ok: bool | None = None
    reconciled_bits = 0
    parity_bits = 0
    if ell >= rs.block_bits:
        commitments, covered = fuzzy.commit_stream(protocol.s_a.bits, rs, rng)
        parity_bits = len(commitments) * rs.parity_bits
        recovered = fuzzy.open_stream(protocol.s_b.bits, commitments, rs)
        if isinstance(recovered, fuzzy.ReconcileFailure):
            reconciliation_ok = False
            verification_ok = False
        else:
            reconciliation_ok = True
            reconciled_bits = covered
            key_alice = fuzzy.derive_key(protocol.s_a.bits[:covered])
            key_bob = fuzzy.derive_key(recovered)
            verification_ok, _ = fuzzy.verify_keys(key_alice, key_bob, rng)

    sbr = metrics.secret_bit_rate(
        reconciled_bits if reconciliation_ok else 0, m, parity_bits, trace.n_rounds
    )
    randomness = metrics.randomness_tests(protocol.s_a.bits) if ell else {}
    apen = (
        metrics.approximate_entropy(protocol.s_a.bits, 2) if ell >= 8 else None
    )
    mismatch = metrics.bit_mismatch_rate(protocol.s_a.bits, protocol.s_b.bits)
    return metrics.SessionReport(
        scheme=trace.scheme,
        seed=cfg.seed,
        n_rounds=trace.n_rounds,
        ell=ell,
        n=n,
        n0=n0,
        m=m,
        attacked_total=attack.attacked_total if attack else 0,
        kre=kre,
        krr=krr,
        bit_mismatch_rate=mismatch,
        secret_bit_rate=sbr,
        apen=apen,
        randomness=randomness,
        reconciliation_ok=reconciliation_ok,
        verification_ok=verification_ok,
        p_x_dbm=trace.p_x_dbm,
        thresholds_alice=protocol.thresholds_alice,
        thresholds_bob=protocol.thresholds_bob,
        attack_rounds=attack.to_records() if attack and include_attack_rounds else [],
    )


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str | Path | None = None,
    *,
    include_attack_rounds: bool | None = None,
) -> tuple[metrics.SessionReport, MeasurementTrace, ProtocolResult]:
    """simulate -> quantize -> attack accounting -> reconcile -> report.

    With out_dir set, writes report.json, trace.csv, the two bitstream
    files, and the commitment blob into it.
    """
    rng = np.random.default_rng(cfg.seed)
    trace = _simulate_from_config(cfg, rng)
    protocol = run_protocol(trace, cfg.beta, cfg.excursion_len, cfg.attack.d)
    if include_attack_rounds is None:
        include_attack_rounds = (
            protocol.attack is not None and protocol.attack.attacked_total <= 10_000
        )
    report = build_report(
        cfg, trace, protocol, rng=rng, include_attack_rounds=include_attack_rounds
    )
    if cfg.scheme == "RAKG":
        report.tx_power_gap_vs_oa_db = _tx_power_gap_vs_oa(cfg)
    links = build_links(cfg.build_topology(), cfg.fading)
    paths = links.ab.path_count
    report.extra["fading_k_factor"] = {
        "ab": links.fading_ab.k_factor(paths),
        "ma": links.fading_am.k_factor(paths),
        "mb": links.fading_mb.k_factor(paths),
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        export_trace_csv(trace, out / "trace.csv")
        write_bitstream(out / "alice.bits", protocol.s_a)
        write_bitstream(out / "bob.bits", protocol.s_b)
        rs = cfg.rs_params()
        if len(protocol.s_a) >= rs.block_bits:
            # commitments in the artifact directory are regenerated with a
            # dedicated stream so the report stays byte-identical
            commit_rng = np.random.default_rng(cfg.seed + 1)
            commitments, _ = fuzzy.commit_stream(protocol.s_a.bits, rs, commit_rng)
            write_commitments(out / "commitments.bin", commitments, rs)
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report, trace, protocol


def replay_trace(
    trace: MeasurementTrace, cfg: ExperimentConfig
) -> tuple[metrics.SessionReport, MeasurementTrace, ProtocolResult]:
    """Run the offline pipeline on an ingested trace.

    A clean trace (no injected flags) gets the attack applied offline
    when the config enables it: injected rounds take their values from
    the recorded reciprocal M-A / M-B observations, which is exactly
    how the simulator injects.
    """
    if cfg.attack.enabled and not np.any(trace.injected):
        offset = (
            0.0
            if cfg.attack.injection_power_dbm is None
            else cfg.attack.injection_power_dbm - trace.p_x_dbm
        )
        x_a, x_b, injected = adversary.apply_attack(
            trace.x_a,
            trace.x_b,
            trace.rss_ma,
            trace.rss_mb,
            cfg.beta,
            cfg.attack.d,
            power_offset_db=offset,
            repeat_injection=cfg.attack.repeat_injection,
        )
        trace = MeasurementTrace(
            mode=trace.mode,
            x_a=x_a,
            x_b=x_b,
            rss_ma=trace.rss_ma,
            rss_mb=trace.rss_mb,
            injected=injected,
            p_x_dbm=trace.p_x_dbm,
            injection_power_dbm=trace.injection_power_dbm,
            coherence_block_rounds=trace.coherence_block_rounds,
            scheme=trace.scheme,
        )
    protocol = run_protocol(trace, cfg.beta, cfg.excursion_len, cfg.attack.d)
    rng = np.random.default_rng(cfg.seed)
    include = protocol.attack is not None and protocol.attack.attacked_total <= 10_000
    report = build_report(cfg, trace, protocol, rng=rng, include_attack_rounds=include)
    return report, trace, protocol


def run_trials(cfg: ExperimentConfig, trials: int, max_workers: int | None = None):
    """Run seeded sessions concurrently; results ordered by trial index."""
    if trials < 1:
        raise ContractError("trials must be >= 1")
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(trials)]

    def one(i: int):
        sub = cfg.model_copy(update={"seed": seeds[i]})
        report, _, _ = run_experiment(sub, include_attack_rounds=False)
        return report

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, range(trials)))


def analyze_config(
    cfg: ExperimentConfig,
    *,
    q_minus: float | None = None,
    q_plus: float | None = None,
    counts: tuple[int, int, int] | None = None,
    calibration_rounds: int = 200_000,
) -> AnalysisResult:
    """Closed-form p0/p1 for the config, plus rate/PMF/p_key when counts given.

    Thresholds default to a clean calibration session at the config's
    seed (Eq.-style mean/std of Alice's series); counts are
    (ell, n, n0) from a measured or simulated run.
    """
    topology = cfg.build_topology()
    profile = omni_profile() if cfg.scheme == "OAKG" else cfg.build_profile()
    links = build_links(topology, cfg.fading)
    p_x = calibrate_tx_power(
        profile,
        topology,
        cfg.detection_threshold_dbm,
        abs(links.fading_ab.los_mean),
        links.fading_ab.sigma0,
        links.ab,
    )
    if q_minus is None or q_plus is None:
        cal_cfg = cfg.model_copy(
            update={
                "rounds": min(cfg.rounds, calibration_rounds),
                "attack": cfg.attack.model_copy(update={"enabled": False}),
            }
        )
        cal_trace = _simulate_from_config(cal_cfg, np.random.default_rng(cfg.seed))
        q_minus, q_plus = thresholds(cal_trace.x_a, cfg.beta)
    p0, p1 = closed_form_p0_p1(
        profile,
        links.am,
        abs(links.fading_am.los_mean),
        links.fading_am.sigma0,
        q_minus,
        q_plus,
        p_x,
    )
    gains_am = profile.gain_matrix(links.am.angles_deg)
    excluded_modes = int(np.sum(~np.any(gains_am > 0.0, axis=1)))
    e_kre = e_krr = None
    key_guess = None
    pmf = None
    counts_dict: dict = {"q_minus": q_minus, "q_plus": q_plus, "p_x_dbm": p_x}
    if counts is not None:
        ell, n, n0 = counts
        e_kre, e_krr = expected_rates(n, n0, p0, p1, ell)
        key_guess = key_guess_probability(ell, n, n0, p0, p1)
        if n <= _PMF_REPORT_LIMIT:
            pmf = guess_count_pmf(n, n0, p0, p1)
        counts_dict.update({"ell": ell, "n": n, "n0": n0})
    return AnalysisResult(
        p0=p0,
        p1=p1,
        e_kre=e_kre,
        e_krr=e_krr,
        key_guess=key_guess,
        pmf=pmf,
        excluded_modes=excluded_modes,
        counts=counts_dict,
    )
