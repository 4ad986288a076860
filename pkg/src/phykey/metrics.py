"""Attack/efficiency metrics and the four-test randomness battery.

The randomness battery is the SP 800-22 subset feasible without large
auxiliary tables: frequency (monobit), block frequency, runs, and
approximate entropy. Each test reports a p-value; p >= 0.01 passes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc

from .errors import ContractError

PASS_LEVEL = 0.01
MIN_BITS = 100


def attack_metrics(n: int, m: int, ell: int) -> tuple[float | None, float]:
    """(KRE, KRR) = m/n and m/ell; KRE is absent when nothing was attacked."""
    if ell < 1:
        raise ContractError("ell must be >= 1")
    if m > n:
        raise ContractError("cannot have more correct guesses than attacks")
    kre = m / n if n > 0 else None
    return kre, m / ell


def bit_mismatch_rate(s_a, s_b) -> float:
    s_a = np.asarray(s_a, dtype=np.uint8)
    s_b = np.asarray(s_b, dtype=np.uint8)
    if s_a.size != s_b.size:
        raise ContractError("bitstreams must have equal length")
    if s_a.size == 0:
        return 0.0
    return float(np.count_nonzero(s_a != s_b) / s_a.size)


def _phi(bits: np.ndarray, m: int) -> float:
    """Sum of pi*log(pi) over overlapping m-patterns with wraparound."""
    if m == 0:
        return 0.0
    n = bits.size
    ext = np.concatenate([bits, bits[: m - 1]]) if m > 1 else bits
    idx = np.zeros(n, dtype=np.int64)
    for j in range(m):
        idx = (idx << 1) | ext[j : j + n]
    counts = np.bincount(idx, minlength=1 << m)
    pi = counts[counts > 0] / n
    return float(np.sum(pi * np.log(pi)))


def approximate_entropy(bits, m_block: int = 2) -> float:
    """ApEn(m) = Phi(m) - Phi(m+1) over cyclically extended windows.

    0 for any deterministic periodic sequence; ln 2 in the i.i.d.
    fair-coin limit.
    """
    bits = np.asarray(bits, dtype=np.int64)
    if m_block < 1:
        raise ContractError("m_block must be >= 1")
    if bits.size < 2 ** (m_block + 1):
        raise ContractError(
            f"need at least 2^(m+1) = {2 ** (m_block + 1)} bits, got {bits.size}"
        )
    return _phi(bits, m_block) - _phi(bits, m_block + 1)


@dataclass(frozen=True)
class TestResult:
    name: str
    p_value: float | None
    passed: bool | None
    applicable: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "p_value": self.p_value,
            "passed": self.passed,
            "applicable": self.applicable,
            "note": self.note,
        }


def _not_applicable(name: str, why: str) -> TestResult:
    return TestResult(name=name, p_value=None, passed=None, applicable=False, note=why)


def monobit_test(bits: np.ndarray) -> TestResult:
    n = bits.size
    if n < MIN_BITS:
        return _not_applicable("monobit", f"needs >= {MIN_BITS} bits")
    s = abs(2 * int(bits.sum()) - n) / math.sqrt(n)
    p = math.erfc(s / math.sqrt(2.0))
    return TestResult("monobit", p, p >= PASS_LEVEL)


def block_frequency_test(bits: np.ndarray, block_size: int | None = None) -> TestResult:
    n = bits.size
    if n < MIN_BITS:
        return _not_applicable("block_frequency", f"needs >= {MIN_BITS} bits")
    m = block_size if block_size else (128 if n >= 1280 else max(20, n // 10))
    n_blocks = n // m
    pi = bits[: n_blocks * m].reshape(n_blocks, m).mean(axis=1)
    chi2 = 4.0 * m * float(np.sum((pi - 0.5) ** 2))
    p = float(gammaincc(n_blocks / 2.0, chi2 / 2.0))
    return TestResult("block_frequency", p, p >= PASS_LEVEL)


def runs_test(bits: np.ndarray) -> TestResult:
    n = bits.size
    if n < MIN_BITS:
        return _not_applicable("runs", f"needs >= {MIN_BITS} bits")
    pi = float(bits.mean())
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        # frequency pre-test failed: runs statistic is meaningless, report 0
        return TestResult("runs", 0.0, False, note="frequency pre-test failed")
    v = int(np.count_nonzero(np.diff(bits))) + 1
    denom = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    p = math.erfc(abs(v - 2.0 * n * pi * (1.0 - pi)) / denom)
    return TestResult("runs", p, p >= PASS_LEVEL)


def approximate_entropy_test(bits: np.ndarray, m_block: int = 2) -> TestResult:
    n = bits.size
    if n < MIN_BITS:
        return _not_applicable("approximate_entropy", f"needs >= {MIN_BITS} bits")
    apen = approximate_entropy(bits, m_block)
    chi2 = 2.0 * n * (math.log(2.0) - apen)
    p = float(gammaincc(2 ** (m_block - 1), max(chi2, 0.0) / 2.0))
    return TestResult("approximate_entropy", p, p >= PASS_LEVEL)


def randomness_tests(bits, apen_block: int = 2) -> dict[str, TestResult]:
    """Run the four-test battery; too-short inputs get not-applicable markers."""
    bits = np.asarray(bits, dtype=np.uint8)
    return {
        r.name: r
        for r in (
            monobit_test(bits),
            block_frequency_test(bits),
            runs_test(bits),
            approximate_entropy_test(bits, apen_block),
        )
    }


def secret_bit_rate(
    reconciled_bits: int, correctly_guessed: int, parity_bits: int, n_rounds: int
) -> float:
    """Net secret bits per probing round, floored at zero.

    Counts only bits that survived reconciliation, minus what the
    adversary learned (her correct attacked guesses) and minus the
    parity the code reveals in public.
    """
    if n_rounds < 1:
        raise ContractError("n_rounds must be >= 1")
    net = reconciled_bits - correctly_guessed - parity_bits
    return max(net, 0) / n_rounds


@dataclass
class SessionReport:
    """Everything the run_experiment command writes to report.json."""

    scheme: str
    seed: int
    n_rounds: int
    ell: int
    n: int
    n0: int
    m: int
    attacked_total: int
    kre: float | None
    krr: float
    bit_mismatch_rate: float
    secret_bit_rate: float
    apen: float | None
    randomness: dict[str, TestResult] = field(default_factory=dict)
    reconciliation_ok: bool | None = None
    verification_ok: bool | None = None
    p_x_dbm: float = float("nan")
    tx_power_gap_vs_oa_db: float | None = None
    thresholds_alice: tuple[float, float] | None = None
    thresholds_bob: tuple[float, float] | None = None
    attack_rounds: list[dict] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "scheme": self.scheme,
            "seed": self.seed,
            "n_rounds": self.n_rounds,
            "ell": self.ell,
            "n": self.n,
            "n0": self.n0,
            "m": self.m,
            "attacked_total": self.attacked_total,
            "kre": self.kre,
            "krr": self.krr,
            "bit_mismatch_rate": self.bit_mismatch_rate,
            "secret_bit_rate": self.secret_bit_rate,
            "apen": self.apen,
            "randomness": {k: v.to_dict() for k, v in self.randomness.items()},
            "reconciliation_ok": self.reconciliation_ok,
            "verification_ok": self.verification_ok,
            "p_x_dbm": self.p_x_dbm,
            "tx_power_gap_vs_oa_db": self.tx_power_gap_vs_oa_db,
            "thresholds_alice": self.thresholds_alice,
            "thresholds_bob": self.thresholds_bob,
            "attack_rounds": self.attack_rounds,
        }
        out.update(self.extra)
        return out
