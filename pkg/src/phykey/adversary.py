"""Wait-then-attack MitM: opportunity detection, injection, accounting.

Mallory watches both legitimate probes each round. When her two
observations agree within d and both sit beyond the same quantization
threshold, she has an opportunity; on the following round she jams and
injects her own probes, betting that the round will quantize to the
bit matching the threshold side she saw. She cannot observe while
jamming, so after injecting round i+1 she resumes watching at i+2
(one-shot attacks; repeat_injection extends each opportunity to two
injected rounds).

Attack accounting is a pure function of the trace columns, so
simulated sessions and replayed trace files go through the same code.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import ContractError
from .quantize import Bitstream, thresholds


class OpportunityKind(IntEnum):
    O0 = 0
    O1 = 1


def detect_opportunity(
    rss_ma: float, rss_mb: float, q_minus: float, q_plus: float, d: float
) -> OpportunityKind | None:
    """O1 if both observations > q_plus, O0 if both < q_minus, within d."""
    if not (np.isfinite(rss_ma) and np.isfinite(rss_mb)):
        return None
    if abs(rss_ma - rss_mb) >= d:
        return None
    if rss_ma > q_plus and rss_mb > q_plus:
        return OpportunityKind.O1
    if rss_ma < q_minus and rss_mb < q_minus:
        return OpportunityKind.O0
    return None


def schedule_attacks(
    rss_ma: np.ndarray,
    rss_mb: np.ndarray,
    q_minus: float,
    q_plus: float,
    d: float,
    repeat_injection: bool = False,
) -> np.ndarray:
    """Boolean mask of injected rounds under the one-shot attack discipline.

    Round 0 is never attacked (an opportunity must precede the attack),
    and rounds Mallory spends jamming are blind: they trigger nothing.
    """
    n = len(rss_ma)
    injected = np.zeros(n, dtype=bool)
    # precompute the per-round opportunity test on Mallory's observations
    finite = np.isfinite(rss_ma) & np.isfinite(rss_mb)
    close = np.abs(rss_ma - rss_mb) < d
    o1 = close & finite & (rss_ma > q_plus) & (rss_mb > q_plus)
    o0 = close & finite & (rss_ma < q_minus) & (rss_mb < q_minus)
    opportunity = o1 | o0
    i = 0
    while i < n - 1:
        if opportunity[i]:
            injected[i + 1] = True
            if repeat_injection and i + 2 < n:
                injected[i + 2] = True
                i += 3
            else:
                i += 2
        else:
            i += 1
    return injected


def apply_attack(
    x_a: np.ndarray,
    x_b: np.ndarray,
    rss_ma: np.ndarray,
    rss_mb: np.ndarray,
    beta: float,
    d: float,
    power_offset_db: float = 0.0,
    repeat_injection: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run Mallory against a clean trace; returns (x_a', x_b', injected).

    Her assumed thresholds are the clean series' own mean/std pair (the
    exact-knowledge simplification). Injected rounds replace Alice's
    measurement with the reciprocal M-A RSS of that round (under
    Alice's current antenna mode) and Bob's with the M-B RSS, shifted
    by Mallory's injection-power offset.
    """
    q_minus, q_plus = thresholds(x_a, beta)
    injected = schedule_attacks(rss_ma, rss_mb, q_minus, q_plus, d, repeat_injection)
    out_a = np.array(x_a, dtype=float)
    out_b = np.array(x_b, dtype=float)
    out_a[injected] = rss_ma[injected] + power_offset_db
    out_b[injected] = rss_mb[injected] + power_offset_db
    return out_a, out_b, injected


@dataclass(frozen=True)
class AttackRound:
    round_index: int
    kind: OpportunityKind
    guessed_bit: int
    injected_rss_a: float
    injected_rss_b: float
    survived_to_key: bool
    correct: bool | None  # None when the round yielded no key bit
    tail_success: bool  # Alice's injected RSS landed on the guessed side


@dataclass
class AttackTrace:
    """Per-attack records plus the totals the metrics are built from.

    n counts attacked rounds that produced a key bit (appear in L_b);
    n0 is the O0 share of those; m the correct guesses among them.
    Attacked rounds that failed to quantize are tallied separately.
    """

    d: float
    q_minus: float
    q_plus: float
    rounds: list[AttackRound] = field(default_factory=list)

    @property
    def attacked_total(self) -> int:
        return len(self.rounds)

    @property
    def n(self) -> int:
        return sum(1 for r in self.rounds if r.survived_to_key)

    @property
    def n0(self) -> int:
        return sum(
            1 for r in self.rounds if r.survived_to_key and r.kind == OpportunityKind.O0
        )

    @property
    def m(self) -> int:
        return sum(1 for r in self.rounds if r.survived_to_key and r.correct)

    def tail_stats(self, kind: OpportunityKind) -> tuple[int, int]:
        """(#successes, #attacks) of the guessed-side tail event, all attacks."""
        hits = tot = 0
        for r in self.rounds:
            if r.kind == kind:
                tot += 1
                hits += bool(r.tail_success)
        return hits, tot

    def to_records(self) -> list[dict]:
        return [
            {
                "round": r.round_index,
                "kind": f"O{int(r.kind)}",
                "guessed": int(r.guessed_bit),
                "correct": r.correct,
                "survived_to_key": r.survived_to_key,
            }
            for r in self.rounds
        ]


def account_attacks(
    x_a: np.ndarray,
    x_b: np.ndarray,
    rss_ma: np.ndarray,
    rss_mb: np.ndarray,
    injected: np.ndarray,
    d: float,
    beta: float,
    bits_a: Bitstream,
) -> AttackTrace:
    """Re-derive kinds, guesses, and correctness from trace columns.

    Thresholds are recomputed over the non-injected rounds (the clean
    measurements still present in the series), so replayed traces
    reproduce a simulated session's accounting exactly. Each flagged
    round's opportunity is the nearest earlier non-injected round
    (consecutive injections under repeat_injection share one
    observation). A flagged round whose observations straddle the
    thresholds (possible only on borderline replays) is classified by
    which side of the band midpoint the observation pair leans to.
    """
    x_a = np.asarray(x_a, dtype=float)
    x_b = np.asarray(x_b, dtype=float)
    injected = np.asarray(injected, dtype=bool)
    if injected.size != x_a.size:
        raise ContractError("injected mask and series length mismatch")
    if injected.size and injected[0]:
        raise ContractError("round 0 cannot be an attacked round")
    clean = x_a[~injected]
    q_minus, q_plus = thresholds(clean, beta)
    midpoint = 0.5 * (q_minus + q_plus)
    bit_by_round = dict(
        zip(bits_a.source_rounds.tolist(), bits_a.bits.tolist())
    )
    trace = AttackTrace(d=d, q_minus=q_minus, q_plus=q_plus)
    for r in np.flatnonzero(injected):
        r = int(r)
        obs = r - 1
        while injected[obs]:
            obs -= 1
        kind = detect_opportunity(rss_ma[obs], rss_mb[obs], q_minus, q_plus, d)
        if kind is None:
            lean = 0.5 * (rss_ma[obs] + rss_mb[obs])
            kind = OpportunityKind.O1 if lean >= midpoint else OpportunityKind.O0
        guessed = int(kind)
        key_bit = bit_by_round.get(r)
        survived = key_bit is not None
        correct = (key_bit == guessed) if survived else None
        tail = x_a[r] > q_plus if kind == OpportunityKind.O1 else x_a[r] < q_minus
        trace.rounds.append(
            AttackRound(
                round_index=r,
                kind=kind,
                guessed_bit=guessed,
                injected_rss_a=float(x_a[r]),
                injected_rss_b=float(x_b[r]),
                survived_to_key=survived,
                correct=correct,
                tail_success=bool(tail),
            )
        )
    return trace


def assemble_guess(
    attack_trace: AttackTrace, bits_a: Bitstream, rng: np.random.Generator
) -> np.ndarray:
    """Mallory's full-key guess: recorded bits where she attacked, coin
    flips everywhere else."""
    ell = len(bits_a)
    guess = rng.integers(0, 2, size=ell, dtype=np.uint8)
    position = {int(r): i for i, r in enumerate(bits_a.source_rounds)}
    for rec in attack_trace.rounds:
        pos = position.get(rec.round_index)
        if pos is not None:
            guess[pos] = rec.guessed_bit
    return guess
