"""Quantization phase: thresholds, excursions, index exchange, bit extraction.

Both parties compute mean/std thresholds over their own RSS series,
Alice publishes the index list L_a of her excursions, Bob confirms the
subset L_b where he also sees an excursion (on either side; a side
disagreement becomes a bit mismatch for reconciliation to fix), and
both quantize at the L_b indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ProtocolError


@dataclass(frozen=True)
class QuantizerConfig:
    """Threshold weight beta (0 < beta < 1) and excursion length e >= 1."""

    beta: float = 0.4
    excursion_len: int = 1

    def __post_init__(self):
        if not (0.0 < self.beta < 1.0):
            raise ContractError(f"beta must be in (0, 1), got {self.beta}")
        if self.excursion_len < 1:
            raise ContractError("excursion_len must be >= 1")


@dataclass(frozen=True)
class Bitstream:
    """Extracted bits with the probing round each bit came from."""

    bits: np.ndarray
    source_rounds: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        rounds = np.asarray(self.source_rounds, dtype=np.int64)
        if bits.size != rounds.size:
            raise ContractError("bits and source_rounds length mismatch")
        if rounds.size > 1 and np.any(np.diff(rounds) <= 0):
            raise ContractError("source_rounds must be strictly increasing")
        if bits.size and not np.all((bits == 0) | (bits == 1)):
            raise ContractError("bits must be 0/1")
        bits.setflags(write=False)
        rounds.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "source_rounds", rounds)

    def __len__(self) -> int:
        return int(self.bits.size)


def thresholds(x, beta: float) -> tuple[float, float]:
    """(q_minus, q_plus) = mean -/+ beta * population std of the series.

    -inf erasures (lost probes) are excluded from the statistics; at
    least two finite samples are required for a meaningful spread.
    """
    x = np.asarray(x, dtype=float)
    finite = x[np.isfinite(x)]
    if finite.size < 2:
        raise ContractError(
            f"need >= 2 finite samples for thresholds, got {finite.size}"
        )
    lo, hi = float(finite.min()), float(finite.max())
    if lo == hi:
        # a constant series has mean exactly lo and zero spread; computing it
        # through np.mean would round and turn every sample into an excursion
        return (lo, lo)
    mu = float(np.mean(finite))
    sigma = float(np.std(finite))
    return (mu - beta * sigma, mu + beta * sigma)


def _excursion_runs(beyond: np.ndarray, e: int) -> list[int]:
    """Starting indices of maximal runs of True with length >= e."""
    idx = np.flatnonzero(beyond)
    if idx.size == 0:
        return []
    starts = []
    run_start = idx[0]
    prev = idx[0]
    for i in idx[1:]:
        if i != prev + 1:
            if prev - run_start + 1 >= e:
                starts.append(int(run_start))
            run_start = i
        prev = i
    if prev - run_start + 1 >= e:
        starts.append(int(run_start))
    return starts


def find_excursions(x, q_minus: float, q_plus: float, e: int = 1) -> np.ndarray:
    """Indices where the series leaves the (q_minus, q_plus) band.

    With e = 1, every index strictly above q_plus or strictly below
    q_minus. With e > 1, the starting index of each maximal run of
    length >= e lying entirely on one side. -inf erasures never count.
    """
    x = np.asarray(x, dtype=float)
    finite = np.isfinite(x)
    above = (x > q_plus) & finite
    below = (x < q_minus) & finite
    if e == 1:
        return np.flatnonzero(above | below).astype(np.int64)
    starts = sorted(_excursion_runs(above, e) + _excursion_runs(below, e))
    return np.asarray(starts, dtype=np.int64)


def _has_excursion_at(x, i: int, q_minus: float, q_plus: float, e: int) -> bool:
    if i + e > x.size:
        return False
    window = x[i : i + e]
    if not np.all(np.isfinite(window)):
        return False
    return bool(np.all(window > q_plus) or np.all(window < q_minus))


def confirm_excursions(x_b, l_a, q_minus: float, q_plus: float, e: int = 1) -> np.ndarray:
    """Bob's pass: keep L_a indices where his series also has an excursion.

    Which side Bob's excursion is on is not checked here; the index
    lists are public positions only, so side disagreements stay in and
    later surface as bit mismatches.
    """
    x_b = np.asarray(x_b, dtype=float)
    l_a = np.asarray(l_a, dtype=np.int64)
    if l_a.size and (l_a.min() < 0 or l_a.max() >= x_b.size):
        raise ProtocolError("L_a index out of range for the peer series")
    if e == 1:
        finite = np.isfinite(x_b[l_a])
        keep = ((x_b[l_a] > q_plus) | (x_b[l_a] < q_minus)) & finite
        return l_a[keep]
    return np.asarray(
        [i for i in l_a if _has_excursion_at(x_b, int(i), q_minus, q_plus, e)],
        dtype=np.int64,
    )


def quantize(x, indices, q_minus: float, q_plus: float) -> Bitstream:
    """Bit 1 where x > q_plus, bit 0 where x < q_minus, in index order."""
    x = np.asarray(x, dtype=float)
    indices = np.asarray(indices, dtype=np.int64)
    vals = x[indices]
    ones = vals > q_plus
    zeros = vals < q_minus
    inside = ~(ones | zeros)
    if np.any(inside):
        bad = indices[inside][0]
        raise ContractError(
            f"index {bad} is not an excursion: value {x[bad]} inside "
            f"({q_minus}, {q_plus})"
        )
    return Bitstream(bits=ones.astype(np.uint8), source_rounds=indices)
