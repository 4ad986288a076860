"""Fuzzy commitment over Reed-Solomon, plus key verification.

Alice draws a random private word y, encodes it, and publishes
delta = S_a XOR enc(y) together with hash(y). Bob computes
c' = S_b XOR delta; if S_a and S_b differ in at most t symbols' worth
of positions, decoding c' recovers y and S_a = enc(y) XOR delta
exactly. delta alone reveals nothing about S_a: flipping y
re-randomizes it uniformly.

The bitstream is chunked into blocks of n*m bits; a final partial
block is dropped rather than padded, so every reconciled bit is a
genuinely agreed one.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError
from .reed_solomon import DecodeFailure, ReedSolomon, RsParams


@lru_cache(maxsize=8)
def _codec(params: RsParams) -> ReedSolomon:
    return ReedSolomon(params)


def bits_to_symbols(bits: np.ndarray, m: int) -> np.ndarray:
    """Pack bits into m-bit symbols, MSB first; length must divide by m."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % m:
        raise ContractError(f"bit count {bits.size} not a multiple of m={m}")
    weights = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
    return (bits.reshape(-1, m).astype(np.int64) * weights).sum(axis=1)


def symbols_to_bits(symbols: np.ndarray, m: int) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=np.int64)
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    return ((symbols[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def _digest(y_symbols: np.ndarray, m: int) -> bytes:
    return hashlib.sha256(pack_bits(symbols_to_bits(y_symbols, m))).digest()


def pack_bits(bits: np.ndarray) -> bytes:
    """MSB-first byte packing with a zero-padded tail."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def unpack_bits(blob: bytes, n_bits: int) -> np.ndarray:
    out = np.unpackbits(np.frombuffer(blob, dtype=np.uint8))
    if out.size < n_bits:
        raise ContractError(f"blob holds {out.size} bits, need {n_bits}")
    return out[:n_bits]


@dataclass(frozen=True)
class Commitment:
    """Public opening value delta plus the digest of the private word."""

    delta: np.ndarray
    verifier_digest: bytes
    params: RsParams

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=np.uint8)
        if delta.size != self.params.block_bits:
            raise ContractError(
                f"delta must be exactly {self.params.block_bits} bits, got {delta.size}"
            )
        delta.setflags(write=False)
        object.__setattr__(self, "delta", delta)


@dataclass(frozen=True)
class ReconcileFailure:
    reason: str


def commit(
    s_a: np.ndarray, params: RsParams, rng: np.random.Generator
) -> tuple[Commitment, np.ndarray]:
    """Commit to one block of exactly n*m bits; returns (commitment, y)."""
    s_a = np.asarray(s_a, dtype=np.uint8)
    if s_a.size != params.block_bits:
        raise ContractError(
            f"block must be exactly {params.block_bits} bits, got {s_a.size}"
        )
    rs = _codec(params)
    y = rng.integers(0, 1 << params.m, size=params.k)
    codeword_bits = symbols_to_bits(rs.encode(y), params.m)
    delta = s_a ^ codeword_bits
    return Commitment(delta=delta, verifier_digest=_digest(y, params.m), params=params), y


def open_commitment(s_b: np.ndarray, commitment: Commitment, params: RsParams):
    """Recover the committed S_a from Bob's block, or ReconcileFailure."""
    s_b = np.asarray(s_b, dtype=np.uint8)
    if s_b.size != params.block_bits:
        raise ContractError(
            f"block must be exactly {params.block_bits} bits, got {s_b.size}"
        )
    rs = _codec(params)
    c_prime = bits_to_symbols(s_b ^ commitment.delta, params.m)
    y_prime = rs.decode(c_prime)
    if isinstance(y_prime, DecodeFailure):
        return ReconcileFailure(f"decode: {y_prime.reason}")
    if _digest(y_prime, params.m) != commitment.verifier_digest:
        return ReconcileFailure("digest mismatch")
    recovered = symbols_to_bits(rs.encode(y_prime), params.m) ^ commitment.delta
    return recovered


def commit_stream(
    s_a: np.ndarray, params: RsParams, rng: np.random.Generator
) -> tuple[list[Commitment], int]:
    """Commit a whole bitstream block by block; the partial tail is dropped.

    Returns the commitments and the number of bits covered.
    """
    s_a = np.asarray(s_a, dtype=np.uint8)
    nblocks = s_a.size // params.block_bits
    commitments = []
    for b in range(nblocks):
        chunk = s_a[b * params.block_bits : (b + 1) * params.block_bits]
        commitments.append(commit(chunk, params, rng)[0])
    return commitments, nblocks * params.block_bits


def open_stream(s_b: np.ndarray, commitments: list[Commitment], params: RsParams):
    """Open every block; any block failure fails the whole reconciliation."""
    s_b = np.asarray(s_b, dtype=np.uint8)
    need = len(commitments) * params.block_bits
    if s_b.size < need:
        raise ContractError(f"peer stream holds {s_b.size} bits, need {need}")
    parts = []
    for b, cm in enumerate(commitments):
        out = open_commitment(
            s_b[b * params.block_bits : (b + 1) * params.block_bits], cm, params
        )
        if isinstance(out, ReconcileFailure):
            return ReconcileFailure(f"block {b}: {out.reason}")
        parts.append(out)
    if not parts:
        return np.zeros(0, dtype=np.uint8)
    return np.concatenate(parts)


def derive_key(bits: np.ndarray) -> bytes:
    """Final key = SHA-256 of the packed reconciled bitstream."""
    return hashlib.sha256(pack_bits(bits)).digest()


def challenge_response(key: bytes, nonce: bytes) -> bytes:
    return hashlib.sha256(key + nonce).digest()


def verify_keys(
    key_alice: bytes, key_bob: bytes, rng: np.random.Generator
) -> tuple[bool, bytes]:
    """One challenge-response round: Alice's nonce, Bob's keyed response.

    Returns (pass, nonce). A failed verification means key disagreement
    and the protocol run is repeated from probing.
    """
    nonce = rng.integers(0, 256, size=16, dtype=np.uint8).tobytes()
    response = challenge_response(key_bob, nonce)
    expected = challenge_response(key_alice, nonce)
    return response == expected, nonce
