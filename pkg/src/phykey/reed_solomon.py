"""Systematic Reed-Solomon codec over GF(2^m).

Encoding appends n-k parity symbols by polynomial division with the
generator polynomial prod_{i=0}^{n-k-1} (x - alpha^i). Decoding is the
classic bounded-distance chain: syndromes, Berlekamp-Massey for the
error locator, Chien search for its roots, Forney for the magnitudes.
Anything beyond t = floor((n-k)/2) symbol errors yields DecodeFailure
or (rarely) a valid-looking wrong word; callers needing certainty must
verify a digest, as the fuzzy commitment does.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .galois import field


@dataclass(frozen=True)
class RsParams:
    """Code geometry: m-bit symbols, n total, k data, t correctable."""

    m: int
    n: int
    k: int

    def __post_init__(self):
        if self.m < 2:
            raise ContractError("need m >= 2 bits per symbol")
        if not (1 <= self.k < self.n <= (1 << self.m) - 1):
            raise ContractError(
                f"require 1 <= k < n <= 2^m - 1, got (m={self.m}, n={self.n}, k={self.k})"
            )

    @property
    def t(self) -> int:
        return (self.n - self.k) // 2

    @property
    def block_bits(self) -> int:
        return self.n * self.m

    @property
    def parity_bits(self) -> int:
        return (self.n - self.k) * self.m


@dataclass(frozen=True)
class DecodeFailure:
    """Bounded-distance decoding gave up; a value, not an exception."""

    reason: str


class ReedSolomon:
    """Encoder/decoder for a fixed RsParams instance.

    Position j of a codeword array carries the coefficient of
    x^(n-1-j); syndromes are evaluations at alpha^0 .. alpha^(n-k-1).
    """

    def __init__(self, params: RsParams):
        self.params = params
        self.gf = field(params.m)
        self.generator = self._generator_poly(params.n - params.k)

    def _generator_poly(self, nsym: int) -> list[int]:
        gf = self.gf
        g = [1]
        for i in range(nsym):
            root = gf.pow(2, i)
            nxt = [0] * (len(g) + 1)
            for j, c in enumerate(g):
                nxt[j] ^= c
                nxt[j + 1] ^= gf.mul(c, root)
            g = nxt
        return g

    def encode(self, word) -> np.ndarray:
        """Systematic codeword: the k data symbols followed by parity."""
        p = self.params
        word = np.asarray(word, dtype=np.int64)
        if word.shape != (p.k,):
            raise ContractError(f"word must have exactly {p.k} symbols")
        if word.size and (word.min() < 0 or word.max() >= (1 << p.m)):
            raise ContractError("symbol outside field range")
        gf = self.gf
        nsym = p.n - p.k
        rem = [0] * nsym
        for sym in word.tolist():
            factor = sym ^ rem[0]
            rem = rem[1:] + [0]
            if factor:
                for j in range(nsym):
                    rem[j] ^= gf.mul(self.generator[j + 1], factor)
        return np.concatenate([word, np.asarray(rem, dtype=np.int64)])

    def _syndromes(self, received) -> list[int]:
        gf = self.gf
        nsym = self.params.n - self.params.k
        out = []
        for i in range(nsym):
            root = gf.pow(2, i)
            acc = 0
            for sym in received:
                acc = gf.mul(acc, root) ^ int(sym)
            out.append(acc)
        return out

    def _berlekamp_massey(self, synd: list[int]) -> list[int]:
        """Minimal LFSR (error locator) for the syndrome sequence."""
        gf = self.gf
        nsym = len(synd)
        c = [1] + [0] * nsym
        b = [1] + [0] * nsym
        l, gap, last_d = 0, 1, 1
        for n in range(nsym):
            d = synd[n]
            for i in range(1, l + 1):
                d ^= gf.mul(c[i], synd[n - i])
            if d == 0:
                gap += 1
                continue
            coef = gf.div(d, last_d)
            if 2 * l <= n:
                prev = c[:]
                for i in range(nsym + 1 - gap):
                    if b[i]:
                        c[i + gap] ^= gf.mul(coef, b[i])
                l = n + 1 - l
                b = prev
                last_d = d
                gap = 1
            else:
                for i in range(nsym + 1 - gap):
                    if b[i]:
                        c[i + gap] ^= gf.mul(coef, b[i])
                gap += 1
        return c[: l + 1]

    def decode(self, received):
        """Corrected data word, or DecodeFailure beyond the t radius."""
        p = self.params
        received = np.asarray(received, dtype=np.int64)
        if received.shape != (p.n,):
            raise ContractError(f"received must have exactly {p.n} symbols")
        if received.min() < 0 or received.max() >= (1 << p.m):
            raise ContractError("symbol outside field range")
        gf = self.gf
        synd = self._syndromes(received)
        if not any(synd):
            return received[: p.k].copy()
        locator = self._berlekamp_massey(synd)
        n_errors = len(locator) - 1
        if n_errors > p.t:
            return DecodeFailure(f"locator degree {n_errors} exceeds t={p.t}")
        # Chien search: position j holds degree n-1-j; error there means
        # the locator vanishes at alpha^{-(n-1-j)}.
        order = gf.order - 1
        positions = []
        roots_x = []  # X_k = alpha^{degree}
        for j in range(p.n):
            deg = p.n - 1 - j
            xinv = int(gf.exp[(order - deg % order) % order])
            acc = 0
            for i, coef in enumerate(locator):
                acc ^= gf.mul(coef, gf.pow(xinv, i))
            if acc == 0:
                positions.append(j)
                roots_x.append(int(gf.exp[deg % order]))
        if len(positions) != n_errors:
            return DecodeFailure(
                f"locator of degree {n_errors} has {len(positions)} roots"
            )
        # Forney with fcr = 0: e_k = X_k * Omega(X_k^-1) / Lambda'(X_k^-1)
        nsym = p.n - p.k
        omega = [0] * nsym
        for i in range(nsym):
            acc = 0
            for j in range(min(i + 1, len(locator))):
                acc ^= gf.mul(locator[j], synd[i - j])
            omega[i] = acc
        corrected = received.copy()
        for j, x_k in zip(positions, roots_x):
            xinv = gf.inv(x_k)
            num = 0
            for i, coef in enumerate(omega):
                num ^= gf.mul(coef, gf.pow(xinv, i))
            den = 0
            for i in range(1, len(locator), 2):
                den ^= gf.mul(locator[i], gf.pow(xinv, i - 1))
            if den == 0:
                return DecodeFailure("Forney denominator vanished")
            corrected[j] ^= gf.mul(x_k, gf.div(num, den))
        if any(self._syndromes(corrected)):
            return DecodeFailure("correction did not clear the syndromes")
        return corrected[: p.k].copy()


def rs_encode(word, params: RsParams) -> np.ndarray:
    return ReedSolomon(params).encode(word)


def rs_decode(received, params: RsParams):
    return ReedSolomon(params).decode(received)
