import numpy as np
import pytest

from phykey.errors import ContractError
from phykey.galois import field
from phykey.reed_solomon import DecodeFailure, ReedSolomon, RsParams, rs_decode, rs_encode

RS15 = RsParams(m=4, n=15, k=11)


def test_params_validation():
    with pytest.raises(ContractError):
        RsParams(m=4, n=16, k=11)  # n > 2^m - 1
    with pytest.raises(ContractError):
        RsParams(m=4, n=15, k=15)
    assert RS15.t == 2
    assert RS15.block_bits == 60
    assert RS15.parity_bits == 16


def test_zero_word_encodes_to_zero_codeword():
    np.testing.assert_array_equal(rs_encode(np.zeros(11, dtype=int), RS15), np.zeros(15))


def test_encoding_is_systematic_and_roundtrips(rng):
    word = rng.integers(0, 16, size=11)
    cw = rs_encode(word, RS15)
    np.testing.assert_array_equal(cw[:11], word)
    np.testing.assert_array_equal(rs_decode(cw, RS15), word)


def test_codeword_syndromes_vanish_at_generator_roots(rng):
    # independent oracle: evaluate the codeword polynomial at alpha^i
    gf = field(4)
    word = rng.integers(0, 16, size=11)
    cw = rs_encode(word, RS15)
    for i in range(15 - 11):
        root = gf.pow(2, i)
        acc = 0
        for sym in cw:  # cw[0] is the highest-degree coefficient
            acc = gf.mul(acc, root) ^ int(sym)
        assert acc == 0


def test_encode_linearity(rng):
    w1 = rng.integers(0, 16, size=11)
    w2 = rng.integers(0, 16, size=11)
    c1, c2 = rs_encode(w1, RS15), rs_encode(w2, RS15)
    np.testing.assert_array_equal(rs_encode(w1 ^ w2, RS15), c1 ^ c2)


def test_symbol_out_of_range_rejected():
    with pytest.raises(ContractError):
        rs_encode(np.array([16] + [0] * 10), RS15)
    with pytest.raises(ContractError):
        rs_decode(np.array([16] + [0] * 14), RS15)


@pytest.mark.parametrize("params", [RS15, RsParams(m=4, n=13, k=7), RsParams(m=6, n=63, k=45)])
def test_corrects_up_to_t_random_errors(params, rng):
    rs = ReedSolomon(params)
    for _ in range(200):
        word = rng.integers(0, 1 << params.m, size=params.k)
        cw = rs.encode(word)
        n_err = int(rng.integers(1, params.t + 1))
        pos = rng.choice(params.n, size=n_err, replace=False)
        bad = cw.copy()
        for j in pos:
            bad[j] ^= int(rng.integers(1, 1 << params.m))
        out = rs.decode(bad)
        assert not isinstance(out, DecodeFailure)
        np.testing.assert_array_equal(out, word)


def test_exhaustive_two_symbol_flips_randomized(rng):
    # the reconciliation contract at desk scale: 1000 random <= t corruptions
    rs = ReedSolomon(RS15)
    word = rng.integers(0, 16, size=11)
    cw = rs.encode(word)
    for _ in range(1000):
        pos = rng.choice(15, size=2, replace=False)
        bad = cw.copy()
        for j in pos:
            bad[j] ^= int(rng.integers(1, 16))
        np.testing.assert_array_equal(rs.decode(bad), word)


def test_beyond_radius_never_returns_original(rng):
    # t+1 distinct-symbol corruptions: decoder may fail or miscorrect to a
    # different word, but can never silently return the original
    rs = ReedSolomon(RS15)
    for _ in range(500):
        word = rng.integers(0, 16, size=11)
        cw = rs.encode(word)
        pos = rng.choice(15, size=RS15.t + 1, replace=False)
        bad = cw.copy()
        for j in pos:
            bad[j] ^= int(rng.integers(1, 16))
        out = rs.decode(bad)
        if not isinstance(out, DecodeFailure):
            assert not np.array_equal(out, word)


def test_exhaustive_all_error_patterns_small_code(rng):
    # RS(7,3) over GF(8), t=2: every single- and double-symbol error
    # pattern with every nonzero magnitude must decode back
    params = RsParams(m=3, n=7, k=3)
    rs = ReedSolomon(params)
    word = rng.integers(0, 8, size=3)
    cw = rs.encode(word)
    for i in range(7):
        for e1 in range(1, 8):
            bad = cw.copy()
            bad[i] ^= e1
            np.testing.assert_array_equal(rs.decode(bad), word)
    for i in range(7):
        for j in range(i + 1, 7):
            for e1 in range(1, 8):
                for e2 in range(1, 8):
                    bad = cw.copy()
                    bad[i] ^= e1
                    bad[j] ^= e2
                    out = rs.decode(bad)
                    assert not isinstance(out, DecodeFailure)
                    np.testing.assert_array_equal(out, word)


def test_big_default_instance_roundtrip(rng):
    params = RsParams(m=8, n=255, k=223)
    rs = ReedSolomon(params)
    word = rng.integers(0, 256, size=223)
    cw = rs.encode(word)
    pos = rng.choice(255, size=params.t, replace=False)
    bad = cw.copy()
    for j in pos:
        bad[j] ^= int(rng.integers(1, 256))
    np.testing.assert_array_equal(rs.decode(bad), word)
