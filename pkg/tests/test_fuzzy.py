import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phykey.errors import ContractError
from phykey.fuzzy import (
    ReconcileFailure,
    bits_to_symbols,
    challenge_response,
    commit,
    commit_stream,
    derive_key,
    open_commitment,
    open_stream,
    pack_bits,
    symbols_to_bits,
    unpack_bits,
    verify_keys,
)
from phykey.reed_solomon import ReedSolomon, RsParams

RS15 = RsParams(m=4, n=15, k=11)


def test_bit_symbol_roundtrip(rng):
    bits = rng.integers(0, 2, size=60).astype(np.uint8)
    again = symbols_to_bits(bits_to_symbols(bits, 4), 4)
    np.testing.assert_array_equal(bits, again)


def test_bits_to_symbols_msb_first():
    assert bits_to_symbols(np.array([1, 0, 0, 1], dtype=np.uint8), 4).tolist() == [9]


def test_pack_unpack_roundtrip(rng):
    bits = rng.integers(0, 2, size=13).astype(np.uint8)
    np.testing.assert_array_equal(unpack_bits(pack_bits(bits), 13), bits)


def test_self_commitment_gives_zero_delta(rng):
    rs = ReedSolomon(RS15)
    y = rng.integers(0, 16, size=11)
    s_a = symbols_to_bits(rs.encode(y), 4)

    class FixedY:
        def integers(self, low, high, size):
            return y

    cm, y_out = commit(s_a, RS15, FixedY())
    np.testing.assert_array_equal(y_out, y)
    assert not cm.delta.any()


def test_commit_open_identity(rng):
    s_a = rng.integers(0, 2, size=60).astype(np.uint8)
    cm, _ = commit(s_a, RS15, rng)
    out = open_commitment(s_a.copy(), cm, RS15)
    np.testing.assert_array_equal(out, s_a)


def test_open_recovers_exact_sa_with_symbol_confined_flips(rng):
    for _ in range(300):
        s_a = rng.integers(0, 2, size=60).astype(np.uint8)
        cm, _ = commit(s_a, RS15, rng)
        s_b = s_a.copy()
        symbols = rng.choice(15, size=2, replace=False)
        for sym in symbols:
            # flip a random nonempty subset of that symbol's 4 bits
            mask = rng.integers(1, 16)
            for b in range(4):
                if mask >> b & 1:
                    s_b[sym * 4 + b] ^= 1
        out = open_commitment(s_b, cm, RS15)
        assert not isinstance(out, ReconcileFailure)
        np.testing.assert_array_equal(out, s_a)


def test_open_flags_beyond_radius_corruption(rng):
    for _ in range(300):
        s_a = rng.integers(0, 2, size=60).astype(np.uint8)
        cm, _ = commit(s_a, RS15, rng)
        s_b = s_a.copy()
        symbols = rng.choice(15, size=3, replace=False)  # t + 1 distinct symbols
        for sym in symbols:
            mask = rng.integers(1, 16)
            for b in range(4):
                if mask >> b & 1:
                    s_b[sym * 4 + b] ^= 1
        out = open_commitment(s_b, cm, RS15)
        assert isinstance(out, ReconcileFailure)


def test_delta_hiding_per_bit_frequency(rng):
    # over fresh private words, each delta bit should look like a fair coin
    s_a = rng.integers(0, 2, size=60).astype(np.uint8)
    trials = 10_000
    acc = np.zeros(60)
    for _ in range(trials):
        cm, _ = commit(s_a, RS15, rng)
        acc += cm.delta
    freq = acc / trials
    assert np.all(np.abs(freq - 0.5) < 0.02)


def test_wrong_length_rejected(rng):
    with pytest.raises(ContractError):
        commit(np.zeros(59, dtype=np.uint8), RS15, rng)


def test_stream_chunking_drops_partial_tail(rng):
    bits = rng.integers(0, 2, size=150).astype(np.uint8)  # 2 blocks + 30 leftover
    commitments, covered = commit_stream(bits, RS15, rng)
    assert len(commitments) == 2
    assert covered == 120
    out = open_stream(bits, commitments, RS15)
    np.testing.assert_array_equal(out, bits[:120])


def test_stream_block_failure_is_flagged(rng):
    bits = rng.integers(0, 2, size=120).astype(np.uint8)
    commitments, _ = commit_stream(bits, RS15, rng)
    bad = bits.copy()
    bad[60:] ^= 1  # clobber the whole second block
    out = open_stream(bad, commitments, RS15)
    assert isinstance(out, ReconcileFailure)
    assert "block 1" in out.reason


@given(st.integers(0, 2**32 - 1), st.integers(0, 2))
@settings(max_examples=50, deadline=None)
def test_commit_open_identity_property(seed, n_bad_symbols):
    rng = np.random.default_rng(seed)
    s_a = rng.integers(0, 2, size=60).astype(np.uint8)
    cm, _ = commit(s_a, RS15, rng)
    s_b = s_a.copy()
    if n_bad_symbols:
        for sym in rng.choice(15, size=n_bad_symbols, replace=False):
            mask = int(rng.integers(1, 16))
            for b in range(4):
                if mask >> b & 1:
                    s_b[sym * 4 + b] ^= 1
    out = open_commitment(s_b, cm, RS15)
    np.testing.assert_array_equal(out, s_a)


def test_verify_keys_pass_and_fail(rng):
    key = derive_key(np.array([1, 0, 1, 1], dtype=np.uint8))
    ok, _ = verify_keys(key, key, rng)
    assert ok
    other = derive_key(np.array([1, 0, 1, 0], dtype=np.uint8))
    ok, _ = verify_keys(key, other, rng)
    assert not ok


def test_replayed_response_fails_fresh_nonce(rng):
    key = derive_key(np.array([1, 1, 0, 0], dtype=np.uint8))
    nonce1 = rng.integers(0, 256, size=16, dtype=np.uint8).tobytes()
    nonce2 = rng.integers(0, 256, size=16, dtype=np.uint8).tobytes()
    assert nonce1 != nonce2
    old_response = challenge_response(key, nonce1)
    assert old_response != challenge_response(key, nonce2)
