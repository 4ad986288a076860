"""Trace CSV, packed bitstream, and commitment file formats.

Trace CSV: header `round,mode,x_a,x_b,rss_ma,rss_mb,injected`, one row
per probing round, dBm values with 4 decimals. The same format is the
replay-ingestion input; replayed experiment captures may omit the mode
and injected columns.

Bitstreams: packed binary, MSB-first within bytes, zero-padded tail,
plus a `<name>.rounds` sidecar listing each bit's source round (one
per line, so the sidecar also fixes the exact bit count).

Commitment file: little-endian header (magic, m, n, k, block count)
followed by one 32-byte digest plus one packed delta blob per block.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import TraceFormatError
from .fuzzy import Commitment, pack_bits, unpack_bits
from .quantize import Bitstream
from .reed_solomon import RsParams
from .session import MeasurementTrace

TRACE_HEADER = ["round", "mode", "x_a", "x_b", "rss_ma", "rss_mb", "injected"]
REQUIRED_COLUMNS = ["round", "x_a", "x_b", "rss_ma", "rss_mb"]
_COMMIT_MAGIC = b"PKFC"


def export_trace_csv(trace: MeasurementTrace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(TRACE_HEADER) + "\n")
        for i in range(trace.n_rounds):
            fh.write(
                f"{i},{int(trace.mode[i])},{trace.x_a[i]:.4f},{trace.x_b[i]:.4f},"
                f"{trace.rss_ma[i]:.4f},{trace.rss_mb[i]:.4f},{int(trace.injected[i])}\n"
            )


def ingest_trace(
    path,
    p_x_dbm: float = 0.0,
    injection_power_dbm: float | None = None,
    coherence_block_rounds: int = 1,
    scheme: str = "RAKG",
) -> MeasurementTrace:
    """Parse a trace CSV back into a replay-ready MeasurementTrace.

    Requires the round,x_a,x_b,rss_ma,rss_mb columns; mode and injected
    are optional (zero when absent, as in raw experiment captures).
    """
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline().strip()
        if not header_line:
            raise TraceFormatError(f"{path}: empty file")
        columns = [c.strip() for c in header_line.split(",")]
        missing = [c for c in REQUIRED_COLUMNS if c not in columns]
        if missing:
            raise TraceFormatError(f"{path}: missing column(s) {', '.join(missing)}")
        idx = {c: columns.index(c) for c in columns}
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(columns):
                raise TraceFormatError(
                    f"{path}: row {lineno}: expected {len(columns)} fields, got {len(parts)}"
                )
            try:
                rows.append([float(v) for v in parts])
            except ValueError as exc:
                raise TraceFormatError(f"{path}: row {lineno}: {exc}") from None
    if not rows:
        raise TraceFormatError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(data[:, [idx[c] for c in REQUIRED_COLUMNS]])):
        bad = int(
            np.nonzero(
                ~np.all(np.isfinite(data[:, [idx[c] for c in REQUIRED_COLUMNS]]), axis=1)
            )[0][0]
        )
        raise TraceFormatError(f"{path}: row {bad + 2}: non-finite value")
    n = data.shape[0]
    mode = data[:, idx["mode"]].astype(np.int64) if "mode" in idx else np.zeros(n, np.int64)
    injected = (
        data[:, idx["injected"]].astype(bool) if "injected" in idx else np.zeros(n, bool)
    )
    return MeasurementTrace(
        mode=mode,
        x_a=data[:, idx["x_a"]],
        x_b=data[:, idx["x_b"]],
        rss_ma=data[:, idx["rss_ma"]],
        rss_mb=data[:, idx["rss_mb"]],
        injected=injected,
        p_x_dbm=p_x_dbm,
        injection_power_dbm=p_x_dbm if injection_power_dbm is None else injection_power_dbm,
        coherence_block_rounds=coherence_block_rounds,
        scheme=scheme,
    )


def write_bitstream(path, stream: Bitstream) -> None:
    path = Path(path)
    path.write_bytes(pack_bits(stream.bits))
    sidecar = path.with_suffix(path.suffix + ".rounds")
    with open(sidecar, "w", encoding="utf-8") as fh:
        for r in stream.source_rounds:
            fh.write(f"{int(r)}\n")


def read_bitstream(path) -> Bitstream:
    """Read a packed bitstream; the sidecar fixes length and source rounds.

    Without a sidecar the whole padded byte payload is taken as bits and
    source rounds default to 0..n-1.
    """
    path = Path(path)
    blob = path.read_bytes()
    sidecar = path.with_suffix(path.suffix + ".rounds")
    if sidecar.exists():
        with open(sidecar, "r", encoding="utf-8") as fh:
            rounds = [int(line) for line in fh if line.strip()]
        bits = unpack_bits(blob, len(rounds))
        return Bitstream(bits=bits, source_rounds=np.asarray(rounds, dtype=np.int64))
    bits = np.unpackbits(np.frombuffer(blob, dtype=np.uint8))
    return Bitstream(bits=bits, source_rounds=np.arange(bits.size, dtype=np.int64))


def write_commitments(path, commitments: list[Commitment], params: RsParams) -> None:
    blob_len = (params.block_bits + 7) // 8
    with open(path, "wb") as fh:
        fh.write(_COMMIT_MAGIC)
        fh.write(struct.pack("<BHHI", params.m, params.n, params.k, len(commitments)))
        for cm in commitments:
            fh.write(cm.verifier_digest)
            packed = pack_bits(cm.delta)
            assert len(packed) == blob_len
            fh.write(packed)


def read_commitments(path) -> tuple[list[Commitment], RsParams]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _COMMIT_MAGIC:
            raise TraceFormatError(f"{path}: not a commitment file")
        m, n, k, count = struct.unpack("<BHHI", fh.read(9))
        params = RsParams(m=m, n=n, k=k)
        blob_len = (params.block_bits + 7) // 8
        commitments = []
        for b in range(count):
            digest = fh.read(32)
            blob = fh.read(blob_len)
            if len(digest) != 32 or len(blob) != blob_len:
                raise TraceFormatError(f"{path}: truncated block {b}")
            delta = unpack_bits(blob, params.block_bits)
            commitments.append(
                Commitment(delta=delta, verifier_digest=digest, params=params)
            )
    return commitments, params
