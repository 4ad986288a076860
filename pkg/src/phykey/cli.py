"""Command-line surface: simulate, analyze, replay, commit, open,
randomness, gen-profile.

Exit codes: 0 success, 1 usage, 2 validation (config/format/contract),
3 runtime (including reconciliation/verification failures under
--strict).
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import fuzzy, metrics, pipeline, traceio
from .antenna import save_antenna_profile, synthesize_rotated_beam
from .config import parse_config
from .errors import (
    ConfigError,
    ContractError,
    GeometryError,
    PhykeyError,
    ProfileError,
    ProtocolError,
    TraceFormatError,
)
from .reed_solomon import RsParams

EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

_VALIDATION_ERRORS = (
    ConfigError,
    ProfileError,
    GeometryError,
    ContractError,
    ProtocolError,
    TraceFormatError,
)


class RuntimeFailure(PhykeyError):
    """Raised for --strict failures and other runtime problems."""


def _emit(data, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(data, indent=2, sort_keys=True, default=str))
    else:
        rows = data if isinstance(data, list) else [data]
        keys = sorted({k for row in rows for k in row if not isinstance(row[k], (dict, list))})
        click.echo(",".join(keys))
        for row in rows:
            click.echo(",".join(str(row.get(k, "")) for k in keys))


def _load_config(config_path, seed):
    cfg = parse_config(config_path)
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": int(seed)})
    return cfg


def _summary(report: metrics.SessionReport) -> dict:
    d = report.to_dict()
    d.pop("attack_rounds", None)
    return d


@click.group()
def cli():
    """Physical-layer key generation simulator and analysis toolkit."""


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--trials", type=int, default=1, show_default=True)
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--strict", is_flag=True, default=False)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def simulate(config_path, seed, trials, out_dir, strict, fmt):
    """Run seeded key-generation sessions with the configured adversary."""
    cfg = _load_config(config_path, seed)
    if trials < 1:
        raise click.UsageError("--trials must be >= 1")
    if trials == 1:
        report, _, _ = pipeline.run_experiment(cfg, out_dir=out_dir)
        reports = [report]
    else:
        reports = pipeline.run_trials(cfg, trials)
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "report.json", "w", encoding="utf-8") as fh:
                json.dump([_summary(r) for r in reports], fh, indent=2, sort_keys=True)
                fh.write("\n")
    _emit([_summary(r) for r in reports], fmt)
    if strict and any(
        r.reconciliation_ok is False or r.verification_ok is False for r in reports
    ):
        raise RuntimeFailure("reconciliation or verification failed")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
@click.option("--report", "report_path", type=click.Path(exists=True), default=None,
              help="Pull thresholds and counts from a simulate report.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def analyze(config_path, seed, report_path, fmt):
    """Closed-form p0/p1 and, when counts are available, rates and p_key."""
    cfg = _load_config(config_path, seed)
    q_minus = q_plus = None
    counts = None
    if report_path is not None:
        with open(report_path, "r", encoding="utf-8") as fh:
            rep = json.load(fh)
        if rep.get("thresholds_alice"):
            q_minus, q_plus = rep["thresholds_alice"]
        counts = (rep["ell"], rep["n"], rep["n0"])
    result = pipeline.analyze_config(cfg, q_minus=q_minus, q_plus=q_plus, counts=counts)
    out = result.to_dict()
    out.pop("pmf", None)  # too bulky for the report; use the API for the full PMF
    _emit(out, fmt)


@cli.command()
@click.argument("trace_csv", type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--strict", is_flag=True, default=False)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def replay(trace_csv, config_path, seed, out_dir, strict, fmt):
    """Re-run quantization and attack accounting on a recorded trace."""
    cfg = _load_config(config_path, seed)
    trace = traceio.ingest_trace(
        trace_csv,
        injection_power_dbm=cfg.attack.injection_power_dbm,
        coherence_block_rounds=cfg.coherence_block_rounds,
        scheme=cfg.scheme,
    )
    report, trace, protocol = pipeline.replay_trace(trace, cfg)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        traceio.export_trace_csv(trace, out / "trace.csv")
        traceio.write_bitstream(out / "alice.bits", protocol.s_a)
        traceio.write_bitstream(out / "bob.bits", protocol.s_b)
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    _emit(_summary(report), fmt)
    if strict and (report.reconciliation_ok is False or report.verification_ok is False):
        raise RuntimeFailure("reconciliation or verification failed")


def _rs_from_options(symbol_bits, n, k) -> RsParams:
    return RsParams(m=symbol_bits, n=n, k=k)


@cli.command()
@click.argument("bitstream", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", type=int, required=True)
@click.option("--symbol-bits", type=int, default=4, show_default=True)
@click.option("--n", type=int, default=15, show_default=True)
@click.option("--k", type=int, default=11, show_default=True)
def commit(bitstream, out, seed, symbol_bits, n, k):
    """Commit to a bitstream file; emits the commitment blob."""
    params = _rs_from_options(symbol_bits, n, k)
    stream = traceio.read_bitstream(bitstream)
    commitments, covered = fuzzy.commit_stream(
        stream.bits, params, np.random.default_rng(seed)
    )
    traceio.write_commitments(out, commitments, params)
    click.echo(
        json.dumps(
            {"blocks": len(commitments), "covered_bits": covered, "out": str(out)}
        )
    )


@cli.command(name="open")
@click.argument("bitstream", type=click.Path(exists=True))
@click.option("--commitments", "commit_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None,
              help="Write the recovered bitstream here on success.")
@click.option("--strict", is_flag=True, default=False)
def open_cmd(bitstream, commit_path, out, strict):
    """Open a commitment with the peer's bitstream."""
    stream = traceio.read_bitstream(bitstream)
    commitments, params = traceio.read_commitments(commit_path)
    recovered = fuzzy.open_stream(stream.bits, commitments, params)
    if isinstance(recovered, fuzzy.ReconcileFailure):
        click.echo(json.dumps({"ok": False, "reason": recovered.reason}))
        if strict:
            raise RuntimeFailure(f"reconciliation failed: {recovered.reason}")
        return
    if out is not None:
        from .quantize import Bitstream

        traceio.write_bitstream(
            out,
            Bitstream(
                bits=recovered, source_rounds=np.arange(recovered.size, dtype=np.int64)
            ),
        )
    click.echo(
        json.dumps(
            {
                "ok": True,
                "recovered_bits": int(recovered.size),
                "key_sha256": fuzzy.derive_key(recovered).hex(),
            }
        )
    )


@cli.command()
@click.argument("bitstream", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def randomness(bitstream, fmt):
    """Run the four-test randomness battery on a bitstream file."""
    stream = traceio.read_bitstream(bitstream)
    results = metrics.randomness_tests(stream.bits)
    if fmt == "json":
        _emit({k: v.to_dict() for k, v in results.items()}, "json")
    else:
        _emit([v.to_dict() for v in results.values()], "csv")


@cli.command(name="gen-profile")
@click.option("--out", required=True, type=click.Path())
@click.option("--modes", type=int, default=360, show_default=True)
@click.option("--front-to-back-db", type=float, default=20.0, show_default=True)
@click.option("--beam-exponent", type=float, default=1.0, show_default=True)
def gen_profile(out, modes, front_to_back_db, beam_exponent):
    """Emit a synthesized rotated-beam profile CSV."""
    profile = synthesize_rotated_beam(
        mode_count=modes,
        front_to_back_db=front_to_back_db,
        beam_exponent=beam_exponent,
    )
    save_antenna_profile(profile, out)
    click.echo(json.dumps({"modes": modes, "out": str(out)}))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except _VALIDATION_ERRORS as exc:
        click.echo(f"validation error: {exc}", err=True)
        return EXIT_VALIDATION
    except RuntimeFailure as exc:
        click.echo(f"runtime failure: {exc}", err=True)
        return EXIT_RUNTIME
    except PhykeyError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RUNTIME
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
