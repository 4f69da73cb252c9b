"""Command line front end: synthesis, demodulation, simulation, analysis.

Exit codes: 0 success, 2 rejected input (bad config, incompatible flags,
malformed files), 3 runtime failure (rank-deficient receiver, spectral
nulls, violated preset claims).  Every file-producing run also writes
`<first output>.manifest.json` describing the command, seeds, inputs,
outputs, and wall time, so results can be traced and reproduced.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys
import time

import numpy as np

from . import __version__
from .analysis import (
    MetricReport,
    PaprResult,
    PsdEstimate,
    ambiguity,
    guard_band_leakage,
    inband_mask,
    oob_power,
    orthogonality_metrics,
    papr,
    psd,
    run_ser,
)
from .channel import ChannelModel, load_taps_csv
from .constellations import random_symbols
from .errors import (
    ClaimViolatedError,
    DimensionMismatchError,
    GfdmError,
    IncompatibleHintError,
    IndexOutOfGridError,
    InvalidConfigError,
    LengthMismatchError,
    OddSubsymbolSpacingError,
    OverlappingAllocationsError,
    RankDeficientError,
    SilentSubsymbolsOutOfRangeError,
    TooShortError,
    ZeroBinError,
)
from .framing import FramedBlock, add_cp, concat_blocks, remove_cp, silent_mask
from .iqio import (
    read_grid_csv,
    read_iq,
    write_ambiguity_csv,
    write_grid_csv,
    write_iq,
    write_json,
    write_papr_csv,
    write_psd_csv,
    write_ser_csv,
)
from .modem import BlockSignal, ResourceGrid, build_matrix, demodulate, modulate, oqam_demap, oqam_map
from .params import config_from_json, fingerprint, validate_config
from .presets import PRESET_NAMES, descriptor_to_dict, make_preset
from .pulses import pulse_from_config

OOB_FLOOR_DB = -300.0

METRIC_NAMES = ("psd", "papr", "gram", "ambiguity", "oob")

# (exception, module-qualified code, exit code); checked in order
_ERROR_TABLE = (
    (InvalidConfigError, "params.invalid_config", 2),
    (IncompatibleHintError, "presets.incompatible_hint", 2),
    (SilentSubsymbolsOutOfRangeError, "framing.silent_subsymbols_out_of_range", 2),
    (OddSubsymbolSpacingError, "modem.odd_subsymbol_spacing", 2),
    (RankDeficientError, "modem.rank_deficient", 3),
    (ZeroBinError, "channel.zero_bin", 3),
    (ClaimViolatedError, "presets.claim_violated", 3),
    (DimensionMismatchError, "modem.dimension_mismatch", 2),
    (LengthMismatchError, "framing.length_mismatch", 2),
    (OverlappingAllocationsError, "analysis.overlapping_allocations", 2),
    (TooShortError, "analysis.too_short", 2),
    (IndexOutOfGridError, "pulses.index_out_of_grid", 2),
)


def _classify(exc: Exception) -> tuple[str, int]:
    for cls, code, status in _ERROR_TABLE:
        if isinstance(exc, cls):
            return code, status
    if isinstance(exc, FileNotFoundError):
        return "io.missing_input", 2
    if isinstance(exc, (OSError, json.JSONDecodeError)):
        return "io.unreadable", 2
    if isinstance(exc, (ValueError, GfdmError)):
        return "cli.invalid_argument", 2
    return "cli.internal", 3


def _hints_from_args(args) -> dict:
    pairs = (
        ("k", "subcarriers"),
        ("m", "subsymbols"),
        ("cp", "cp_length"),
        ("rolloff", "rolloff"),
        ("spread", "spread"),
        ("time_scale", "time_scale"),
        ("freq_scale", "freq_scale"),
        ("silent", "silent_subsymbols"),
        ("sample_rate", "sample_rate_hz"),
    )
    hints = {}
    for flag, hint in pairs:
        value = getattr(args, flag, None)
        if value is not None:
            hints[hint] = value
    return hints


def _resolve_config(args, required: bool = True):
    """--config JSON path or --preset name plus size hints."""
    hints = _hints_from_args(args)
    if args.config is not None:
        if hints:
            raise IncompatibleHintError(
                "size hints only apply to --preset; edit the config file instead"
            )
        with open(args.config, encoding="utf-8") as fh:
            validated = validate_config(config_from_json(fh.read()))
        return validated, None
    if args.preset is not None:
        validated, desc = make_preset(args.preset, **hints)
        return validated, desc
    if required:
        raise IncompatibleHintError("one of --config or --preset is required")
    return None, None


def _resolve_path_or_preset(token: str):
    if os.path.exists(token):
        with open(token, encoding="utf-8") as fh:
            return validate_config(config_from_json(fh.read()))
    if token in PRESET_NAMES:
        return make_preset(token)[0]
    raise IncompatibleHintError(f"{token!r} is neither a config file nor a preset name")


def _add_config_flags(parser: argparse.ArgumentParser, required: bool = True) -> None:
    group = parser.add_argument_group("waveform")
    group.add_argument("--config", metavar="PATH", help="waveform config JSON file")
    group.add_argument("--preset", choices=PRESET_NAMES, help="named waveform format")
    group.add_argument("--k", type=int, metavar="N", help="subcarriers (preset hint)")
    group.add_argument("--m", type=int, metavar="N", help="subsymbols (preset hint)")
    group.add_argument("--cp", type=int, metavar="N", help="cyclic prefix length (preset hint)")
    group.add_argument("--rolloff", type=float, metavar="A", help="rc/rrc rolloff (preset hint)")
    group.add_argument("--spread", type=float, metavar="B", help="gaussian spread (preset hint)")
    group.add_argument(
        "--time-scale", dest="time_scale", metavar="FRAC",
        help="subsymbol packing, rational like 4/5 (preset hint)",
    )
    group.add_argument(
        "--freq-scale", dest="freq_scale", metavar="FRAC",
        help="subcarrier packing, rational like 1/2 (preset hint)",
    )
    group.add_argument("--silent", type=int, metavar="N", help="silent subsymbols (preset hint)")
    group.add_argument(
        "--sample-rate", dest="sample_rate", type=float, metavar="HZ",
        help="sample rate recorded in metadata (preset hint)",
    )


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise IncompatibleHintError(message)


def _manifest(args, t0: float, fp: str | None, seed: int | None, inputs, outputs) -> None:
    if not outputs:
        return
    payload = {
        "command": f"gfdmkit {shlex.join(args._argv)}",
        "config_fingerprint": fp,
        "seed": seed,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }
    write_json(f"{outputs[0]}.manifest.json", payload)


def _draw_grid(validated, constellation: str, rng) -> np.ndarray:
    grid = validated.grid
    sent = random_symbols(constellation, (grid.num_subcarriers, grid.num_subsymbols), rng)
    sent[~silent_mask(grid, validated.config.silent_subsymbols)] = 0
    return sent


def _synthesize_block(validated, pulse, symbols: np.ndarray) -> BlockSignal:
    grid = validated.grid
    if validated.config.oqam:
        real_grid = np.empty((grid.num_subcarriers, 2 * grid.num_subsymbols))
        real_grid[:, 0::2] = symbols.real
        real_grid[:, 1::2] = symbols.imag
        return oqam_map(real_grid, pulse, grid)
    return modulate(ResourceGrid(symbols, grid), pulse)


def _frame_stream(validated, pulse, grids) -> np.ndarray:
    cfg = validated.config
    frames = [
        add_cp(_synthesize_block(validated, pulse, g), cfg.cp_length, cfg.cs_window_length)
        for g in grids
    ]
    stream, _ = concat_blocks(frames)
    return stream


# ------------------------------------------------------------- commands

def cmd_presets_list(args) -> int:
    t0 = time.perf_counter()
    lines = []
    for name in PRESET_NAMES:
        validated, desc = make_preset(name)
        grid, cfg = validated.grid, validated.config
        entry = descriptor_to_dict(desc)
        entry["defaults"] = {
            "subcarriers": grid.num_subcarriers,
            "subsymbols": grid.num_subsymbols,
            "block_length": grid.total_samples,
            "cp_length": cfg.cp_length,
            "pulse_kind": cfg.pulse_kind,
            "oqam": cfg.oqam,
            "silent_subsymbols": cfg.silent_subsymbols,
            "time_scale": str(grid.time_scale),
            "freq_scale": str(grid.freq_scale),
            "fingerprint": validated.fingerprint,
        }
        lines.append(json.dumps(entry, sort_keys=True))
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _manifest(args, t0, None, None, [], [args.out])
    return 0


def cmd_synth(args) -> int:
    t0 = time.perf_counter()
    validated, _ = _resolve_config(args)
    cfg, grid = validated.config, validated.grid
    pulse = pulse_from_config(validated)
    inputs = []
    if args.data is not None:
        _require(args.blocks == 1, "--data provides exactly one block; drop --blocks")
        grids = [read_grid_csv(args.data, grid).symbols]
        inputs.append(args.data)
    else:
        grids = [
            _draw_grid(validated, args.constellation, np.random.default_rng((args.random, b)))
            for b in range(args.blocks)
        ]
    stream = _frame_stream(validated, pulse, grids)
    fp = validated.fingerprint
    write_iq(
        args.out,
        stream,
        config_fingerprint=fp,
        sample_rate_hz=cfg.sample_rate_hz,
        extra={
            "blocks": len(grids),
            "frame_length": cfg.cp_length + grid.total_samples,
            "constellation": None if args.data else args.constellation,
        },
    )
    outputs = [args.out, f"{args.out}.meta.json"]
    if args.dump_grid:
        write_grid_csv(args.dump_grid, [ResourceGrid(g, grid) for g in grids])
        outputs.append(args.dump_grid)
    _manifest(args, t0, fp, None if args.data else args.random, inputs, outputs)
    return 0


def cmd_demod(args) -> int:
    t0 = time.perf_counter()
    validated, _ = _resolve_config(args)
    cfg, grid = validated.config, validated.grid
    pulse = pulse_from_config(validated)
    if args.receiver == "mmse":
        _require(args.noise_var is not None, "--receiver mmse needs --noise-var")
    if cfg.oqam and args.receiver != "mf":
        raise IncompatibleHintError("offset-mapped configs demap with --receiver mf")
    samples, meta = read_iq(args.iq)
    fp = validated.fingerprint
    if meta and meta.get("config_fingerprint") not in (None, fp):
        print(
            f"warning: {args.iq} was written for config {meta['config_fingerprint']}, "
            f"demodulating with {fp}",
            file=sys.stderr,
        )
    frame_len = cfg.cp_length + grid.total_samples
    if samples.size == 0 or samples.size % frame_len != 0:
        raise LengthMismatchError(
            f"{args.iq}: {samples.size} samples is not a multiple of the frame length {frame_len}"
        )
    matrix = None if cfg.oqam else build_matrix(pulse, grid)
    out_grids = []
    for b in range(samples.size // frame_len):
        chunk = samples[b * frame_len : (b + 1) * frame_len]
        payload = remove_cp(
            FramedBlock(chunk, cp_length=cfg.cp_length, ramp_length=cfg.cs_window_length)
        )
        if cfg.oqam:
            r = oqam_demap(payload, pulse, grid)
            est = r[:, 0::2] + 1j * r[:, 1::2]
            out_grids.append(ResourceGrid(est, grid))
        else:
            out_grids.append(demodulate(payload, matrix, args.receiver, noise_var=args.noise_var))
    write_grid_csv(args.out, out_grids)
    _manifest(args, t0, fp, None, [args.iq], [args.out])
    return 0


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    validated, _ = _resolve_config(args)
    snr_list = [float(tok) for tok in args.snr.split(",") if tok.strip()]
    _require(bool(snr_list), "--snr needs at least one value")
    _require(args.trials >= 1, "--trials must be >= 1")
    if args.channel == "awgn":
        channel = None
        channel_desc = "awgn"
        inputs = []
    else:
        taps = load_taps_csv(args.channel)
        channel = ChannelModel(taps)
        channel_desc = args.channel
        inputs = [args.channel]
    threads = max(1, args.threads)
    cap = os.environ.get("GFDM_THREADS")
    if cap:
        threads = max(1, min(threads, int(cap)))
    points = run_ser(
        validated,
        channel=channel,
        receiver=args.receiver,
        constellation=args.constellation,
        snr_db=snr_list,
        trials=args.trials,
        seed=args.seed,
        threads=threads,
    )
    fp = validated.fingerprint
    csv_path, json_path = f"{args.out}.csv", f"{args.out}.json"
    write_ser_csv(csv_path, points)
    write_json(
        json_path,
        {
            "config_fingerprint": fp,
            "receiver": args.receiver,
            "constellation": args.constellation,
            "channel": channel_desc,
            "trials": args.trials,
            "seed": args.seed,
            "points": [
                {
                    "snr_db": p.snr_db,
                    "trials": p.trials,
                    "symbols": p.symbols,
                    "errors": p.errors,
                    "ser": p.ser,
                    "ci_low": p.ci_low,
                    "ci_high": p.ci_high,
                }
                for p in points
            ],
        },
    )
    _manifest(args, t0, fp, args.seed, inputs, [csv_path, json_path])
    return 0


def cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    validated, _ = _resolve_config(args, required=False)
    metrics = [tok.strip() for tok in args.metrics.split(",") if tok.strip()]
    for tok in metrics:
        _require(tok in METRIC_NAMES, f"unknown metric {tok!r}, expected {METRIC_NAMES}")
    _require(bool(metrics), "--metrics needs at least one name")
    needs_config = {"gram", "ambiguity", "oob"}
    if validated is None:
        offenders = sorted(needs_config.intersection(metrics))
        _require(not offenders, f"metrics {offenders} need --config or --preset")
        _require(args.iq is not None, "without a config, analysis needs --iq")

    inband_lo, inband_hi = None, None
    if args.inband:
        lo, _, hi = args.inband.partition(":")
        inband_lo, inband_hi = int(lo), int(hi)
        _require(inband_lo < inband_hi, "--inband expects LO:HI with LO < HI")

    inputs = []
    stream = None
    if args.iq is not None:
        stream, _meta = read_iq(args.iq)
        inputs.append(args.iq)
    elif {"psd", "papr", "oob"}.intersection(metrics):
        grid = validated.grid
        allocated = np.arange(grid.num_subcarriers)
        if inband_lo is not None:
            _require(
                0 <= inband_lo and inband_hi <= grid.num_subcarriers,
                f"--inband outside the {grid.num_subcarriers}-subcarrier grid",
            )
            allocated = np.arange(inband_lo, inband_hi)
        pulse = pulse_from_config(validated)
        grids = []
        for b in range(args.blocks):
            sent = _draw_grid(validated, "qpsk", np.random.default_rng((args.random, b)))
            keep = np.zeros(grid.num_subcarriers, dtype=bool)
            keep[allocated] = True
            sent[~keep, :] = 0
            grids.append(sent)
        stream = _frame_stream(validated, pulse, grids)

    report = MetricReport()
    ambiguity_block = None
    if "psd" in metrics or "oob" in metrics:
        segment = args.segment
        if segment is None:
            segment = 4 * validated.grid.total_samples if validated else 1024
        segment = min(segment, stream.size)
        estimate = psd(stream, segment_length=segment)
        report.psd_frequencies = estimate.frequencies
        report.psd_power = estimate.power
        if "oob" in metrics:
            grid = validated.grid
            allocated = (
                np.arange(inband_lo, inband_hi)
                if inband_lo is not None
                else np.arange(grid.num_subcarriers)
            )
            mask = inband_mask(estimate, allocated, grid)
            report.oob_db = max(oob_power(estimate, mask), OOB_FLOOR_DB)
    if "papr" in metrics:
        if validated is not None:
            block = validated.config.cp_length + validated.grid.total_samples
        else:
            block = args.papr_block
        result = papr(stream, block)
        report.papr_db = result.papr_db
        report.papr_ccdf_levels_db = result.ccdf_levels_db
        report.papr_ccdf_prob = result.ccdf_prob
    if "gram" in metrics:
        matrix = build_matrix(pulse_from_config(validated), validated.grid)
        m = orthogonality_metrics(matrix)
        report.gram_max_offdiag = m.gram_max_offdiag
        report.condition_number = m.condition_number
        report.rank = m.rank
    if "ambiguity" in metrics:
        surface = ambiguity(pulse_from_config(validated), validated.grid)
        ambiguity_block = surface

    payload = {
        "config_fingerprint": validated.fingerprint if validated else None,
        "metrics": report.to_dict(),
    }
    if ambiguity_block is not None:
        payload["ambiguity"] = {
            "time_offsets_half_subsymbols": ambiguity_block.time_offsets.tolist(),
            "subcarrier_offsets": ambiguity_block.freq_offsets.tolist(),
            "re": ambiguity_block.values.real.tolist(),
            "im": ambiguity_block.values.imag.tolist(),
        }
    if report.condition_number == math.inf:
        payload["metrics"]["condition_number"] = "inf"
    json_path = f"{args.out}.json"
    outputs = [json_path]
    write_json(json_path, payload)
    if report.psd_frequencies is not None:
        write_psd_csv(f"{args.out}.psd.csv", PsdEstimate(report.psd_frequencies, report.psd_power))
        outputs.append(f"{args.out}.psd.csv")
    if report.papr_db is not None:
        write_papr_csv(
            f"{args.out}.papr.csv",
            PaprResult(report.papr_db, report.papr_ccdf_levels_db, report.papr_ccdf_prob),
        )
        outputs.append(f"{args.out}.papr.csv")
    if ambiguity_block is not None:
        write_ambiguity_csv(f"{args.out}.ambiguity.csv", ambiguity_block)
        outputs.append(f"{args.out}.ambiguity.csv")
    _manifest(
        args, t0, validated.fingerprint if validated else None, args.random, inputs, outputs
    )
    return 0


def cmd_guardband(args) -> int:
    t0 = time.perf_counter()
    validated_a = _resolve_path_or_preset(args.config_a)
    validated_b = _resolve_path_or_preset(args.config_b)
    leakage = guard_band_leakage(
        validated_a,
        validated_b,
        guard_subcarriers=args.guard,
        time_offset=args.offset,
        seed=args.seed,
        draws=args.draws,
    )
    payload = {
        "config_a": validated_a.fingerprint,
        "config_b": validated_b.fingerprint,
        "guard_subcarriers": args.guard,
        "time_offset": args.offset,
        "seed": args.seed,
        "draws": args.draws,
        "leakage_db": leakage if math.isfinite(leakage) else "-inf",
    }
    if args.out:
        write_json(args.out, payload)
        _manifest(args, t0, validated_a.fingerprint, args.seed, [], [args.out])
    else:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    return 0


# ------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gfdmkit",
        description="Block filtered multicarrier toolkit: synthesize, demodulate, "
        "simulate, and measure software-defined waveforms.",
    )
    parser.add_argument("--version", action="version", version=f"gfdmkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("presets", help="inspect the named waveform formats")
    psub = p.add_subparsers(dest="presets_command", required=True, metavar="ACTION")
    pl = psub.add_parser("list", help="print every preset as one JSON object per line")
    pl.add_argument("--out", metavar="PATH", help="also write the listing to a file")
    pl.set_defaults(func=cmd_presets_list)

    p = sub.add_parser("synth", help="synthesize framed blocks to an IQ file")
    _add_config_flags(p)
    p.add_argument("--data", metavar="CSV", help="symbol grid to send (k,m,re,im)")
    p.add_argument("--random", type=int, default=0, metavar="SEED",
                   help="draw random symbols with this seed (default 0)")
    p.add_argument("--constellation", choices=("qpsk", "qam16"), default="qpsk")
    p.add_argument("--blocks", type=int, default=1, metavar="N",
                   help="number of framed blocks (default 1)")
    p.add_argument("--dump-grid", dest="dump_grid", metavar="CSV",
                   help="also write the transmitted symbol grid")
    p.add_argument("--out", required=True, metavar="IQ", help="output IQ file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("demod", help="demodulate an IQ file back to symbol grids")
    _add_config_flags(p)
    p.add_argument("--iq", required=True, metavar="IQ", help="input IQ file")
    p.add_argument("--receiver", choices=("mf", "zf", "mmse"), default="mf")
    p.add_argument("--noise-var", dest="noise_var", type=float, metavar="VAR",
                   help="noise variance for the mmse receiver")
    p.add_argument("--out", required=True, metavar="CSV", help="output grid CSV")
    p.set_defaults(func=cmd_demod)

    p = sub.add_parser("simulate", help="Monte-Carlo symbol error rates")
    _add_config_flags(p)
    p.add_argument("--channel", default="awgn", metavar="awgn|TAPS.csv",
                   help="awgn or a taps CSV file (default awgn)")
    p.add_argument("--snr", default="0,4,8,12", metavar="LIST",
                   help="comma-separated SNR points in dB (default 0,4,8,12)")
    p.add_argument("--trials", type=int, default=100, metavar="N",
                   help="blocks per SNR point (default 100)")
    p.add_argument("--receiver", choices=("mf", "zf", "mmse"), default="mf")
    p.add_argument("--constellation", choices=("qpsk", "qam16"), default="qpsk")
    p.add_argument("--seed", type=int, default=0, metavar="SEED")
    p.add_argument("--threads", type=int, default=1, metavar="N",
                   help="worker threads across trials; capped by GFDM_THREADS")
    p.add_argument("--out", required=True, metavar="BASE",
                   help="writes BASE.csv and BASE.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="measure spectra, PAPR, orthogonality, ambiguity")
    _add_config_flags(p, required=False)
    p.add_argument("--iq", metavar="IQ", help="measure this IQ stream instead of synthesizing")
    p.add_argument("--metrics", default="psd,papr,gram", metavar="LIST",
                   help="comma list from psd,papr,gram,ambiguity,oob (default psd,papr,gram)")
    p.add_argument("--random", type=int, default=0, metavar="SEED",
                   help="seed for the synthesized stream (default 0)")
    p.add_argument("--blocks", type=int, default=100, metavar="N",
                   help="synthesized blocks when no --iq is given (default 100)")
    p.add_argument("--segment", type=int, metavar="N",
                   help="PSD segment length (default 4x block length)")
    p.add_argument("--inband", metavar="LO:HI",
                   help="allocated subcarrier range for oob (default all)")
    p.add_argument("--papr-block", dest="papr_block", type=int, default=1024, metavar="N",
                   help="PAPR block size when only --iq is given (default 1024)")
    p.add_argument("--out", required=True, metavar="BASE",
                   help="writes BASE.json plus per-metric CSVs")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("guardband", help="two-user leakage across a guard band")
    p.add_argument("config_a", metavar="CONFIG_A", help="config JSON path or preset name")
    p.add_argument("config_b", metavar="CONFIG_B", help="config JSON path or preset name")
    p.add_argument("--guard", type=int, default=1, metavar="N",
                   help="guard subcarriers between the users (default 1)")
    p.add_argument("--offset", type=int, default=0, metavar="SAMPLES",
                   help="circular delay of user B (default 0)")
    p.add_argument("--seed", type=int, default=0, metavar="SEED")
    p.add_argument("--draws", type=int, default=4, metavar="N",
                   help="random symbol draws to average (default 4)")
    p.add_argument("--out", metavar="JSON", help="report path (default: print to stdout)")
    p.set_defaults(func=cmd_guardband)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single exit point maps errors to codes
        code, status = _classify(exc)
        if status == 3 and code == "cli.internal":
            raise
        print(f"error {code}: {exc}", file=sys.stderr)
        return status


if __name__ == "__main__":
    sys.exit(main())
