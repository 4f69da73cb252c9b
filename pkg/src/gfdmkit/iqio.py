"""File formats: raw IQ with a JSON sidecar, and plot-ready CSV tables.

IQ files are headerless interleaved little-endian float64 (re, im) pairs;
the sidecar `<name>.meta.json` carries the sample count, the config
fingerprint, and the sample rate when one is set.  CSV always uses '.'
for decimals, ',' as separator, and a header row.
"""
from __future__ import annotations

import csv
import json
import os

import numpy as np

from .errors import DimensionMismatchError, LengthMismatchError
from .modem import ResourceGrid
from .params import GridParams


def meta_path(path: str) -> str:
    return f"{path}.meta.json"


def write_iq(
    path: str,
    samples: np.ndarray,
    config_fingerprint: str | None = None,
    sample_rate_hz: float | None = None,
    extra: dict | None = None,
) -> None:
    x = np.asarray(samples, dtype=complex).ravel()
    flat = np.empty(2 * x.size, dtype="<f8")
    flat[0::2] = x.real
    flat[1::2] = x.imag
    flat.tofile(path)
    meta = {
        "samples": int(x.size),
        "config_fingerprint": config_fingerprint,
        "sample_rate_hz": sample_rate_hz,
    }
    if extra:
        meta.update(extra)
    with open(meta_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_iq(path: str) -> tuple[np.ndarray, dict | None]:
    flat = np.fromfile(path, dtype="<f8")
    if flat.size % 2 != 0:
        raise LengthMismatchError(f"{path}: odd float count {flat.size}, not (re, im) pairs")
    samples = flat[0::2] + 1j * flat[1::2]
    meta = None
    if os.path.exists(meta_path(path)):
        with open(meta_path(path), encoding="utf-8") as fh:
            meta = json.load(fh)
    return samples, meta


def write_grid_csv(path: str, grids) -> None:
    """Demodulated symbols, one row per (block, k, m)."""
    if isinstance(grids, ResourceGrid):
        grids = [grids]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block", "k", "m", "re", "im"])
        for b, rgrid in enumerate(grids):
            for k in range(rgrid.grid.num_subcarriers):
                for m in range(rgrid.grid.num_subsymbols):
                    v = rgrid.symbols[k, m]
                    writer.writerow([b, k, m, repr(float(v.real)), repr(float(v.imag))])


def read_grid_csv(path: str, grid: GridParams) -> ResourceGrid:
    """One block of symbols from rows (k, m, re, im); a leading block
    column is accepted as long as it only contains block 0."""
    symbols = np.zeros((grid.num_subcarriers, grid.num_subsymbols), dtype=complex)
    seen = np.zeros(symbols.shape, dtype=bool)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DimensionMismatchError(f"{path}: empty symbol file")
        cols = [c.strip().lower() for c in header]
        try:
            idx = {name: cols.index(name) for name in ("k", "m", "re", "im")}
        except ValueError:
            raise DimensionMismatchError(
                f"{path}: header must name k, m, re, im columns, got {header}"
            ) from None
        block_col = cols.index("block") if "block" in cols else None
        for row in reader:
            if not row:
                continue
            if block_col is not None and int(row[block_col]) != 0:
                raise DimensionMismatchError(f"{path}: expected a single block 0")
            k, m = int(row[idx["k"]]), int(row[idx["m"]])
            if not (0 <= k < symbols.shape[0] and 0 <= m < symbols.shape[1]):
                raise DimensionMismatchError(
                    f"{path}: position ({k}, {m}) outside the {symbols.shape} grid"
                )
            symbols[k, m] = float(row[idx["re"]]) + 1j * float(row[idx["im"]])
            seen[k, m] = True
    if not seen.all():
        missing = int((~seen).sum())
        raise DimensionMismatchError(f"{path}: {missing} grid positions have no symbol")
    return ResourceGrid(symbols, grid)


def write_pulse_csv(path: str, samples: np.ndarray) -> None:
    """Prototype pulse as (index, re, im) rows."""
    x = np.asarray(samples, dtype=complex).ravel()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "re", "im"])
        for i, v in enumerate(x):
            writer.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def read_pulse_csv(path: str) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DimensionMismatchError(f"{path}: empty pulse file")
        rows = [r for r in reader if r]
    samples = np.zeros(len(rows), dtype=complex)
    for row in rows:
        samples[int(row[0])] = float(row[1]) + 1j * float(row[2])
    return samples


def write_ser_csv(path: str, points) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snr_db", "trials", "symbols", "errors", "ser", "ci_low", "ci_high"])
        for p in points:
            writer.writerow(
                [p.snr_db, p.trials, p.symbols, p.errors, repr(p.ser), repr(p.ci_low), repr(p.ci_high)]
            )


def write_psd_csv(path: str, estimate) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency", "power"])
        for f, p in zip(estimate.frequencies, estimate.power):
            writer.writerow([repr(float(f)), repr(float(p))])


def write_papr_csv(path: str, result) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level_db", "ccdf"])
        for level, prob in zip(result.ccdf_levels_db, result.ccdf_prob):
            writer.writerow([repr(float(level)), repr(float(prob))])


def write_ambiguity_csv(path: str, surface) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_half_steps", "subcarrier_offset", "re", "im", "abs"])
        for i, t in enumerate(surface.time_offsets):
            for j, f in enumerate(surface.freq_offsets):
                v = surface.values[i, j]
                writer.writerow(
                    [int(t), int(f), repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))]
                )


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
