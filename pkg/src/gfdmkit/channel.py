"""Multipath and AWGN channel plus single-tap frequency-domain equalization."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import LengthMismatchError, ZeroBinError
from .framing import FramedBlock
from .modem import BlockSignal

ZERO_BIN_THRESHOLD = 1e-12


@dataclass(frozen=True)
class ChannelModel:
    """Static FIR channel with optional white noise.

    taps are normalized to unit energy on construction so the configured
    SNR keeps its meaning; snr_db = None means noiseless.  All randomness
    is drawn from a generator seeded with rng_seed, so a given model applied
    to a given frame is reproducible.
    """

    taps: np.ndarray
    snr_db: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps, dtype=complex))
        norm = np.linalg.norm(taps)
        if norm == 0:
            raise ValueError("channel taps are all zero")
        object.__setattr__(self, "taps", taps / norm)

    @classmethod
    def awgn(cls, snr_db: float, rng_seed: int = 0) -> "ChannelModel":
        return cls(taps=np.ones(1), snr_db=snr_db, rng_seed=rng_seed)

    @classmethod
    def multipath(cls, taps, snr_db: float | None = None, rng_seed: int = 0) -> "ChannelModel":
        return cls(taps=taps, snr_db=snr_db, rng_seed=rng_seed)

    def with_seed(self, rng_seed: int) -> "ChannelModel":
        return replace(self, rng_seed=rng_seed)


def noise_variance(samples: np.ndarray, snr_db: float) -> float:
    """Per-sample complex noise variance for an SNR relative to the mean
    power of the transmitted frame (guard included)."""
    power = float(np.mean(np.abs(samples) ** 2))
    return power / 10.0 ** (snr_db / 10.0)


def apply_channel(
    frame: FramedBlock,
    channel: ChannelModel,
    rng: np.random.Generator | None = None,
) -> FramedBlock:
    """Convolve the frame with the taps (tail truncated at the frame end)
    and add circular-symmetric white noise at the configured SNR.

    Noise comes from `rng` when given, so callers running many frames can
    keep one stream; otherwise each call reseeds from channel.rng_seed."""
    x = frame.samples
    y = np.convolve(x, channel.taps)[: len(x)]
    if channel.snr_db is not None:
        var = noise_variance(x, channel.snr_db)
        if rng is None:
            rng = np.random.default_rng(channel.rng_seed)
        noise = rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y))
        y = y + noise * np.sqrt(var / 2.0)
    return FramedBlock(
        y,
        cp_length=frame.cp_length,
        ramp_length=frame.ramp_length,
        zero_padded=frame.zero_padded,
        taps_exceed_cp=len(channel.taps) - 1 > frame.cp_length,
    )


def fde_equalize(
    block: BlockSignal,
    taps,
    mode: str = "zf",
    noise_var: float | None = None,
) -> BlockSignal:
    """Per-bin equalization of one unframed block.

    The S-point channel response is the DFT of the zero-padded taps.
    mode "zf" divides by it and raises ZeroBinError when any bin magnitude
    is below 1e-12; mode "mmse" applies conj(H) / (|H|^2 + noise_var).
    """
    x = np.asarray(block.samples, dtype=complex)
    taps = np.atleast_1d(np.asarray(taps, dtype=complex))
    if len(taps) > len(x):
        raise LengthMismatchError(
            f"{len(taps)} taps exceed the {len(x)}-sample block"
        )
    H = np.fft.fft(taps, n=len(x))
    X = np.fft.fft(x)
    if mode == "zf":
        dead = np.flatnonzero(np.abs(H) < ZERO_BIN_THRESHOLD)
        if dead.size:
            raise ZeroBinError(dead)
        Y = X / H
    elif mode == "mmse":
        if noise_var is None:
            raise ValueError("mmse equalization needs an explicit noise_var")
        Y = X * H.conj() / (np.abs(H) ** 2 + noise_var)
    else:
        raise ValueError(f"unknown mode {mode!r}, expected 'zf' or 'mmse'")
    return BlockSignal(np.fft.ifft(Y), framed=False)


def load_taps_csv(path) -> np.ndarray:
    """Read channel taps from CSV with one `re,im` pair per line (a header
    row is allowed and skipped)."""
    taps = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            re, im = line.split(",")[:2]
            try:
                taps.append(float(re) + 1j * float(im))
            except ValueError:
                if taps:
                    raise
                continue  # header row
    if not taps:
        raise ValueError(f"no taps found in {path}")
    return np.asarray(taps, dtype=complex)
