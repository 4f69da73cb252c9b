"""Prototype pulse construction and time/frequency shifting.

All pulses live on the S-sample block and are unit energy.  The filtered
kinds (dirichlet, rc, rrc) are defined in the DFT domain on bins centered
at DC; on ties the lower edge bin is included and the upper edge bin is
excluded, i.e. a width-W band covers bins -floor(W/2) .. ceil(W/2)-1.
"""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePulseWarning, IndexOutOfGridError
from .params import PULSE_KINDS, GridParams


@dataclass(frozen=True)
class PrototypePulse:
    """Unit-energy prototype pulse: S complex samples plus provenance."""

    samples: np.ndarray
    kind: str
    config_fingerprint: str

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))


def centered_bins(width: int) -> np.ndarray:
    """DC-centered bin indices for a band of ``width`` bins (lower edge wins ties)."""
    return np.arange(-(width // 2), (width + 1) // 2)


def raised_cosine_response(f: np.ndarray, rolloff: float) -> np.ndarray:
    """Raised-cosine frequency response on subcarrier-normalized frequency f."""
    f = np.abs(np.asarray(f, dtype=float))
    h = np.zeros_like(f)
    if rolloff == 0.0:
        h[f < 0.5] = 1.0
        h[f == 0.5] = 0.5  # split the Nyquist edge so band shifts still sum to one
        return h
    lo = (1.0 - rolloff) / 2.0
    hi = (1.0 + rolloff) / 2.0
    h[f <= lo] = 1.0
    band = (f > lo) & (f <= hi)
    h[band] = 0.5 * (1.0 + np.cos(np.pi * (f[band] - lo) / rolloff))
    return h


def _spectrum_pulse(values: np.ndarray, bins: np.ndarray, total: int) -> np.ndarray:
    spec = np.zeros(total, dtype=complex)
    spec[bins % total] = values
    g = np.fft.ifft(spec)
    return g / np.linalg.norm(g)


def make_pulse(kind: str, grid: GridParams, rolloff: float = 0.5, spread: float = 1.0) -> PrototypePulse:
    """Build the prototype pulse for a grid.

    kind:
        "rect"      one period of unit samples (time domain)
        "dirichlet" flat spectrum over the M bins around DC
        "rc"        frequency-sampled raised cosine over 2M bins
        "rrc"       its square root (root-Nyquist for integer subsymbol shifts)
        "gaussian"  periodized Gaussian, width ``spread`` subsymbol spacings;
                    stands in for an isotropic pulse, it is not root-Nyquist
    """
    if kind not in PULSE_KINDS:
        raise ValueError(f"unknown pulse kind {kind!r}, expected one of {PULSE_KINDS}")
    if not (0.0 <= rolloff <= 1.0):
        raise ValueError(f"rolloff must be in [0, 1], got {rolloff}")
    if spread <= 0:
        raise ValueError(f"spread must be > 0, got {spread}")

    S = grid.total_samples
    M = grid.num_subsymbols
    P = grid.subsymbol_spacing

    if kind == "rect":
        g = np.zeros(S, dtype=complex)
        g[: grid.samples_per_period] = 1.0
        g /= np.linalg.norm(g)
    elif kind == "dirichlet":
        if M == 1:
            warnings.warn(
                "dirichlet with a single subsymbol degenerates to a constant "
                "(all-pass) pulse",
                DegeneratePulseWarning,
                stacklevel=2,
            )
        g = _spectrum_pulse(np.ones(M), centered_bins(M), S)
    elif kind in ("rc", "rrc"):
        bins = centered_bins(2 * M)
        h = raised_cosine_response(bins / M, rolloff)
        if kind == "rrc":
            h = np.sqrt(h)
        g = _spectrum_pulse(h, bins, S)
    else:  # gaussian
        n = ((np.arange(S) + S // 2) % S) - S // 2
        width = spread * P
        g = np.zeros(S)
        for wrap in range(-4, 5):
            g = g + np.exp(-np.pi * ((n + wrap * S) / width) ** 2)
        g = np.asarray(g, dtype=complex) / np.linalg.norm(g)

    material = f"{kind}|S={S}|M={M}|P={P}|R={grid.samples_per_period}"
    if kind in ("rc", "rrc"):
        material += f"|rolloff={rolloff!r}"
    if kind == "gaussian":
        material += f"|spread={spread!r}"
    fp = hashlib.sha256(material.encode()).hexdigest()[:16]
    return PrototypePulse(samples=g, kind=kind, config_fingerprint=fp)


def pulse_from_config(validated) -> PrototypePulse:
    """Pulse for a ValidatedConfig (kind and shape parameters from the config)."""
    cfg = validated.config
    return make_pulse(cfg.pulse_kind, validated.grid, rolloff=cfg.rolloff, spread=cfg.spread)


def pulse_from_samples(samples: np.ndarray, kind: str = "custom") -> PrototypePulse:
    """Wrap externally supplied samples; they are normalized to unit energy."""
    samples = np.asarray(samples, dtype=complex)
    norm = np.linalg.norm(samples)
    if norm == 0:
        raise ValueError("pulse samples are all zero")
    fp = hashlib.sha256(samples.tobytes()).hexdigest()[:16]
    return PrototypePulse(samples=samples / norm, kind=kind, config_fingerprint=fp)


def time_frequency_shift(samples: np.ndarray, time_shift: int, freq_bins: int) -> np.ndarray:
    """Circular time shift plus modulation by an integer number of DFT bins."""
    S = len(samples)
    n = np.arange(S)
    return np.roll(samples, time_shift) * np.exp(2j * np.pi * freq_bins * n / S)


def shift_pulse(pulse: PrototypePulse, m: int, k: int, grid: GridParams) -> np.ndarray:
    """Waveform at grid position (k, m): time shift m*P, frequency shift k*Q bins."""
    if not (0 <= m < grid.num_subsymbols):
        raise IndexOutOfGridError(
            f"subsymbol index {m} outside [0, {grid.num_subsymbols})"
        )
    if not (0 <= k < grid.num_subcarriers):
        raise IndexOutOfGridError(
            f"subcarrier index {k} outside [0, {grid.num_subcarriers})"
        )
    return time_frequency_shift(
        pulse.samples, m * grid.subsymbol_spacing, k * grid.subcarrier_spacing
    )


def is_root_nyquist(pulse: PrototypePulse, grid: GridParams, tol: float = 1e-6) -> bool:
    """True if the pulse is band-limited to two subsymbol bands and its
    squared spectrum folds flat over M-bin shifts (the property that makes
    offset mapping interference free)."""
    S = grid.total_samples
    M = grid.num_subsymbols
    if S % M != 0:
        return False
    G2 = np.abs(np.fft.fft(pulse.samples)) ** 2
    shifted = np.fft.fftshift(G2)
    band = np.zeros(S, dtype=bool)
    band[(centered_bins(min(2 * M, S)) + S // 2) % S] = True
    out_of_band = shifted[~band].sum() if (~band).any() else 0.0
    if out_of_band > tol * G2.sum():
        return False
    fold = G2.reshape(S // M, M).sum(axis=0)
    return bool(np.max(np.abs(fold - fold.mean())) <= tol * fold.mean())
