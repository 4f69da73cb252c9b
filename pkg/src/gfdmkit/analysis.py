"""Measurement side of the toolkit.

Ambiguity surfaces on the half-symbol grid, Welch spectra with out-of-band
ratios, PAPR statistics, Gram-matrix orthogonality metrics, a seeded
Monte-Carlo error-rate harness, and the two-user guard-band experiment.
All functions are pure; the SER harness optionally fans trials out across
worker threads with per-trial seed streams.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import welch

from .channel import ChannelModel, apply_channel, fde_equalize, noise_variance
from .constellations import hard_decision, random_symbols
from .errors import (
    DimensionMismatchError,
    IndexOutOfGridError,
    OddSubsymbolSpacingError,
    OverlappingAllocationsError,
    TooShortError,
)
from .framing import add_cp, remove_cp, silent_mask
from .modem import BlockSignal, ModMatrix, ResourceGrid, build_matrix, demodulate, modulate, oqam_demap, oqam_map
from .params import GridParams, ValidatedConfig
from .pulses import PrototypePulse, pulse_from_config, time_frequency_shift

Z95 = 1.959963984540054  # two-sided 95% normal quantile


# ---------------------------------------------------------------- ambiguity

@dataclass(frozen=True)
class AmbiguitySurface:
    """Inner products of the pulse with its own time-frequency shifts.

    Rows step the time offset in half-subsymbol units, columns step the
    subcarrier offset in whole subcarriers; values[i0, j0] at zero offset
    is the pulse energy, 1 by construction.
    """

    values: np.ndarray
    time_offsets: np.ndarray  # half-subsymbol steps, consecutive ints
    freq_offsets: np.ndarray  # whole subcarriers, consecutive ints
    half_spaced: bool = True

    def at(self, time_half_steps: int, subcarriers: int) -> complex:
        i = int(time_half_steps) - int(self.time_offsets[0])
        j = int(subcarriers) - int(self.freq_offsets[0])
        if not (0 <= i < len(self.time_offsets) and 0 <= j < len(self.freq_offsets)):
            raise IndexOutOfGridError(
                f"offset ({time_half_steps}, {subcarriers}) outside the computed surface"
            )
        return complex(self.values[i, j])


def ambiguity(
    pulse: PrototypePulse,
    grid: GridParams,
    time_span: int = 2,
    freq_span: int = 2,
) -> AmbiguitySurface:
    """Ambiguity surface over +-time_span subsymbols (in half-subsymbol
    steps) and +-freq_span subcarriers, circular shifts throughout.

    Half-symbol spacing needs an even subsymbol spacing.  Spans clip to
    one block period: time at +-num_subsymbols, frequency at half the
    subcarrier count.
    """
    P = grid.subsymbol_spacing
    if P % 2 != 0:
        raise OddSubsymbolSpacingError(
            f"half-subsymbol steps need an even subsymbol spacing, got {P}"
        )
    t_span = min(int(time_span), grid.num_subsymbols)
    f_span = min(int(freq_span), grid.num_subcarriers // 2)
    t_off = np.arange(-2 * t_span, 2 * t_span + 1)
    f_off = np.arange(-f_span, f_span + 1)
    g = pulse.samples
    Q = grid.subcarrier_spacing
    values = np.empty((len(t_off), len(f_off)), dtype=complex)
    for i, mh in enumerate(t_off):
        for j, kp in enumerate(f_off):
            shifted = time_frequency_shift(g, int(mh) * (P // 2), int(kp) * Q)
            values[i, j] = np.vdot(g, shifted)
    return AmbiguitySurface(values=values, time_offsets=t_off, freq_offsets=f_off)


# ---------------------------------------------------------------- spectra

@dataclass(frozen=True)
class PsdEstimate:
    frequencies: np.ndarray  # cycles per sample, DC centered
    power: np.ndarray        # linear density, two-sided


def psd(samples, segment_length: int = 256, overlap: float = 0.5) -> PsdEstimate:
    """Averaged periodogram, Hann window, two-sided and DC centered.

    Density-scaled: sum(power) * df recovers the mean signal power, kept
    within 1% of the time-domain measurement.
    """
    x = np.asarray(samples).ravel()
    if x.size < segment_length:
        raise TooShortError(f"need at least {segment_length} samples, got {x.size}")
    if not (0.0 <= overlap < 1.0):
        raise ValueError(f"overlap must be in [0, 1), got {overlap}")
    f, p = welch(
        x.astype(complex),
        fs=1.0,
        window="hann",
        nperseg=segment_length,
        noverlap=int(segment_length * overlap),
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    return PsdEstimate(np.fft.fftshift(f), np.fft.fftshift(p))


def psd_total_power(estimate: PsdEstimate) -> float:
    df = float(estimate.frequencies[1] - estimate.frequencies[0])
    return float(np.sum(estimate.power) * df)


def inband_mask(estimate: PsdEstimate, allocated_subcarriers, grid: GridParams) -> np.ndarray:
    """In-band bins: allocated subcarrier centers widened by half a
    subcarrier spacing on each side, circular in frequency."""
    alloc = np.asarray(allocated_subcarriers, dtype=float)
    centers = alloc * grid.subcarrier_spacing / grid.total_samples
    half = grid.subcarrier_spacing / (2.0 * grid.total_samples)
    diff = estimate.frequencies[:, None] - centers[None, :]
    diff = np.abs((diff + 0.5) % 1.0 - 0.5)
    return (diff <= half + 1e-12).any(axis=1)


def oob_power(estimate: PsdEstimate, inband) -> float:
    """10 log10 of mean out-of-band density over mean in-band density.

    `inband` is a boolean mask over the PSD bins or a (start, stop) bin
    range.  All-inband input returns -inf.
    """
    if isinstance(inband, tuple):
        mask = np.zeros(estimate.power.size, dtype=bool)
        mask[slice(*inband)] = True
    else:
        mask = np.asarray(inband, dtype=bool)
    if mask.shape != estimate.power.shape:
        raise DimensionMismatchError(
            f"in-band mask shape {mask.shape} does not match PSD bins {estimate.power.shape}"
        )
    if not mask.any():
        raise ValueError("in-band mask selects no bins")
    if mask.all():
        return float("-inf")
    ib = float(np.mean(estimate.power[mask]))
    oob = float(np.mean(estimate.power[~mask]))
    if oob == 0.0:
        return float("-inf")
    return 10.0 * math.log10(oob / ib)


# ---------------------------------------------------------------- PAPR

@dataclass(frozen=True)
class PaprResult:
    papr_db: np.ndarray        # one value per block
    ccdf_levels_db: np.ndarray
    ccdf_prob: np.ndarray      # P(PAPR > level), non-increasing


def papr(samples, block_size: int) -> PaprResult:
    """Peak-to-average power per block of block_size samples.

    Trailing samples that do not fill a block are dropped; blocks with no
    power are skipped.
    """
    x = np.asarray(samples).ravel()
    n_blocks = x.size // int(block_size)
    if n_blocks < 1:
        raise TooShortError(f"need at least {block_size} samples, got {x.size}")
    p = np.abs(x[: n_blocks * block_size].reshape(n_blocks, block_size)) ** 2
    peak = p.max(axis=1)
    mean = p.mean(axis=1)
    keep = mean > 0
    if not keep.any():
        raise ValueError("every block has zero power")
    ratio_db = 10.0 * np.log10(peak[keep] / mean[keep])
    levels = np.sort(ratio_db)
    prob = 1.0 - np.searchsorted(levels, levels, side="right") / levels.size
    return PaprResult(papr_db=ratio_db, ccdf_levels_db=levels, ccdf_prob=prob)


def papr_percentile(result: PaprResult, percentile: float = 99.9) -> float:
    return float(np.percentile(result.papr_db, percentile))


# ------------------------------------------------------- matrix metrics

@dataclass(frozen=True)
class OrthogonalityMetrics:
    gram_max_offdiag: float
    condition_number: float
    rank: int


def orthogonality_metrics(matrix: ModMatrix) -> OrthogonalityMetrics:
    a = matrix.matrix
    gram = a.conj().T @ a
    off = gram - np.diag(np.diag(gram))
    s = matrix.singular_values
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    return OrthogonalityMetrics(
        gram_max_offdiag=float(np.max(np.abs(off))),
        condition_number=cond,
        rank=matrix.rank,
    )


@dataclass
class MetricReport:
    """Bundle of the measurements one analyze run produced; every field is
    optional so callers fill only the requested metrics."""

    papr_db: np.ndarray | None = None
    papr_ccdf_levels_db: np.ndarray | None = None
    papr_ccdf_prob: np.ndarray | None = None
    psd_frequencies: np.ndarray | None = None
    psd_power: np.ndarray | None = None
    oob_db: float | None = None
    gram_max_offdiag: float | None = None
    condition_number: float | None = None
    rank: int | None = None

    def to_dict(self) -> dict:
        def listify(v):
            return v.tolist() if isinstance(v, np.ndarray) else v

        return {k: listify(v) for k, v in self.__dict__.items()}


# ---------------------------------------------------------------- SER

@dataclass(frozen=True)
class SerPoint:
    snr_db: float
    trials: int
    symbols: int
    errors: int
    ser: float
    ci_low: float
    ci_high: float


def wilson_interval(errors: int, total: int, z: float = Z95) -> tuple[float, float]:
    """95% score interval for a binomial rate; well-behaved at 0 errors."""
    if total < 1:
        raise ValueError("interval needs at least one observation")
    p = errors / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total))
    return max(0.0, center - half), min(1.0, center + half)


def run_ser(
    validated: ValidatedConfig,
    channel: ChannelModel | None = None,
    receiver: str = "mf",
    constellation: str = "qpsk",
    snr_db=(0.0, 4.0, 8.0, 12.0),
    trials: int = 100,
    seed: int = 0,
    threads: int | None = None,
) -> list[SerPoint]:
    """Monte-Carlo symbol error rate over independent blocks.

    Each (SNR point, trial) pair owns a private seed stream derived from
    `seed`, so results are deterministic regardless of thread count or
    scheduling.  The SNR list overrides any SNR stored on the channel
    model; math.inf runs noiseless.  Multipath taps are equalized per bin
    after the prefix is stripped (MMSE when the receiver is mmse and noise
    is present, otherwise ZF).  Offset-mapped configs use their offset
    demapper and accept only the mf receiver.  Silent subsymbols carry no
    data and are excluded from the count.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    cfg = validated.config
    grid = validated.grid
    pulse = pulse_from_config(validated)
    active = silent_mask(grid, cfg.silent_subsymbols)
    n_active = int(active.sum())
    if cfg.oqam and receiver != "mf":
        raise ValueError("offset-mapped configs demap with the matched filter; use receiver='mf'")
    matrix = None if cfg.oqam else build_matrix(pulse, grid)
    base = channel if channel is not None else ChannelModel(np.ones(1))
    multipath = len(base.taps) > 1
    K, M = grid.num_subcarriers, grid.num_subsymbols

    def one_trial(snr_index: int, snr: float, trial: int) -> int:
        rng = np.random.default_rng((seed, snr_index, trial))
        sent = random_symbols(constellation, (K, M), rng)
        sent[~active] = 0
        if cfg.oqam:
            real_grid = np.empty((K, 2 * M))
            real_grid[:, 0::2] = sent.real
            real_grid[:, 1::2] = sent.imag
            block = oqam_map(real_grid, pulse, grid)
        else:
            block = modulate(ResourceGrid(sent, grid), pulse)
        frame = add_cp(block, cfg.cp_length, cfg.cs_window_length)
        var = noise_variance(frame.samples, snr)
        received = apply_channel(frame, replace(base, snr_db=float(snr)), rng=rng)
        payload = remove_cp(received)
        if multipath:
            fde_mode = "mmse" if (receiver == "mmse" and var > 0) else "zf"
            payload = fde_equalize(
                payload, base.taps, mode=fde_mode, noise_var=var if fde_mode == "mmse" else None
            )
        if cfg.oqam:
            r = oqam_demap(payload, pulse, grid)
            est = r[:, 0::2] + 1j * r[:, 1::2]
        else:
            est = demodulate(
                payload, matrix, receiver, noise_var=var if receiver == "mmse" else None
            ).symbols
        decided = hard_decision(est, constellation)
        return int(np.count_nonzero((decided != sent) & active))

    points = []
    for i, snr in enumerate(snr_db):
        snr = float(snr)
        if threads and threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                errors = sum(pool.map(lambda t: one_trial(i, snr, t), range(trials)))
        else:
            errors = sum(one_trial(i, snr, t) for t in range(trials))
        total = n_active * trials
        low, high = wilson_interval(errors, total)
        points.append(
            SerPoint(
                snr_db=snr,
                trials=trials,
                symbols=total,
                errors=errors,
                ser=errors / total,
                ci_low=low,
                ci_high=high,
            )
        )
    return points


# ---------------------------------------------------------- guard bands

def guard_band_leakage(
    validated_a: ValidatedConfig,
    validated_b: ValidatedConfig,
    guard_subcarriers: int,
    time_offset: int,
    seed: int = 0,
    draws: int = 4,
) -> float:
    """Interference user B leaks into user A's matched-filter outputs, dB
    relative to A's own signal power.

    The two users split the shared subcarrier axis into two contiguous
    bands with `guard_subcarriers` empty subcarriers between them on both
    circular boundaries; B's block is circularly delayed by time_offset
    samples.  Powers average over `draws` random symbol draws.
    """
    grid_a, grid_b = validated_a.grid, validated_b.grid
    if grid_a.total_samples != grid_b.total_samples or (
        grid_a.subcarrier_spacing != grid_b.subcarrier_spacing
    ):
        raise DimensionMismatchError(
            "guard-band users must share the block length and subcarrier spacing"
        )
    K = grid_a.num_subcarriers
    guard = int(guard_subcarriers)
    if guard < 0:
        raise OverlappingAllocationsError(f"guard width must be >= 0, got {guard}")
    avail = K - 2 * guard
    if avail < 2:
        raise OverlappingAllocationsError(
            f"guard of {guard} subcarriers leaves no room for two users in {K}"
        )
    n_a = avail // 2
    band_a = np.arange(0, n_a)
    band_b = np.arange(n_a + guard, K - guard)

    pulse_a = pulse_from_config(validated_a)
    pulse_b = pulse_from_config(validated_b)
    mat_a = build_matrix(pulse_a, grid_a)
    rng = np.random.default_rng(seed)
    signal_power = 0.0
    interference_power = 0.0
    for _ in range(draws):
        d_a = np.zeros((K, grid_a.num_subsymbols), dtype=complex)
        d_a[band_a] = random_symbols("qpsk", (len(band_a), grid_a.num_subsymbols), rng)
        d_b = np.zeros((K, grid_b.num_subsymbols), dtype=complex)
        d_b[band_b] = random_symbols("qpsk", (len(band_b), grid_b.num_subsymbols), rng)
        x_a = modulate(ResourceGrid(d_a, grid_a), pulse_a).samples
        x_b = np.roll(modulate(ResourceGrid(d_b, grid_b), pulse_b).samples, int(time_offset))
        y_own = demodulate(BlockSignal(x_a), mat_a, "mf").symbols
        y_alien = demodulate(BlockSignal(x_b), mat_a, "mf").symbols
        signal_power += float(np.sum(np.abs(y_own[band_a]) ** 2))
        interference_power += float(np.sum(np.abs(y_alien[band_a]) ** 2))
    if interference_power == 0.0:
        return float("-inf")
    return 10.0 * math.log10(interference_power / signal_power)
