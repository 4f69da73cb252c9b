"""Block filtered multicarrier toolkit.

A flexible circularly-filtered modem (subcarriers x subsymbols on one
shared block) plus the named corner cases it degenerates into, with
framing, channel simulation, and measurement tools on top.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .analysis import (
    AmbiguitySurface,
    MetricReport,
    OrthogonalityMetrics,
    PaprResult,
    PsdEstimate,
    SerPoint,
    ambiguity,
    guard_band_leakage,
    inband_mask,
    oob_power,
    orthogonality_metrics,
    papr,
    papr_percentile,
    psd,
    psd_total_power,
    run_ser,
    wilson_interval,
)
from .channel import ChannelModel, apply_channel, fde_equalize, load_taps_csv, noise_variance
from .constellations import alphabet, hard_decision, random_symbols
from .errors import (
    ClaimViolatedError,
    ConfigViolation,
    DegeneratePulseWarning,
    DimensionMismatchError,
    GfdmError,
    IncompatibleHintError,
    IndexOutOfGridError,
    InvalidConfigError,
    LengthMismatchError,
    NotRootNyquistWarning,
    OddSubsymbolSpacingError,
    OverlappingAllocationsError,
    RankDeficientError,
    SilentSubsymbolsOutOfRangeError,
    TooShortError,
    ZeroBinError,
)
from .framing import (
    FramedBlock,
    add_cp,
    apply_silent_subsymbols,
    concat_blocks,
    raised_cosine_ramp,
    remove_cp,
    silent_mask,
)
from .modem import (
    BlockSignal,
    ModMatrix,
    ResourceGrid,
    build_matrix,
    demodulate,
    modulate,
    oqam_demap,
    oqam_map,
)
from .params import (
    GridParams,
    ValidatedConfig,
    WaveformConfig,
    config_from_dict,
    config_from_json,
    config_to_dict,
    config_to_json,
    derive_grid,
    fingerprint,
    validate_config,
)
from .presets import (
    PRESET_NAMES,
    PresetCheck,
    PresetClaims,
    PresetDescriptor,
    descriptor_to_dict,
    make_preset,
    verify_all_presets,
    verify_preset_claims,
)
from .pulses import (
    PrototypePulse,
    centered_bins,
    is_root_nyquist,
    make_pulse,
    pulse_from_config,
    pulse_from_samples,
    shift_pulse,
    time_frequency_shift,
)
