"""Waveform configuration, grid arithmetic and the JSON config format.

The block structure is fixed by four integers: a prototype pulse of
``periods`` repetitions of ``samples_per_period`` samples gives the block
length, and the time/frequency spacing of the data positions is set by
``subsymbol_spacing`` and ``subcarrier_spacing``.  Everything else (number
of subcarriers, subsymbols, overlap density) is derived, and the scaling
factors are kept as exact rationals so density bookkeeping never suffers
float rounding.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

PULSE_KINDS = ("rect", "rc", "rrc", "dirichlet", "gaussian")

SCHEMA_VERSION = "v1"


@dataclass(frozen=True)
class WaveformConfig:
    """Complete static description of one waveform format.

    Pulse parameters that do not apply to the selected kind (``rolloff``
    for rect, ``spread`` for anything but gaussian) are carried along but
    ignored.  ``sample_rate_hz`` is optional metadata; all processing is
    in normalized units.
    """

    samples_per_period: int
    periods: int
    subsymbol_spacing: int
    subcarrier_spacing: int
    pulse_kind: str = "rc"
    rolloff: float = 0.5
    spread: float = 1.0
    oqam: bool = False
    cp_length: int = 0
    cs_window_length: int = 0
    silent_subsymbols: int = 0
    sample_rate_hz: float | None = None

    @property
    def block_length(self) -> int:
        return self.samples_per_period * self.periods


@dataclass(frozen=True)
class GridParams:
    """Derived grid quantities for a validated configuration."""

    total_samples: int
    num_subcarriers: int
    num_subsymbols: int
    num_symbols: int
    time_scale: Fraction
    freq_scale: Fraction
    density: Fraction

    @property
    def subsymbol_spacing(self) -> int:
        return self.total_samples // self.num_subsymbols

    @property
    def subcarrier_spacing(self) -> int:
        return self.total_samples // self.num_subcarriers

    @property
    def samples_per_period(self) -> int:
        r = Fraction(self.subsymbol_spacing) / self.time_scale
        return int(r)

    @property
    def periods(self) -> int:
        return self.total_samples // self.samples_per_period


@dataclass(frozen=True)
class ValidatedConfig:
    """A config that passed :func:`validate_config`, with its grid attached."""

    config: WaveformConfig
    grid: GridParams

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.config)


def _violations(cfg: WaveformConfig):
    from .errors import ConfigViolation

    out = []

    def bad(code, msg):
        out.append(ConfigViolation(code, msg))

    for name in ("samples_per_period", "periods", "subsymbol_spacing", "subcarrier_spacing"):
        if int(getattr(cfg, name)) < 1:
            bad("non_positive_dimension", f"{name} must be >= 1, got {getattr(cfg, name)}")
    if out:
        return out  # grid arithmetic below needs positive integers

    S = cfg.block_length
    if S % cfg.subcarrier_spacing != 0:
        bad(
            "non_integer_grid",
            f"subcarrier_spacing {cfg.subcarrier_spacing} does not divide "
            f"the block length {S}",
        )
    if S % cfg.subsymbol_spacing != 0:
        bad(
            "non_integer_grid",
            f"subsymbol_spacing {cfg.subsymbol_spacing} does not divide "
            f"the block length {S}",
        )
    if cfg.pulse_kind not in PULSE_KINDS:
        bad("unknown_pulse_kind", f"pulse_kind {cfg.pulse_kind!r} not one of {PULSE_KINDS}")
    if not (0.0 <= cfg.rolloff <= 1.0):
        bad("rolloff_out_of_range", f"rolloff must be in [0, 1], got {cfg.rolloff}")
    if cfg.spread <= 0.0:
        bad("spread_out_of_range", f"spread must be > 0, got {cfg.spread}")
    if not (0 <= cfg.cp_length <= S):
        bad("cp_too_long", f"cp_length must be in [0, {S}], got {cfg.cp_length}")
    if cfg.cs_window_length < 0 or cfg.cs_window_length > cfg.cp_length:
        bad(
            "cs_window_too_long",
            f"cs_window_length must be in [0, cp_length={cfg.cp_length}], "
            f"got {cfg.cs_window_length}",
        )
    if S % cfg.subsymbol_spacing == 0:
        M = S // cfg.subsymbol_spacing
        # zero always allowed; a nonzero count must leave >= 2 active subsymbols
        if cfg.silent_subsymbols != 0 and not (0 <= cfg.silent_subsymbols <= M - 2):
            bad(
                "silent_subsymbols_out_of_range",
                f"silent_subsymbols must be 0 or in [0, M-2={M - 2}], "
                f"got {cfg.silent_subsymbols}",
            )
    if cfg.sample_rate_hz is not None and cfg.sample_rate_hz <= 0:
        bad("sample_rate_out_of_range", f"sample_rate_hz must be > 0, got {cfg.sample_rate_hz}")
    return out


def validate_config(cfg: WaveformConfig) -> ValidatedConfig:
    """Check every constraint; raise with the full violation list on failure."""
    from .errors import InvalidConfigError

    found = _violations(cfg)
    if found:
        raise InvalidConfigError(found)
    return ValidatedConfig(cfg, derive_grid(cfg))


def derive_grid(cfg: WaveformConfig) -> GridParams:
    """Grid quantities for a config already known to be consistent.

    Pure integer/rational arithmetic:

        S = samples_per_period * periods
        K = S / subcarrier_spacing        M = S / subsymbol_spacing
        nu_t = subsymbol_spacing / samples_per_period
        nu_f = subcarrier_spacing / periods
        density = (K * M) / S = 1 / (nu_t * nu_f)
    """
    S = cfg.block_length
    K = S // cfg.subcarrier_spacing
    M = S // cfg.subsymbol_spacing
    nu_t = Fraction(cfg.subsymbol_spacing, cfg.samples_per_period)
    nu_f = Fraction(cfg.subcarrier_spacing, cfg.periods)
    return GridParams(
        total_samples=S,
        num_subcarriers=K,
        num_subsymbols=M,
        num_symbols=K * M,
        time_scale=nu_t,
        freq_scale=nu_f,
        density=Fraction(K * M, S),
    )


def config_to_dict(cfg: WaveformConfig) -> dict:
    d = {"schema": SCHEMA_VERSION}
    d.update(asdict(cfg))
    return d


def config_to_json(cfg: WaveformConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def config_from_dict(d: dict) -> WaveformConfig:
    if d.get("schema") != SCHEMA_VERSION:
        from .errors import ConfigViolation, InvalidConfigError

        raise InvalidConfigError(
            [ConfigViolation("unsupported_schema", f"expected schema {SCHEMA_VERSION!r}, got {d.get('schema')!r}")]
        )
    fields = {k: v for k, v in d.items() if k != "schema"}
    known = WaveformConfig.__dataclass_fields__
    unknown = sorted(set(fields) - set(known))
    if unknown:
        from .errors import ConfigViolation, InvalidConfigError

        raise InvalidConfigError(
            [ConfigViolation("unknown_field", f"unknown config fields: {unknown}")]
        )
    return WaveformConfig(**fields)


def config_from_json(text: str) -> WaveformConfig:
    return config_from_dict(json.loads(text))


def fingerprint(cfg: WaveformConfig) -> str:
    """Stable short hash of the full configuration (used in file sidecars)."""
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
