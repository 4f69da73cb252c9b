"""Named waveform formats: one flexible baseline and its ten corner cases.

Every preset fixes the structural fields of a WaveformConfig (pulse family,
scaling factors, offset mapping, prefix policy) and leaves sizes to hints.
Each carries a descriptor recording the format's claimed properties, and
``verify_preset_claims`` measures a built instance against those claims.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ClaimViolatedError, IncompatibleHintError
from .modem import build_matrix, oqam_demap, oqam_map
from .params import ValidatedConfig, WaveformConfig, validate_config
from .pulses import pulse_from_config

YES, NO, CONDITIONAL = "yes", "no", "conditional"

OQAM_ROUNDTRIP_TOL = 1e-9
ORTHOGONAL_OFFDIAG_TOL = 1e-10
NONORTHOGONAL_OFFDIAG_FLOOR = 1e-3


@dataclass(frozen=True)
class PresetClaims:
    """Tri-state claims: offset and orthogonal may be conditional, meaning
    the property is available or configuration dependent rather than fixed."""

    orthogonal: str
    cp: bool
    offset: str
    cyclic_filter: bool


@dataclass(frozen=True)
class PresetDescriptor:
    name: str
    claims: PresetClaims
    scenario_tag: str
    notes: tuple = ()


def _as_fraction(value, what: str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise IncompatibleHintError(f"cannot read {what} hint {value!r} as a rational") from exc


def _structured(subcarriers, subsymbols, nu_t, nu_f, what):
    """Integer grid realizing K subcarriers, M subsymbols at scaling nu_t, nu_f.

    S = K*M*nu_t*nu_f, P = S/M, Q = S/K, R = P/nu_t, T = S/R; every one of
    these must come out integer or the size hints don't fit the structure.
    """
    K, M = int(subcarriers), int(subsymbols)
    if K < 1 or M < 1:
        raise IncompatibleHintError(f"{what}: subcarriers and subsymbols must be >= 1")
    S = K * M * nu_t * nu_f
    P = S / M
    R = P / nu_t
    values = {"block": S, "subsymbol spacing": P, "samples per period": R,
              "subcarrier spacing": S / K, "periods": S / R if R else 0}
    for label, v in values.items():
        if not (isinstance(v, Fraction) and v.denominator == 1 and v >= 1) and not (
            isinstance(v, int) and v >= 1
        ):
            raise IncompatibleHintError(
                f"{what}: subcarriers={K} subsymbols={M} with scaling "
                f"nu_t={nu_t} nu_f={nu_f} gives non-integer {label} = {v}"
            )
    return int(R), int(S / R), int(P), int(S / K)


def _take(hints: dict, key, default):
    return hints.pop(key, default)


def _reject(hints: dict, name: str, *keys):
    for key in keys:
        if key in hints:
            raise IncompatibleHintError(
                f"preset {name!r} fixes {key}; hint {key}={hints[key]!r} is incompatible"
            )


def _finish(hints: dict, name: str, **fields) -> WaveformConfig:
    sample_rate = _take(hints, "sample_rate_hz", None)
    if hints:
        raise IncompatibleHintError(f"preset {name!r} got unknown hints: {sorted(hints)}")
    return WaveformConfig(sample_rate_hz=sample_rate, **fields)


def _build_gfdm(hints):
    K = _take(hints, "subcarriers", 16)
    M = _take(hints, "subsymbols", 5)
    nu_t = _as_fraction(_take(hints, "time_scale", 1), "time_scale")
    nu_f = _as_fraction(_take(hints, "freq_scale", 1), "freq_scale")
    R, T, P, Q = _structured(K, M, nu_t, nu_f, "gfdm")
    return _finish(
        hints,
        "gfdm",
        samples_per_period=R,
        periods=T,
        subsymbol_spacing=P,
        subcarrier_spacing=Q,
        pulse_kind=_take(hints, "pulse_kind", "rc"),
        rolloff=_take(hints, "rolloff", 0.5),
        spread=_take(hints, "spread", 1.0),
        cp_length=_take(hints, "cp_length", min(R * T, 16)),
        cs_window_length=_take(hints, "cs_window_length", 0),
        silent_subsymbols=_take(hints, "silent_subsymbols", 0),
    )


def _build_ofdm(hints):
    name = "ofdm"
    _reject(hints, name, "subsymbols", "time_scale", "freq_scale", "pulse_kind",
            "silent_subsymbols", "rolloff", "spread")
    K = _take(hints, "subcarriers", 64)
    return _finish(
        hints,
        name,
        samples_per_period=K,
        periods=1,
        subsymbol_spacing=K,
        subcarrier_spacing=1,
        pulse_kind="rect",
        cp_length=_take(hints, "cp_length", max(K // 4, 1)),
        cs_window_length=_take(hints, "cs_window_length", 0),
    )


def _build_block_ofdm(hints):
    name = "block-ofdm"
    _reject(hints, name, "time_scale", "freq_scale", "pulse_kind",
            "silent_subsymbols", "rolloff", "spread")
    K = _take(hints, "subcarriers", 16)
    M = _take(hints, "subsymbols", 4)
    if M < 2:
        raise IncompatibleHintError(f"preset {name!r} needs more than one subsymbol, got {M}")
    return _finish(
        hints,
        name,
        samples_per_period=K,
        periods=M,
        subsymbol_spacing=K,
        subcarrier_spacing=M,
        pulse_kind="rect",
        cp_length=_take(hints, "cp_length", max(K // 4, 1)),
        cs_window_length=_take(hints, "cs_window_length", 0),
    )


def _build_sc_fde(hints):
    name = "sc-fde"
    _reject(hints, name, "subcarriers", "time_scale", "freq_scale", "pulse_kind",
            "silent_subsymbols", "rolloff", "spread")
    M = _take(hints, "subsymbols", 64)
    return _finish(
        hints,
        name,
        samples_per_period=1,
        periods=M,
        subsymbol_spacing=1,
        subcarrier_spacing=M,
        pulse_kind="dirichlet",
        cp_length=_take(hints, "cp_length", max(M // 4, 1)),
        cs_window_length=_take(hints, "cs_window_length", 0),
    )


def _build_sc_fdm(hints):
    name = "sc-fdm"
    _reject(hints, name, "time_scale", "freq_scale", "pulse_kind",
            "silent_subsymbols", "rolloff", "spread")
    K = _take(hints, "subcarriers", 8)
    if K < 2:
        raise IncompatibleHintError(
            f"preset {name!r} concatenates several single-carrier signals in "
            f"frequency and needs more than one subcarrier, got {K}"
        )
    M = _take(hints, "subsymbols", 8)
    return _finish(
        hints,
        name,
        samples_per_period=K,
        periods=M,
        subsymbol_spacing=K,
        subcarrier_spacing=M,
        pulse_kind="dirichlet",
        cp_length=_take(hints, "cp_length", max(K * M // 8, 1)),
        cs_window_length=_take(hints, "cs_window_length", 0),
    )


def _oqam_even(name, K, P):
    if K % 2 != 0:
        raise IncompatibleHintError(
            f"preset {name!r} uses offset mapping and needs an even subcarrier count, got {K}"
        )
    if P % 2 != 0:
        raise IncompatibleHintError(
            f"preset {name!r} uses offset mapping and needs an even subsymbol spacing, got {P}"
        )


def _build_fbmc_oqam(hints):
    name = "fbmc-oqam"
    _reject(hints, name, "time_scale", "freq_scale", "pulse_kind", "spread")
    if hints.get("cp_length", 0) != 0:
        raise IncompatibleHintError(f"preset {name!r} sends no cyclic prefix")
    hints.pop("cp_length", None)
    K = _take(hints, "subcarriers", 16)
    M = _take(hints, "subsymbols", 16)
    silent = _take(hints, "silent_subsymbols", min(4, max(M - 2, 0)))
    _oqam_even(name, K, K)
    return _finish(
        hints,
        name,
        samples_per_period=K,
        periods=M,
        subsymbol_spacing=K,
        subcarrier_spacing=M,
        pulse_kind="rrc",
        rolloff=_take(hints, "rolloff", 0.5),
        oqam=True,
        cp_length=0,
        cs_window_length=_take(hints, "cs_window_length", 0),
        silent_subsymbols=silent,
    )


def _build_fbmc_fmt(hints):
    name = "fbmc-fmt"
    _reject(hints, name, "time_scale", "pulse_kind", "spread")
    if hints.get("cp_length", 0) != 0:
        raise IncompatibleHintError(f"preset {name!r} sends no cyclic prefix")
    hints.pop("cp_length", None)
    nu_f = _as_fraction(_take(hints, "freq_scale", 2), "freq_scale")
    if nu_f <= 1:
        raise IncompatibleHintError(
            f"preset {name!r} spreads subcarriers apart and needs freq_scale > 1, got {nu_f}"
        )
    K = _take(hints, "subcarriers", 8)
    M = _take(hints, "subsymbols", 16)
    R, T, P, Q = _structured(K, M, Fraction(1), nu_f, name)
    return _finish(
        hints,
        name,
        samples_per_period=R,
        periods=T,
        subsymbol_spacing=P,
        subcarrier_spacing=Q,
        pulse_kind="rrc",
        rolloff=_take(hints, "rolloff", 0.5),
        cp_length=0,
        cs_window_length=_take(hints, "cs_window_length", 0),
        silent_subsymbols=_take(hints, "silent_subsymbols", min(4, max(M - 2, 0))),
    )


def _build_fbmc_coqam(hints):
    name = "fbmc-coqam"
    _reject(hints, name, "time_scale", "freq_scale", "pulse_kind", "spread", "silent_subsymbols")
    K = _take(hints, "subcarriers", 16)
    M = _take(hints, "subsymbols", 8)
    _oqam_even(name, K, K)
    return _finish(
        hints,
        name,
        samples_per_period=K,
        periods=M,
        subsymbol_spacing=K,
        subcarrier_spacing=M,
        pulse_kind="rrc",
        rolloff=_take(hints, "rolloff", 0.5),
        oqam=True,
        cp_length=_take(hints, "cp_length", max(K * M // 8, 1)),
        cs_window_length=_take(hints, "cs_window_length", 0),
    )


def _build_cb_fmt(hints):
    name = "cb-fmt"
    _reject(hints, name, "time_scale", "pulse_kind", "spread", "silent_subsymbols")
    nu_f = _as_fraction(_take(hints, "freq_scale", 2), "freq_scale")
    if nu_f <= 1:
        raise IncompatibleHintError(
            f"preset {name!r} spreads subcarriers apart and needs freq_scale > 1, got {nu_f}"
        )
    K = _take(hints, "subcarriers", 8)
    M = _take(hints, "subsymbols", 8)
    R, T, P, Q = _structured(K, M, Fraction(1), nu_f, name)
    return _finish(
        hints,
        name,
        samples_per_period=R,
        periods=T,
        subsymbol_spacing=P,
        subcarrier_spacing=Q,
        pulse_kind="rrc",
        rolloff=_take(hints, "rolloff", 0.5),
        cp_length=_take(hints, "cp_length", max(R * T // 8, 1)),
        cs_window_length=_take(hints, "cs_window_length", 0),
    )


def _build_ftn(hints):
    name = "ftn"
    _reject(hints, name, "freq_scale", "pulse_kind", "rolloff")
    if hints.get("cp_length", 0) != 0:
        raise IncompatibleHintError(f"preset {name!r} sends no cyclic prefix")
    hints.pop("cp_length", None)
    nu_t = _as_fraction(_take(hints, "time_scale", Fraction(4, 5)), "time_scale")
    if not (0 < nu_t < 1):
        raise IncompatibleHintError(
            f"preset {name!r} packs subsymbols faster than Nyquist and needs "
            f"0 < time_scale < 1, got {nu_t}"
        )
    K = _take(hints, "subcarriers", 20)
    M = _take(hints, "subsymbols", 10)
    R, T, P, Q = _structured(K, M, nu_t, Fraction(1), name)
    _oqam_even(name, K, P)
    return _finish(
        hints,
        name,
        samples_per_period=R,
        periods=T,
        subsymbol_spacing=P,
        subcarrier_spacing=Q,
        pulse_kind="gaussian",
        spread=_take(hints, "spread", 1.0),
        oqam=True,
        cp_length=0,
        cs_window_length=_take(hints, "cs_window_length", 0),
        silent_subsymbols=_take(hints, "silent_subsymbols", 2),
    )


def _build_sefdm(hints):
    name = "sefdm"
    _reject(hints, name, "subsymbols", "time_scale", "pulse_kind",
            "silent_subsymbols", "rolloff", "spread")
    nu_f = _as_fraction(_take(hints, "freq_scale", Fraction(1, 2)), "freq_scale")
    if not (0 < nu_f < 1):
        raise IncompatibleHintError(
            f"preset {name!r} compresses the subcarrier spacing and needs "
            f"0 < freq_scale < 1, got {nu_f}"
        )
    K = _take(hints, "subcarriers", 16)
    # On an integer grid a compression a/b puts b overlapping subsymbol
    # positions in the block; the descriptor records the single-subsymbol
    # reading of the format, the matrix keeps all N = K*b columns.
    M = nu_f.denominator
    R, T, P, Q = _structured(K, M, Fraction(1), nu_f, name)
    S = R * T
    return _finish(
        hints,
        name,
        samples_per_period=R,
        periods=T,
        subsymbol_spacing=P,
        subcarrier_spacing=Q,
        pulse_kind="rect",
        cp_length=_take(hints, "cp_length", max(S // 4, 1)),
        cs_window_length=_take(hints, "cs_window_length", 0),
    )


_TABLE = {
    # name: (builder, orthogonal, cp, offset, cyclic_filter, scenario, notes)
    "gfdm": (_build_gfdm, CONDITIONAL, True, CONDITIONAL, True, "all", ()),
    "ofdm": (_build_ofdm, YES, True, CONDITIONAL, False, "legacy systems", ()),
    "block-ofdm": (_build_block_ofdm, YES, True, NO, False, "bitpipe", ()),
    "sc-fde": (_build_sc_fde, YES, True, NO, False, "IoT/MTC", ()),
    "sc-fdm": (_build_sc_fdm, YES, True, NO, False, "IoT/MTC", ()),
    "fbmc-oqam": (_build_fbmc_oqam, YES, False, YES, False, "WRAN, bitpipe", ()),
    "fbmc-fmt": (
        _build_fbmc_fmt, YES, False, NO, False, "WRAN",
        ("frequency expansion defaults to 2 by convention",),
    ),
    "fbmc-coqam": (_build_fbmc_coqam, YES, True, YES, True, "tactile Internet", ()),
    "cb-fmt": (
        _build_cb_fmt, YES, True, NO, True, "tactile Internet",
        ("frequency expansion defaults to 2 by convention",),
    ),
    "ftn": (
        _build_ftn, NO, False, YES, False, "bitpipe",
        (
            "isotropic pulse approximated by a periodized gaussian",
            "time compression defaults to 4/5 by convention",
        ),
    ),
    "sefdm": (
        _build_sefdm, NO, True, NO, False, "bitpipe",
        ("frequency compression a/b realized with b subsymbol positions on the integer grid",),
    ),
}

PRESET_NAMES = tuple(_TABLE)


def make_preset(name: str, **hints) -> tuple[ValidatedConfig, PresetDescriptor]:
    """Build and validate a named format.

    Size hints: subcarriers, subsymbols, cp_length, cs_window_length,
    rolloff, spread, time_scale, freq_scale, silent_subsymbols,
    sample_rate_hz.  A hint that contradicts the preset's fixed structure
    raises IncompatibleHintError.
    """
    try:
        builder, orth, cp, offset, cyclic, scenario, notes = _TABLE[name]
    except KeyError:
        raise IncompatibleHintError(
            f"unknown preset {name!r}, expected one of {list(PRESET_NAMES)}"
        ) from None
    cfg = builder(dict(hints))
    descriptor = PresetDescriptor(
        name=name,
        claims=PresetClaims(orthogonal=orth, cp=cp, offset=offset, cyclic_filter=cyclic),
        scenario_tag=scenario,
        notes=notes,
    )
    return validate_config(cfg), descriptor


def descriptor_to_dict(desc: PresetDescriptor) -> dict:
    return {
        "name": desc.name,
        "claims": {
            "orthogonal": desc.claims.orthogonal,
            "cp": desc.claims.cp,
            "offset": desc.claims.offset,
            "cyclic_filter": desc.claims.cyclic_filter,
        },
        "scenario_tag": desc.scenario_tag,
        "notes": list(desc.notes),
    }


@dataclass
class PresetCheck:
    """Measured evidence for one preset's claims."""

    name: str
    claims: PresetClaims
    status: str  # "verified" or "recorded" (conditional claims are not asserted)
    gram_max_offdiag: float
    rank: int
    n_columns: int
    min_singular_value: float
    oqam_roundtrip_error: float | None = None


def verify_preset_claims(name: str, **hints) -> PresetCheck:
    """Measure a built preset against its Table of claims.

    orthogonal "yes" without offset demands a numerically identity Gram
    matrix; with offset it demands a clean offset round trip while the
    plain complex Gram is visibly non-orthogonal (that pair is what makes
    the format offset-orthogonal).  orthogonal "no" demands rank < N or a
    visibly non-orthogonal Gram.  Conditional claims are recorded, not
    asserted.  A contradiction raises ClaimViolatedError.
    """
    validated, desc = make_preset(name, **hints)
    grid = validated.grid
    pulse = pulse_from_config(validated)
    mat = build_matrix(pulse, grid)
    gram = mat.matrix.conj().T @ mat.matrix
    offdiag = float(np.max(np.abs(gram - np.diag(np.diag(gram)))))
    check = PresetCheck(
        name=name,
        claims=desc.claims,
        status="verified",
        gram_max_offdiag=offdiag,
        rank=mat.rank,
        n_columns=mat.n_columns,
        min_singular_value=float(mat.singular_values[-1]),
    )

    if validated.config.oqam:
        rng = np.random.default_rng(0x5EED)
        sent = rng.choice([-1.0, 1.0], size=(grid.num_subcarriers, 2 * grid.num_subsymbols))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # ftn's gaussian pulse is knowingly not root-Nyquist
            back = oqam_demap(oqam_map(sent, pulse, grid), pulse, grid)
        check.oqam_roundtrip_error = float(np.max(np.abs(back - sent)))

    claim = desc.claims.orthogonal
    if claim == YES:
        if desc.claims.offset == YES:
            if check.oqam_roundtrip_error > OQAM_ROUNDTRIP_TOL:
                raise ClaimViolatedError(
                    f"{name}: offset round-trip error {check.oqam_roundtrip_error:.3e} "
                    f"exceeds {OQAM_ROUNDTRIP_TOL}"
                )
            if offdiag < NONORTHOGONAL_OFFDIAG_FLOOR:
                raise ClaimViolatedError(
                    f"{name}: expected a non-orthogonal complex Gram next to a clean "
                    f"offset round trip, measured offdiag {offdiag:.3e}"
                )
        elif offdiag > ORTHOGONAL_OFFDIAG_TOL:
            raise ClaimViolatedError(
                f"{name}: claimed orthogonal but Gram offdiag is {offdiag:.3e}"
            )
    elif claim == NO:
        if not (mat.rank < mat.n_columns or offdiag > NONORTHOGONAL_OFFDIAG_FLOOR):
            raise ClaimViolatedError(
                f"{name}: claimed non-orthogonal but rank={mat.rank} of "
                f"{mat.n_columns} and offdiag={offdiag:.3e}"
            )
    else:
        check.status = "recorded"
    return check


def verify_all_presets() -> list:
    """Claim check over every preset at its default sizes."""
    return [verify_preset_claims(name) for name in PRESET_NAMES]
