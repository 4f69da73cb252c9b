"""Exception and warning types shared across the package."""
from __future__ import annotations

from dataclasses import dataclass


class GfdmError(Exception):
    """Base class for all errors raised by this package."""


@dataclass(frozen=True)
class ConfigViolation:
    """One violated configuration constraint."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class InvalidConfigError(GfdmError, ValueError):
    """Configuration failed validation; carries every violated constraint."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    def codes(self):
        return {v.code for v in self.violations}


class IncompatibleHintError(GfdmError, ValueError):
    """A preset size hint contradicts the preset's fixed structure."""


class IndexOutOfGridError(GfdmError, IndexError):
    """Subsymbol or subcarrier index outside the grid."""


class DimensionMismatchError(GfdmError, ValueError):
    """Array shape does not match the grid it is used with."""


class LengthMismatchError(GfdmError, ValueError):
    """Sample vector length does not match the expected block length."""


class OddSubsymbolSpacingError(GfdmError, ValueError):
    """Offset (half-subsymbol) operations need an even subsymbol spacing."""


class SilentSubsymbolsOutOfRangeError(GfdmError, ValueError):
    """Silent subsymbol count must satisfy 0 <= count <= M - 2 when nonzero."""


class RankDeficientError(GfdmError):
    """Zero-forcing requested on a matrix whose numerical rank is below N.

    Expected for deliberately overloaded configurations; carries the
    measured rank and the smallest singular value so callers can report
    them instead of treating this as a crash.
    """

    def __init__(self, rank: int, n_columns: int, min_singular_value: float):
        self.rank = int(rank)
        self.n_columns = int(n_columns)
        self.min_singular_value = float(min_singular_value)
        super().__init__(
            f"matrix rank {rank} < {n_columns} columns "
            f"(min singular value {min_singular_value:.3e})"
        )


class ZeroBinError(GfdmError):
    """Zero-forcing frequency-domain equalizer hit a spectral null."""

    def __init__(self, bins):
        self.bins = tuple(int(b) for b in bins)
        super().__init__(f"channel frequency response is below threshold at bins {self.bins}")


class TooShortError(GfdmError, ValueError):
    """Input stream shorter than one analysis segment."""


class OverlappingAllocationsError(GfdmError, ValueError):
    """Two users were assigned intersecting subcarrier sets."""


class ClaimViolatedError(GfdmError):
    """A preset's measured behavior contradicts its recorded claims."""


class DegeneratePulseWarning(UserWarning):
    """Pulse construction hit a degenerate but allowed corner case."""


class NotRootNyquistWarning(UserWarning):
    """Offset mapping used with a pulse that is not root-Nyquist; the
    demapped grid is then not guaranteed interference free."""
