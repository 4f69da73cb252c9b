"""Block modulation and demodulation.

A block carries N = K*M data symbols; symbol (k, m) rides the prototype
pulse circularly shifted by m subsymbol spacings in time and k subcarrier
spacings in frequency.  Stacking the shifted waveforms as columns (ordered
n = k*M + m) gives the S x N modulation matrix; ``modulate`` synthesizes
the same signal without forming the matrix and must agree with it to
float precision.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    LengthMismatchError,
    NotRootNyquistWarning,
    OddSubsymbolSpacingError,
    RankDeficientError,
)
from .params import GridParams
from .pulses import PrototypePulse, is_root_nyquist, shift_pulse

RANK_EPS = 1e-12

RECEIVERS = ("mf", "zf", "mmse")


@dataclass
class ResourceGrid:
    """K x M complex symbol matrix bound to its grid geometry."""

    symbols: np.ndarray
    grid: GridParams

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=complex)
        want = (self.grid.num_subcarriers, self.grid.num_subsymbols)
        if self.symbols.shape != want:
            raise DimensionMismatchError(
                f"symbol matrix shape {self.symbols.shape} != K x M {want}"
            )

    @classmethod
    def zeros(cls, grid: GridParams) -> "ResourceGrid":
        return cls(np.zeros((grid.num_subcarriers, grid.num_subsymbols), complex), grid)

    def vec(self) -> np.ndarray:
        # column n = k*M + m, i.e. row-major flattening of the K x M matrix
        return self.symbols.reshape(-1)


@dataclass
class BlockSignal:
    """One modulated block of S samples (framed variants live in framing.py)."""

    samples: np.ndarray
    framed: bool = False

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)


@dataclass
class ModMatrix:
    """Dense modulation matrix with its SVD-based numerical rank.

    Rank counts singular values above S * eps * sigma_max with eps = 1e-12,
    so a deliberately overloaded grid reports rank < N instead of noise-rank.
    """

    matrix: np.ndarray
    grid: GridParams
    rank: int = field(init=False)
    singular_values: np.ndarray = field(init=False, repr=False)
    _svd: tuple = field(init=False, repr=False, default=None)

    def __post_init__(self):
        u, s, vh = np.linalg.svd(self.matrix, full_matrices=False)
        self._svd = (u, s, vh)
        self.singular_values = s
        thresh = self.matrix.shape[0] * RANK_EPS * (s[0] if s.size else 0.0)
        self.rank = int(np.sum(s > thresh))

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]

    def pseudo_inverse_apply(self, x: np.ndarray) -> np.ndarray:
        """Minimum-norm least-squares solve via the cached SVD."""
        u, s, vh = self._svd
        return vh.conj().T @ ((u.conj().T @ x) / s)


def _carriers(grid: GridParams) -> np.ndarray:
    S = grid.total_samples
    k = np.arange(grid.num_subcarriers)
    n = np.arange(S)
    return np.exp(2j * np.pi * grid.subcarrier_spacing * np.outer(k, n) / S)


def _time_shifts(samples: np.ndarray, grid: GridParams) -> np.ndarray:
    P = grid.subsymbol_spacing
    return np.stack([np.roll(samples, m * P) for m in range(grid.num_subsymbols)])


def build_matrix(pulse: PrototypePulse, grid: GridParams) -> ModMatrix:
    """S x N matrix whose column k*M + m is the (k, m)-shifted pulse."""
    S = grid.total_samples
    K, M = grid.num_subcarriers, grid.num_subsymbols
    A = np.empty((S, K * M), dtype=complex)
    for k in range(K):
        for m in range(M):
            A[:, k * M + m] = shift_pulse(pulse, m, k, grid)
    return ModMatrix(matrix=A, grid=grid)


def _synthesize(symbols: np.ndarray, samples: np.ndarray, grid: GridParams) -> np.ndarray:
    return ((symbols @ _time_shifts(samples, grid)) * _carriers(grid)).sum(axis=0)


def _project(x: np.ndarray, samples: np.ndarray, grid: GridParams) -> np.ndarray:
    # matched filter against every (k, m) shift of `samples`
    return (x * _carriers(grid).conj()) @ _time_shifts(samples, grid).conj().T


def modulate(rgrid: ResourceGrid, pulse: PrototypePulse) -> BlockSignal:
    """Weighted sum of shifted pulses; equals ModMatrix @ vec(symbols)."""
    if len(pulse.samples) != rgrid.grid.total_samples:
        raise LengthMismatchError(
            f"pulse length {len(pulse.samples)} != block length {rgrid.grid.total_samples}"
        )
    return BlockSignal(_synthesize(rgrid.symbols, pulse.samples, rgrid.grid))


def demodulate(
    block: BlockSignal,
    matrix: ModMatrix,
    receiver: str = "mf",
    noise_var: float | None = None,
) -> ResourceGrid:
    """Recover the symbol grid from one unframed block.

    receiver:
        "mf"    matched filter, A^H x
        "zf"    minimum-norm least squares through the SVD; raises
                RankDeficientError when the numerical rank is below N
        "mmse"  (A^H A + noise_var I)^-1 A^H x; noise_var is an explicit
                per-sample noise variance, never estimated from the signal
    """
    if receiver not in RECEIVERS:
        raise ValueError(f"unknown receiver {receiver!r}, expected one of {RECEIVERS}")
    if block.framed:
        raise LengthMismatchError("demodulate expects an unframed block; strip the prefix first")
    x = np.asarray(block.samples, dtype=complex)
    if x.shape != (matrix.grid.total_samples,):
        raise LengthMismatchError(
            f"block has {x.shape} samples, matrix expects {matrix.grid.total_samples}"
        )
    A = matrix.matrix
    if receiver == "mf":
        est = A.conj().T @ x
    elif receiver == "zf":
        if matrix.rank < matrix.n_columns:
            raise RankDeficientError(
                matrix.rank, matrix.n_columns, float(matrix.singular_values[-1])
            )
        est = matrix.pseudo_inverse_apply(x)
    else:
        if noise_var is None:
            raise ValueError("mmse receiver needs an explicit noise_var")
        G = A.conj().T @ A
        G[np.diag_indices_from(G)] += noise_var
        est = np.linalg.solve(G, A.conj().T @ x)
    K, M = matrix.grid.num_subcarriers, matrix.grid.num_subsymbols
    return ResourceGrid(est.reshape(K, M), matrix.grid)


def _oqam_phases(grid: GridParams):
    # even subcarriers carry the in-phase input directly, odd ones carry the
    # quadrature input rotated onto the imaginary axis; the half-shifted
    # expansion gets the complementary component
    even = (np.arange(grid.num_subcarriers) % 2 == 0)[:, None]
    return np.where(even, 1.0 + 0j, 1j), np.where(even, 1j, 1.0 + 0j)


def _oqam_check(pulse: PrototypePulse, grid: GridParams) -> np.ndarray:
    if grid.subsymbol_spacing % 2 != 0:
        raise OddSubsymbolSpacingError(
            f"offset mapping needs an even subsymbol spacing, got {grid.subsymbol_spacing}"
        )
    if grid.num_subcarriers % 2 != 0:
        raise DimensionMismatchError(
            "offset mapping alternates I/Q by subcarrier parity and needs an "
            f"even subcarrier count, got {grid.num_subcarriers}"
        )
    if not is_root_nyquist(pulse, grid):
        warnings.warn(
            f"pulse kind {pulse.kind!r} is not root-Nyquist; offset demapping "
            "is not guaranteed interference free",
            NotRootNyquistWarning,
            stacklevel=3,
        )
    return np.roll(pulse.samples, grid.subsymbol_spacing // 2)


def oqam_map(real_grid: np.ndarray, pulse: PrototypePulse, grid: GridParams) -> BlockSignal:
    """Offset mapping of a K x 2M real grid onto two half-shifted expansions.

    Column 2m feeds the unshifted expansion, column 2m+1 the expansion
    whose pulse is delayed by half a subsymbol; within each expansion even
    subcarriers send their value on the real axis and odd subcarriers on
    the imaginary axis (swapped for the delayed expansion).
    """
    real_grid = np.asarray(real_grid, dtype=float)
    K, M = grid.num_subcarriers, grid.num_subsymbols
    if real_grid.shape != (K, 2 * M):
        raise DimensionMismatchError(
            f"offset grid shape {real_grid.shape} != K x 2M = {(K, 2 * M)}"
        )
    half = _oqam_check(pulse, grid)
    th1, th2 = _oqam_phases(grid)
    x = _synthesize(real_grid[:, 0::2] * th1, pulse.samples, grid)
    x = x + _synthesize(real_grid[:, 1::2] * th2, half, grid)
    return BlockSignal(x)


def oqam_demap(block: BlockSignal, pulse: PrototypePulse, grid: GridParams) -> np.ndarray:
    """Matched-filter both expansions and keep the interference-free component."""
    x = np.asarray(block.samples, dtype=complex)
    if x.shape != (grid.total_samples,):
        raise LengthMismatchError(
            f"block has {x.shape} samples, expected {grid.total_samples}"
        )
    half = _oqam_check(pulse, grid)
    y1 = _project(x, pulse.samples, grid)
    y2 = _project(x, half, grid)
    even = (np.arange(grid.num_subcarriers) % 2 == 0)[:, None]
    out = np.empty((grid.num_subcarriers, 2 * grid.num_subsymbols))
    out[:, 0::2] = np.where(even, y1.real, y1.imag)
    out[:, 1::2] = np.where(even, y2.imag, y2.real)
    return out
