"""Cyclic prefixing, edge windowing and silent-subsymbol gating."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import LengthMismatchError, SilentSubsymbolsOutOfRangeError
from .modem import BlockSignal, ResourceGrid


@dataclass
class FramedBlock:
    """Block with its prefix attached: cp_length guard samples + S payload.

    ``zero_padded`` marks frames whose guard is zeros instead of a cyclic
    copy (no circular-convolution guarantee through a channel then).
    ``taps_exceed_cp`` is set by the channel when the impulse response was
    longer than the guard.
    """

    samples: np.ndarray
    cp_length: int
    ramp_length: int = 0
    zero_padded: bool = False
    taps_exceed_cp: bool = False

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)

    @property
    def payload_length(self) -> int:
        return len(self.samples) - self.cp_length


def raised_cosine_ramp(length: int) -> np.ndarray:
    """Smooth 0 -> 1 edge; w[i] + w[length-1-i] = 1 so abutting blocks
    windowed with the complementary ramp sum to unit gain."""
    i = np.arange(length)
    return 0.5 * (1.0 - np.cos(np.pi * (i + 0.5) / length))


def add_cp(
    block: BlockSignal,
    cp_length: int,
    ramp_length: int = 0,
    zero_padded: bool = False,
) -> FramedBlock:
    """Prepend the last cp_length samples (or zeros), optionally windowing
    the frame edges with a raised-cosine ramp of ramp_length samples."""
    x = np.asarray(block.samples, dtype=complex)
    S = len(x)
    if not (0 <= cp_length <= S):
        raise LengthMismatchError(f"cp_length must be in [0, {S}], got {cp_length}")
    if not (0 <= ramp_length <= cp_length):
        raise LengthMismatchError(
            f"ramp_length must be in [0, cp_length={cp_length}], got {ramp_length}"
        )
    guard = np.zeros(cp_length, dtype=complex) if zero_padded else x[S - cp_length :]
    frame = np.concatenate([guard, x])
    if ramp_length > 0:
        w = raised_cosine_ramp(ramp_length)
        frame[:ramp_length] *= w
        frame[-ramp_length:] *= w[::-1]
    return FramedBlock(frame, cp_length=cp_length, ramp_length=ramp_length, zero_padded=zero_padded)


def remove_cp(frame: FramedBlock) -> BlockSignal:
    """Drop the guard; with a ramp the tail ramp_length samples stay tapered."""
    return BlockSignal(frame.samples[frame.cp_length :], framed=False)


def apply_silent_subsymbols(rgrid: ResourceGrid, count: int) -> ResourceGrid:
    """Zero ceil(count/2) leading and floor(count/2) trailing subsymbols.

    count = 0 returns the grid unchanged; otherwise at least two subsymbols
    must stay active.
    """
    M = rgrid.grid.num_subsymbols
    if count == 0:
        return rgrid
    if not (0 <= count <= M - 2):
        raise SilentSubsymbolsOutOfRangeError(
            f"silent subsymbol count must be 0 or within [0, M-2={M - 2}], got {count}"
        )
    head = (count + 1) // 2
    tail = count // 2
    symbols = rgrid.symbols.copy()
    symbols[:, :head] = 0
    if tail:
        symbols[:, M - tail :] = 0
    return ResourceGrid(symbols, rgrid.grid)


def silent_mask(grid, count: int) -> np.ndarray:
    """Boolean K x M mask of the positions left active by the gating."""
    M = grid.num_subsymbols
    mask = np.ones((grid.num_subcarriers, M), dtype=bool)
    if count:
        if not (0 <= count <= M - 2):
            raise SilentSubsymbolsOutOfRangeError(
                f"silent subsymbol count must be 0 or within [0, M-2={M - 2}], got {count}"
            )
        mask[:, : (count + 1) // 2] = False
        if count // 2:
            mask[:, M - count // 2 :] = False
    return mask


def concat_blocks(frames) -> tuple[np.ndarray, list[int]]:
    """Concatenate framed blocks into one stream; returns (stream, boundaries)
    where boundaries[i] is the first sample index of frame i (a final entry
    holds the total length)."""
    boundaries = [0]
    parts = []
    for fr in frames:
        parts.append(fr.samples)
        boundaries.append(boundaries[-1] + len(fr.samples))
    if not parts:
        return np.zeros(0, dtype=complex), boundaries
    return np.concatenate(parts), boundaries
