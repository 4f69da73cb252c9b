"""Unit-energy symbol alphabets and hard decisions."""
from __future__ import annotations

import numpy as np

_QPSK = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2.0)
_QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0])
_QAM16 = ((_QAM16_LEVELS[:, None] + 1j * _QAM16_LEVELS[None, :]) / np.sqrt(10.0)).reshape(-1)

ALPHABETS = {"qpsk": _QPSK, "qam16": _QAM16}


def alphabet(name: str) -> np.ndarray:
    try:
        return ALPHABETS[name]
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}, expected one of {sorted(ALPHABETS)}") from None


def random_symbols(name: str, shape, rng: np.random.Generator) -> np.ndarray:
    """Uniform i.i.d. draw from the named alphabet."""
    table = alphabet(name)
    return table[rng.integers(0, len(table), size=shape)]


def hard_decision(estimates: np.ndarray, name: str) -> np.ndarray:
    """Nearest constellation point, elementwise."""
    table = alphabet(name)
    est = np.asarray(estimates, dtype=complex)
    idx = np.abs(est.reshape(-1, 1) - table.reshape(1, -1)).argmin(axis=1)
    return table[idx].reshape(est.shape)
