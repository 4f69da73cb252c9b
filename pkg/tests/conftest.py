import numpy as np
import pytest

from gfdmkit import WaveformConfig, validate_config


@pytest.fixture
def gfdm_cfg():
    """Flexible baseline at desk scale: K=16, M=5, RC pulse."""
    return validate_config(
        WaveformConfig(
            samples_per_period=16,
            periods=5,
            subsymbol_spacing=16,
            subcarrier_spacing=5,
            pulse_kind="rc",
            rolloff=0.5,
        )
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
