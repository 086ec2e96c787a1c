import math

import numpy as np
import pytest

from biphoton import (
    InterferometerGeometry,
    SourceRates,
    SpectralProfile,
    wavelength_to_wavenumber,
)

PUMP_WAVELENGTH = 427e-9
COHERENCE_LENGTH = 100e-6


@pytest.fixture
def k_pump():
    return wavelength_to_wavenumber(PUMP_WAVELENGTH)


@pytest.fixture
def profile(k_pump):
    return SpectralProfile(k_pump=k_pump, delta_k=1.0 / COHERENCE_LENGTH)


@pytest.fixture
def geometry():
    # delta_L = 0.55 m, the bench arrangement scale
    return InterferometerGeometry(path_short=0.5, path_long_base=1.05)


@pytest.fixture
def rates():
    return SourceRates(pair_rate=1.0e5, rc0=1.0e5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240854)


def phase_geometry(geometry, k_pump, phase):
    """Geometry whose pump fringe phase is ``phase`` (mod 2*pi)."""
    from biphoton.interferometer import offset_for_phase

    return geometry.with_offset(offset_for_phase(k_pump, geometry, phase))
