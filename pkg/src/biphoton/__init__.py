"""Two-photon interference in an unbalanced Michelson interferometer.

Simulates coincidence counting of parametric down-converted photon pairs:
spectral model of the pair source, the interferometer's output superposition,
analytic and Monte Carlo rate engines, TAC/MCA detection, and fringe
visibility analysis with a classical-bound verdict.
"""

__version__ = "0.1.0"

from .analysis import (  # noqa: F401
    FringeScan,
    PztCalibration,
    Regime,
    Verdict,
    VisibilityReport,
    classify_regime,
    fit_visibility,
    run_fringe_scan,
    volts_to_offset,
)
from .detection import (  # noqa: F401
    DetectorModel,
    TacConfig,
    TacHistogram,
    acquire_histogram,
    gate_count,
)
from .engines import (  # noqa: F401
    EventStream,
    SourceRates,
    classical_monte_carlo,
    classical_rate,
    generate_events,
    quantum_rate_narrow,
    quantum_rate_wide,
)
from .interferometer import (  # noqa: F401
    CoincidenceClass,
    CoincidenceClassSet,
    InterferometerGeometry,
    coincidence_classes,
    delta_L,
    detector_amplitudes,
)
from .spectral import (  # noqa: F401
    SpectralProfile,
    SpectralShape,
    WavenumberPair,
    coherence_length,
    sample_pair,
    wavelength_to_wavenumber,
    wavenumber_to_wavelength,
)
