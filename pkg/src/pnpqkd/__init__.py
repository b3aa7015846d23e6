"""Plug-and-play phase-encoded BB84 link simulator.

A Monte-Carlo photon-counting engine and a closed-form link model for a
weak-coherent-pulse QKD system with balanced gated InGaAs detectors, fibre
loss and Rayleigh-backscatter stray light.
"""

__version__ = "0.1.0"

from .errors import ConfigError, ParameterError, SolverError, StateError
from .optics import (
    FiberSpec,
    InterferometerSpec,
    OpticalPulse,
    attenuate,
    fiber_transmittance,
    interference_probabilities,
    sample_photon_number,
    temporal_broadening_ns,
)
from .detection import (
    ClickCause,
    ClickResult,
    DetectorMode,
    DetectorSpec,
    click_probability,
    conventional_equivalent,
    sample_click,
    snr_db,
)
from .noise import StrayLightModel, noise_floor_per_detector, stray_prob_per_pulse
from .config import SystemConfig, dump_config, load_config, parse_config
from .protocol import (
    Disposition,
    PulseOutcome,
    SessionRecord,
    encode_phase,
    run_session,
    sift,
    simulate_outcomes,
    simulate_pulse,
)
from .analytics import (
    FringeScan,
    SweepPoint,
    analytic_click_prob,
    analytic_qber,
    analytic_visibility,
    calibrate_intrinsic_visibility,
    distance_sweep,
    fidelity,
    fringe_scan,
    improvement_equivalent_db,
    max_secure_distance,
    qber_from_fidelity,
    visibility,
)
from .output import RunManifest, emit_csv
