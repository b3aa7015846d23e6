"""Weak coherent pulses, fibre loss, dispersion and two-output interference.

All functions are pure; randomness only enters through an explicit
:class:`numpy.random.Generator`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

TWO_PI = 2.0 * math.pi


def _check_finite_nonneg(value, name):
    if not math.isfinite(value) or value < 0:
        raise ParameterError(f"{name} must be finite and non-negative, got {value!r}")


@dataclass(frozen=True)
class OpticalPulse:
    """A weak coherent pulse: Poissonian photon number with a single phase."""

    mean_photon_number: float
    phase: float = 0.0

    def __post_init__(self):
        _check_finite_nonneg(self.mean_photon_number, "mean_photon_number")
        if not math.isfinite(self.phase):
            raise ParameterError(f"phase must be finite, got {self.phase!r}")
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)


@dataclass(frozen=True)
class FiberSpec:
    length_km: float = 100.0
    loss_db_per_km: float = 0.25
    dispersion_ps_per_nm_km: float = 17.0

    def __post_init__(self):
        _check_finite_nonneg(self.length_km, "length_km")
        _check_finite_nonneg(self.loss_db_per_km, "loss_db_per_km")
        _check_finite_nonneg(self.dispersion_ps_per_nm_km, "dispersion_ps_per_nm_km")

    @property
    def loss_db(self) -> float:
        return self.length_km * self.loss_db_per_km


@dataclass(frozen=True)
class InterferometerSpec:
    """Noise-free fringe contrast of the Mach-Zehnder/Faraday-mirror loop.

    The default 0.87 is a calibration: it makes the noise-diluted fringe
    visibility at 100 km equal 0.83 with the default detector and stray-light
    settings (see :func:`pnpqkd.analytics.calibrate_intrinsic_visibility`).
    """

    intrinsic_visibility: float = 0.87

    def __post_init__(self):
        v = self.intrinsic_visibility
        if not (math.isfinite(v) and 0.0 <= v <= 1.0):
            raise ParameterError(f"intrinsic_visibility must lie in [0, 1], got {v!r}")


def fiber_transmittance(fiber: FiberSpec) -> float:
    """Power transmittance ``10**(-loss_dB/10)`` of a fibre span."""
    return 10.0 ** (-fiber.loss_db / 10.0)


def attenuate(pulse: OpticalPulse, transmittance: float) -> OpticalPulse:
    if not (0.0 <= transmittance <= 1.0):
        raise ParameterError(f"transmittance must lie in [0, 1], got {transmittance!r}")
    return OpticalPulse(pulse.mean_photon_number * transmittance, pulse.phase)


def interference_probabilities(phase_alice, phase_bob, spec: InterferometerSpec):
    """Single-photon output probabilities ``(p_out1, p_out2)`` of the interferometer.

    The phase difference is taken before any reduction mod 2*pi. Accepts
    scalars or numpy arrays; ``p_out2`` is computed as ``1 - p_out1`` so the
    pair sums to one exactly.
    """
    delta = np.subtract(phase_alice, phase_bob)
    p1 = 0.5 * (1.0 + spec.intrinsic_visibility * np.cos(delta))
    p1 = np.clip(p1, 0.0, 1.0)
    p2 = 1.0 - p1
    if np.ndim(p1) == 0:
        return float(p1), float(p2)
    return p1, p2


def temporal_broadening_ns(fiber: FiberSpec, spectral_width_nm: float) -> float:
    """Chromatic-dispersion pulse spread in ns (diagnostic only, never degrades counts)."""
    _check_finite_nonneg(spectral_width_nm, "spectral_width_nm")
    return fiber.dispersion_ps_per_nm_km * spectral_width_nm * fiber.length_km / 1000.0


def sample_photon_number(mean: float, rng: np.random.Generator) -> int:
    _check_finite_nonneg(mean, "mean")
    if mean == 0.0:
        return 0
    return int(rng.poisson(mean))
