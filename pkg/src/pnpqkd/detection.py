"""Gated InGaAs APD model: efficiency, dark counts and click sampling.

The balanced subtraction circuit is represented only by its effective dark
count probability. A conventional (unbalanced) detector with the same
quantum efficiency has a dark count 17 dB higher.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ParameterError, StateError

BALANCED_GAIN_DB = 17.0


class DetectorMode(str, enum.Enum):
    BALANCED = "balanced"
    CONVENTIONAL = "conventional"


class ClickCause(str, enum.Enum):
    SIGNAL = "signal"
    DARK = "dark"
    STRAY = "stray"


def _check_prob(value, name):
    if not (math.isfinite(value) and 0.0 <= value <= 1.0):
        raise ParameterError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class DetectorSpec:
    """One gated APD. Defaults are the balanced detector at -106.5 C."""

    quantum_efficiency: float = 0.10
    dark_count_prob_per_gate: float = 2e-7
    gate_width_ns: float = 0.75
    mode: DetectorMode = DetectorMode.BALANCED
    afterpulse_prob: float = 0.0

    def __post_init__(self):
        _check_prob(self.quantum_efficiency, "quantum_efficiency")
        _check_prob(self.dark_count_prob_per_gate, "dark_count_prob_per_gate")
        _check_prob(self.afterpulse_prob, "afterpulse_prob")
        if not (math.isfinite(self.gate_width_ns) and self.gate_width_ns > 0):
            raise ParameterError(f"gate_width_ns must be > 0, got {self.gate_width_ns!r}")
        try:
            object.__setattr__(self, "mode", DetectorMode(self.mode))
        except ValueError:
            raise ParameterError(f"unknown detector mode {self.mode!r}") from None


@dataclass(frozen=True)
class ClickResult:
    clicked: bool
    cause: Optional[ClickCause] = None

    def __post_init__(self):
        if self.clicked != (self.cause is not None):
            raise ParameterError("cause must be set exactly when clicked")


def _source_probs(mean_photons_at_detector, noise_prob_per_gate, spec):
    if not (math.isfinite(mean_photons_at_detector) and mean_photons_at_detector >= 0):
        raise ParameterError(f"mean photon number must be >= 0, got {mean_photons_at_detector!r}")
    _check_prob(noise_prob_per_gate, "noise_prob_per_gate")
    p_signal = -math.expm1(-spec.quantum_efficiency * mean_photons_at_detector)
    return p_signal, spec.dark_count_prob_per_gate, noise_prob_per_gate


def click_probability(mean_photons_at_detector: float, noise_prob_per_gate: float,
                      spec: DetectorSpec) -> float:
    """Probability that at least one of signal, dark or stray-noise events fires the gate.

    The three sources are independent; signal detection follows Poisson
    thinning of the incident coherent state by the quantum efficiency.
    """
    p_signal, p_dark, p_noise = _source_probs(mean_photons_at_detector, noise_prob_per_gate, spec)
    return 1.0 - (1.0 - p_dark) * (1.0 - p_noise) * (1.0 - p_signal)


def sample_click(mean_photons_at_detector: float, noise_prob_per_gate: float,
                 spec: DetectorSpec, rng: np.random.Generator) -> ClickResult:
    """Draw one gate. The cause tag is chosen in proportion to each source's probability."""
    probs = _source_probs(mean_photons_at_detector, noise_prob_per_gate, spec)
    p_click = 1.0 - (1.0 - probs[0]) * (1.0 - probs[1]) * (1.0 - probs[2])
    if p_click == 0.0 or rng.random() >= p_click:
        return ClickResult(False)
    weights = np.asarray(probs) / sum(probs)
    cause = (ClickCause.SIGNAL, ClickCause.DARK, ClickCause.STRAY)[rng.choice(3, p=weights)]
    return ClickResult(True, cause)


def snr_db(signal_prob_per_gate: float, noise_prob_per_gate: float) -> float:
    """Signal-to-noise extinction ratio in dB."""
    if not (signal_prob_per_gate > 0 and noise_prob_per_gate > 0):
        raise ParameterError("signal and noise probabilities must both be strictly positive")
    return 10.0 * math.log10(signal_prob_per_gate / noise_prob_per_gate)


def conventional_equivalent(spec: DetectorSpec) -> DetectorSpec:
    """The unbalanced detector with the same efficiency: dark counts up by 17 dB."""
    if spec.mode is not DetectorMode.BALANCED:
        raise StateError("conventional_equivalent requires a balanced detector spec")
    dark = min(1.0, spec.dark_count_prob_per_gate * 10.0 ** (BALANCED_GAIN_DB / 10.0))
    return replace(spec, mode=DetectorMode.CONVENTIONAL, dark_count_prob_per_gate=dark)
