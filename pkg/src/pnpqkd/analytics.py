"""Closed-form link model and the experiment drivers built on it.

The error model is visibility dilution: the intrinsic fringe contrast is
reduced by dark and stray counts, and QBER = (1 - V)/2. Every driver has an
analytic mode and, where noted, a Monte-Carlo mode running the protocol engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .config import SystemConfig
from .detection import conventional_equivalent
from .errors import ParameterError, SolverError
from .noise import BB84_PHASE_DIFFERENCES, noise_floor_per_detector, stray_prob_per_pulse
from .optics import FiberSpec, fiber_transmittance
from .protocol import block_rng, run_session

BRACKET_KM = (0.0, 1000.0)
REFERENCE_VISIBILITY = 0.83
REFERENCE_DISTANCE_KM = 100.0


@dataclass(frozen=True)
class FringeScan:
    phase_points: list
    counts1: list
    counts2: list
    visibility1: float
    visibility2: float

    def __post_init__(self):
        n = len(self.phase_points)
        if n < 2 or len(self.counts1) != n or len(self.counts2) != n:
            raise ParameterError("fringe scan lists must have equal length >= 2")


@dataclass(frozen=True)
class SweepPoint:
    distance_km: float
    analytic_raw_prob: float
    analytic_qber: float
    mc_raw_prob: Optional[float]
    mc_qber: Optional[float]
    dark_floor: float
    stray_floor: float


def visibility(i_max, i_min) -> float:
    """Fringe visibility ``(I_max - I_min) / (I_max + I_min)``."""
    if i_min < 0 or i_max < 0:
        raise ParameterError("intensities must be non-negative")
    if i_min > i_max:
        raise ParameterError(f"i_min ({i_min!r}) exceeds i_max ({i_max!r})")
    total = i_max + i_min
    if total == 0:
        raise ParameterError("visibility undefined for zero total intensity")
    return (i_max - i_min) / total


def fidelity(v: float) -> float:
    if not 0.0 <= v <= 1.0:
        raise ParameterError(f"visibility must lie in [0, 1], got {v!r}")
    return (v + 1.0) / 2.0


def qber_from_fidelity(f: float) -> float:
    if not 0.0 <= f <= 1.0:
        raise ParameterError(f"fidelity must lie in [0, 1], got {f!r}")
    return 1.0 - f


def _signal_mean(config, distance_km):
    fiber = replace(config.fiber, length_km=float(distance_km))
    return config.mean_photon_number * fiber_transmittance(fiber)


def _detector_click(config, distance_km, which, delta_phase):
    """Click probability of one detector at the given Alice-Bob phase difference(s).

    The signal term is the probability ``1 - exp(-eta*mu*T)`` of a detectable
    photon times the interference share of this output, so that without noise
    the fringe contrast equals the intrinsic visibility exactly.
    """
    detector = config.detector1 if which == 1 else config.detector2
    sign = 1.0 if which == 1 else -1.0
    share = 0.5 * (1.0 + sign * config.interferometer.intrinsic_visibility * np.cos(delta_phase))
    floor = noise_floor_per_detector(config, which, distance_km)
    detected = -math.expm1(-detector.quantum_efficiency * _signal_mean(config, distance_km))
    signal = detected * share
    # union of independent events, written to avoid cancellation at tiny rates
    return floor + signal - floor * signal


def analytic_click_prob(config: SystemConfig, distance_km: float):
    """Return ``(p_max, p_min, p_raw_total)`` per gate at ``distance_km``.

    ``p_max``/``p_min`` are a detector's click probability at constructive and
    destructive phase, averaged over the two detectors. ``p_raw_total`` is the
    probability that either detector fires, averaged over the four equally
    likely BB84 phase differences. It uses exact Poisson splitting, so with
    equal efficiencies its signal part is ``1 - exp(-eta*mu*T)`` at every phase.
    """
    if not (math.isfinite(distance_km) and distance_km >= 0):
        raise ParameterError(f"distance_km must be >= 0, got {distance_km!r}")
    p_max = 0.5 * (_detector_click(config, distance_km, 1, 0.0)
                   + _detector_click(config, distance_km, 2, math.pi))
    p_min = 0.5 * (_detector_click(config, distance_km, 1, math.pi)
                   + _detector_click(config, distance_km, 2, 0.0))
    # photons split between the outputs as independent Poisson streams
    share1 = 0.5 * (1.0 + config.interferometer.intrinsic_visibility * np.cos(BB84_PHASE_DIFFERENCES))
    rate = _signal_mean(config, distance_km) * (config.detector1.quantum_efficiency * share1
                                                + config.detector2.quantum_efficiency * (1.0 - share1))
    quiet = ((1.0 - noise_floor_per_detector(config, 1, distance_km))
             * (1.0 - noise_floor_per_detector(config, 2, distance_km)))
    p_raw = -float(np.mean(np.expm1(np.log(quiet) - rate)))
    return float(p_max), float(p_min), p_raw


def analytic_visibility(config: SystemConfig, distance_km: float) -> float:
    p_max, p_min, _ = analytic_click_prob(config, distance_km)
    if p_max + p_min == 0.0:
        return config.interferometer.intrinsic_visibility
    return visibility(p_max, p_min)


def analytic_qber(config: SystemConfig, distance_km: float) -> float:
    return qber_from_fidelity(fidelity(analytic_visibility(config, distance_km)))


def max_secure_distance(config: SystemConfig, qber_threshold: float = 0.10,
                        tol_km: float = 0.1) -> float:
    """Largest distance whose analytic QBER stays at or below ``qber_threshold``.

    Bisection on [0, 1000] km to ``tol_km``. Returns ``inf`` when the threshold
    is never reached inside the bracket (noise-free link).
    """
    lo, hi = BRACKET_KM
    if analytic_qber(config, lo) >= qber_threshold:
        raise SolverError("link insecure at zero distance")
    if analytic_qber(config, hi) <= qber_threshold:
        return math.inf
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        if analytic_qber(config, mid) <= qber_threshold:
            lo = mid
        else:
            hi = mid
    return lo


def calibrate_intrinsic_visibility(config: Optional[SystemConfig] = None,
                                   target_visibility: float = REFERENCE_VISIBILITY,
                                   distance_km: float = REFERENCE_DISTANCE_KM) -> float:
    """Intrinsic visibility that yields ``target_visibility`` after noise dilution at ``distance_km``."""
    config = SystemConfig() if config is None else config

    def mismatch(v):
        trial = replace(config, interferometer=replace(config.interferometer, intrinsic_visibility=v))
        return analytic_visibility(trial, distance_km) - target_visibility

    if mismatch(1.0) < 0:
        raise SolverError(f"visibility {target_visibility} unreachable at {distance_km} km")
    return brentq(mismatch, 0.0, 1.0, xtol=1e-12)


def default_phase_grid(points: int = 101) -> np.ndarray:
    """Evenly spaced phases over [0, 2*pi], endpoints included."""
    if points < 2:
        raise ParameterError("phase grid needs at least 2 points")
    return np.linspace(0.0, 2.0 * math.pi, points)


def fringe_scan(config: SystemConfig, distance_km: float, phase_grid: Sequence[float],
                n_pulses_per_point: int = 0) -> FringeScan:
    """Per-detector click probability as Alice's phase is swept with Bob's fixed at 0.

    ``n_pulses_per_point = 0`` gives analytic probabilities, otherwise
    Monte-Carlo click frequencies. Visibilities use the global max/min of each curve.
    """
    phases = np.asarray(phase_grid, dtype=float)
    if phases.ndim != 1 or len(phases) < 2 or np.ptp(phases) == 0 or not np.all(np.isfinite(phases)):
        raise ParameterError("phase grid must hold at least 2 distinct finite phases")
    if n_pulses_per_point < 0:
        raise ParameterError("n_pulses_per_point must be >= 0")
    if n_pulses_per_point == 0:
        c1 = _detector_click(config, distance_km, 1, phases)
        c2 = _detector_click(config, distance_km, 2, phases)
    else:
        c1, c2 = _mc_fringe(config.at_distance(distance_km), phases, n_pulses_per_point)
    v1 = visibility(float(np.max(c1)), float(np.min(c1))) if np.max(c1) > 0 else 0.0
    v2 = visibility(float(np.max(c2)), float(np.min(c2))) if np.max(c2) > 0 else 0.0
    return FringeScan(phases.tolist(), np.asarray(c1).tolist(), np.asarray(c2).tolist(), v1, v2)


def _mc_fringe(config, phases, n):
    mean_at_bob = _signal_mean(config, config.fiber.length_km)
    floors = [noise_floor_per_detector(config, w) for w in (1, 2)]
    v = config.interferometer.intrinsic_visibility
    out1, out2 = [], []
    for k, phase in enumerate(phases):
        rng = block_rng(config.seed, k)
        p1 = 0.5 * (1.0 + v * math.cos(phase))
        photons = rng.poisson(mean_at_bob, size=n)
        n1 = rng.binomial(photons, p1)
        hits1 = rng.binomial(n1, config.detector1.quantum_efficiency) > 0
        hits2 = rng.binomial(photons - n1, config.detector2.quantum_efficiency) > 0
        u = rng.random((2, n))
        out1.append(float(np.mean(hits1 | (u[0] < floors[0]))))
        out2.append(float(np.mean(hits2 | (u[1] < floors[1]))))
    return np.array(out1), np.array(out2)


def _point_seed(seed, index):
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def distance_sweep(config: SystemConfig, distances: Sequence[float], n_pulses: int = 0,
                   workers: int = 1) -> list[SweepPoint]:
    """Analytic (and optionally Monte-Carlo) raw click probability and QBER per distance."""
    distances = list(distances)
    if not distances:
        raise ParameterError("distances must be non-empty")
    if n_pulses < 0:
        raise ParameterError("n_pulses must be >= 0")
    points = []
    for i, d in enumerate(distances):
        d = float(d)
        if not (math.isfinite(d) and d >= 0):
            raise ParameterError(f"distance must be >= 0, got {d!r}")
        _, _, p_raw = analytic_click_prob(config, d)
        mc_raw = mc_qber = None
        if n_pulses:
            record = run_session(config.at_distance(d), n_pulses,
                                 seed=_point_seed(config.seed, i), workers=workers)
            mc_raw = record.raw_clicks / record.pulses_sent
            mc_qber = record.measured_qber
        points.append(SweepPoint(
            distance_km=d,
            analytic_raw_prob=p_raw,
            analytic_qber=analytic_qber(config, d),
            mc_raw_prob=mc_raw,
            mc_qber=mc_qber,
            dark_floor=config.detector1.dark_count_prob_per_gate,
            stray_floor=stray_prob_per_pulse(d, config.rep_rate_hz, config.stray),
        ))
    return points


def improvement_equivalent_db(config: SystemConfig, qber_threshold: float = 0.10):
    """Return ``(detector_gain_db, usable_gain_db)`` of balanced over conventional detection.

    The usable gain is the secure-distance difference with stray light as
    configured, converted to dB with the fibre loss coefficient.
    """
    conventional = replace(config, detector1=conventional_equivalent(config.detector1),
                           detector2=conventional_equivalent(config.detector2))
    detector_gain = 10.0 * math.log10(conventional.detector1.dark_count_prob_per_gate
                                      / config.detector1.dark_count_prob_per_gate)
    d_balanced = max_secure_distance(config, qber_threshold)
    d_conventional = max_secure_distance(conventional, qber_threshold)
    usable_gain = config.fiber.loss_db_per_km * (d_balanced - d_conventional)
    return detector_gain, usable_gain
