"""Phase-encoded BB84 over the simulated plug-and-play link.

Alice encodes ``bit*pi + basis*pi/2``; Bob applies ``basis*pi/2`` in his
interferometer. Detector 1 reads bit 0, detector 2 bit 1, and gates where
both fire are discarded.

Randomness is counter-based: pulses are processed in fixed blocks of
:data:`BLOCK_SIZE` and block ``k`` draws from a Philox stream keyed by the
master seed with counter ``k``. The result is identical however the blocks
are distributed over workers.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import SystemConfig
from .errors import ParameterError
from .noise import noise_floor_per_detector
from .optics import fiber_transmittance, interference_probabilities, sample_photon_number

BLOCK_SIZE = 1 << 18


class Disposition(str, enum.Enum):
    NO_CLICK = "no_click"
    DOUBLE_CLICK_DISCARDED = "double_click_discarded"
    KEPT = "kept"


def _disposition(click1, click2):
    if click1 and click2:
        return Disposition.DOUBLE_CLICK_DISCARDED
    if click1 or click2:
        return Disposition.KEPT
    return Disposition.NO_CLICK


@dataclass(frozen=True)
class PulseOutcome:
    pulse_index: int
    alice_bit: int
    alice_basis: int
    bob_basis: int
    click1: bool
    click2: bool
    disposition: Optional[Disposition] = None

    def __post_init__(self):
        for name in ("alice_bit", "alice_basis", "bob_basis"):
            if getattr(self, name) not in (0, 1):
                raise ParameterError(f"{name} must be 0 or 1")
        expected = _disposition(self.click1, self.click2)
        if self.disposition is None:
            object.__setattr__(self, "disposition", expected)
        elif Disposition(self.disposition) is not expected:
            raise ParameterError("disposition inconsistent with detector clicks")

    @property
    def bob_bit(self) -> Optional[int]:
        if self.disposition is not Disposition.KEPT:
            return None
        return 0 if self.click1 else 1


@dataclass(frozen=True)
class SessionRecord:
    pulses_sent: int
    raw_clicks: int
    double_clicks: int
    sifted_bits: int
    errors: int
    measured_qber: Optional[float]
    raw_rate_per_s: float
    net_rate_per_s: float

    @property
    def kept(self) -> int:
        return self.raw_clicks - self.double_clicks

    @property
    def no_clicks(self) -> int:
        return self.pulses_sent - self.raw_clicks


def encode_phase(bit: int, basis: int) -> float:
    """Alice's modulator phase for ``(bit, basis)``: one of 0, pi/2, pi, 3pi/2."""
    return bit * math.pi + basis * (math.pi / 2.0)


def _link(config):
    mean_at_bob = config.mean_photon_number * fiber_transmittance(config.fiber)
    floors = (noise_floor_per_detector(config, 1), noise_floor_per_detector(config, 2))
    return mean_at_bob, floors


def simulate_pulse(config: SystemConfig, alice_bit: int, alice_basis: int, bob_basis: int,
                   rng: np.random.Generator, pulse_index: int = 0) -> PulseOutcome:
    """Follow one pulse photon by photon. Reference path for the vectorised engine."""
    mean_at_bob, floors = _link(config)
    n = sample_photon_number(mean_at_bob, rng)
    p1, _ = interference_probabilities(encode_phase(alice_bit, alice_basis),
                                       bob_basis * math.pi / 2.0, config.interferometer)
    n1 = int(rng.binomial(n, p1)) if n else 0
    clicks = []
    for n_i, detector, floor in zip((n1, n - n1), (config.detector1, config.detector2), floors):
        signal = n_i > 0 and rng.binomial(n_i, detector.quantum_efficiency) > 0
        noise = rng.random() < floor
        clicks.append(bool(signal or noise))
    return PulseOutcome(pulse_index, alice_bit, alice_basis, bob_basis, clicks[0], clicks[1])


def block_rng(seed: int, block_index: int) -> np.random.Generator:
    """Independent Philox stream for one block of pulses."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block_index]))


def _simulate_block(mean_at_bob, floors, config, size, rng):
    bits = rng.integers(0, 2, size=(3, size), dtype=np.int8)
    alice_bit, alice_basis, bob_basis = bits
    delta = alice_bit * math.pi + alice_basis * (math.pi / 2.0) - bob_basis * (math.pi / 2.0)
    p1, _ = interference_probabilities(delta, 0.0, config.interferometer)
    n = rng.poisson(mean_at_bob, size=size)
    n1 = rng.binomial(n, p1)
    n2 = n - n1
    u = rng.random((4, size))
    eta1 = config.detector1.quantum_efficiency
    eta2 = config.detector2.quantum_efficiency
    # P(at least one of k photons detected) = 1 - (1-eta)^k
    click1 = (u[0] < -np.expm1(n1 * np.log1p(-eta1)) if eta1 < 1 else n1 > 0) | (u[2] < floors[0])
    click2 = (u[1] < -np.expm1(n2 * np.log1p(-eta2)) if eta2 < 1 else n2 > 0) | (u[3] < floors[1])
    return alice_bit, alice_basis, bob_basis, click1, click2


def _block_sizes(n_pulses):
    full, rest = divmod(n_pulses, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _check_n(n_pulses):
    if isinstance(n_pulses, bool) or not isinstance(n_pulses, (int, np.integer)) or n_pulses < 1:
        raise ParameterError(f"n_pulses must be a positive integer, got {n_pulses!r}")


@dataclass
class OutcomeArrays:
    """Per-pulse outcomes of a run as parallel numpy arrays."""

    alice_bit: np.ndarray
    alice_basis: np.ndarray
    bob_basis: np.ndarray
    click1: np.ndarray
    click2: np.ndarray

    def __len__(self):
        return len(self.alice_bit)

    def to_outcomes(self) -> list[PulseOutcome]:
        return [PulseOutcome(i, int(a), int(b), int(c), bool(d), bool(e))
                for i, (a, b, c, d, e) in enumerate(zip(self.alice_bit, self.alice_basis,
                                                       self.bob_basis, self.click1, self.click2))]


def simulate_outcomes(config: SystemConfig, n_pulses: int, seed: Optional[int] = None) -> OutcomeArrays:
    """All per-pulse outcomes of a session, in pulse order."""
    _check_n(n_pulses)
    seed = config.seed if seed is None else seed
    mean_at_bob, floors = _link(config)
    parts = [_simulate_block(mean_at_bob, floors, config, size, block_rng(seed, k))
             for k, size in enumerate(_block_sizes(n_pulses))]
    return OutcomeArrays(*(np.concatenate(col) for col in zip(*parts)))


def _tally(alice_bit, alice_basis, bob_basis, click1, click2):
    any_click = click1 | click2
    double = click1 & click2
    sifted = (click1 ^ click2) & (alice_basis == bob_basis)
    # bob's bit is 1 exactly when detector 2 fired alone
    errors = sifted & (click2.astype(np.int8) != alice_bit)
    return np.array([int(any_click.sum()), int(double.sum()), int(sifted.sum()), int(errors.sum())],
                    dtype=np.int64)


def _run_block(args):
    mean_at_bob, floors, config, seed, k, size = args
    return _tally(*_simulate_block(mean_at_bob, floors, config, size, block_rng(seed, k)))


def run_session(config: SystemConfig, n_pulses: int, seed: Optional[int] = None,
                workers: int = 1) -> SessionRecord:
    """Simulate ``n_pulses`` BB84 rounds, sift, and count errors.

    ``seed`` defaults to ``config.seed``. ``workers > 1`` spreads blocks over a
    thread pool; the record is bit-identical to the serial one.
    """
    _check_n(n_pulses)
    seed = config.seed if seed is None else seed
    mean_at_bob, floors = _link(config)
    jobs = [(mean_at_bob, floors, config, seed, k, size)
            for k, size in enumerate(_block_sizes(n_pulses))]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            totals = sum(pool.map(_run_block, jobs))
    else:
        totals = sum(map(_run_block, jobs))
    raw, double, sifted, errors = (int(x) for x in totals)
    return SessionRecord(
        pulses_sent=int(n_pulses),
        raw_clicks=raw,
        double_clicks=double,
        sifted_bits=sifted,
        errors=errors,
        measured_qber=errors / sifted if sifted else None,
        raw_rate_per_s=raw / n_pulses * config.rep_rate_hz,
        net_rate_per_s=sifted / n_pulses * config.rep_rate_hz,
    )


def sift(outcomes: Iterable[PulseOutcome]) -> tuple[list[tuple[int, int]], Optional[float]]:
    """Keep single-click outcomes with matching bases.

    Returns ``(pairs, qber)`` where ``pairs`` holds ``(alice_bit, bob_bit)``
    and ``qber`` is None when nothing survives sifting.
    """
    pairs = [(o.alice_bit, o.bob_bit) for o in outcomes
             if o.disposition is Disposition.KEPT and o.alice_basis == o.bob_basis]
    if not pairs:
        return pairs, None
    return pairs, sum(a != b for a, b in pairs) / len(pairs)
