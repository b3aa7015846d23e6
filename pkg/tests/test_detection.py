import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pnpqkd import (
    ClickCause,
    ClickResult,
    DetectorMode,
    DetectorSpec,
    ParameterError,
    StateError,
    click_probability,
    conventional_equivalent,
    sample_click,
    snr_db,
)

small = st.floats(0.0, 1e-3)


def test_defaults_are_balanced_experiment():
    spec = DetectorSpec()
    assert (spec.quantum_efficiency, spec.dark_count_prob_per_gate, spec.gate_width_ns) == (0.10, 2e-7, 0.75)
    assert spec.mode is DetectorMode.BALANCED and spec.afterpulse_prob == 0


@pytest.mark.parametrize("kwargs", [
    {"quantum_efficiency": 1.5},
    {"dark_count_prob_per_gate": -1e-7},
    {"gate_width_ns": 0.0},
    {"mode": "avalanche"},
])
def test_spec_validation(kwargs):
    with pytest.raises(ParameterError):
        DetectorSpec(**kwargs)


def test_click_probability_examples():
    assert click_probability(0.0, 0.0, DetectorSpec()) == pytest.approx(2e-7, rel=1e-12)
    assert click_probability(0.0, 0.0, DetectorSpec(dark_count_prob_per_gate=0.0)) == 0.0
    # eta*mu = 3.16e-5; frozen from inclusion-exclusion over the three sources
    assert click_probability(3.16e-4, 0.0, DetectorSpec()) == pytest.approx(3.179949440538769e-05, rel=1e-9)


@given(small, small, small)
def test_small_signal_expansion(mu_eta, dark, noise):
    spec = DetectorSpec(quantum_efficiency=1.0, dark_count_prob_per_gate=dark)
    exact = click_probability(mu_eta, noise, spec)
    # second-order remainder: three pairwise products plus (eta*mu)^2/2
    assert abs(exact - (mu_eta + dark + noise)) <= 3.5 * max(mu_eta, dark, noise) ** 2 + 1e-15


@given(small, small, small, st.floats(0, 1e-3))
def test_monotone(mu, dark, noise, bump):
    spec = DetectorSpec(dark_count_prob_per_gate=dark)
    base = click_probability(mu, noise, spec)
    assert click_probability(mu + bump, noise, spec) >= base
    assert click_probability(mu, min(noise + bump, 1), spec) >= base
    assert click_probability(mu, noise, DetectorSpec(dark_count_prob_per_gate=dark + bump)) >= base


class TestSampling:
    def test_silent_detector(self, rng):
        spec = DetectorSpec(dark_count_prob_per_gate=0.0)
        assert not any(sample_click(0.0, 0.0, spec, rng).clicked for _ in range(10_000))

    def test_dark_clicks_in_1e7_gates(self, rng):
        # vectorised equivalent of 10^7 sample_click calls at mu=noise=0
        p = click_probability(0.0, 0.0, DetectorSpec())
        clicks = int((rng.random(10_000_000) < p).sum())
        assert 0 <= clicks <= 7  # mean 2, +3 sigma of Poisson(2) rounded up

    def test_click_rate_matches_probability(self, rng):
        spec = DetectorSpec(dark_count_prob_per_gate=0.01)
        p = click_probability(0.5, 0.02, spec)
        n = 200_000
        rate = sum(sample_click(0.5, 0.02, spec, rng).clicked for _ in range(n)) / n
        assert abs(rate - p) < 4 * math.sqrt(p * (1 - p) / n)

    def test_cause_mix(self, rng):
        spec = DetectorSpec(quantum_efficiency=1.0, dark_count_prob_per_gate=0.2)
        mu, noise = -math.log(1 - 0.5), 0.3  # signal prob 0.5
        weights = np.array([0.5, 0.2, 0.3]) / 1.0
        counts = Counter()
        while sum(counts.values()) < 100_000:
            r = sample_click(mu, noise, spec, rng)
            if r.clicked:
                counts[r.cause] += 1
        n = sum(counts.values())
        for cause, w in zip(ClickCause, weights):
            assert abs(counts[cause] / n - w) < 3 * math.sqrt(w * (1 - w) / n) + 1e-3

    def test_click_result_invariant(self):
        with pytest.raises(ParameterError):
            ClickResult(True, None)
        with pytest.raises(ParameterError):
            ClickResult(False, ClickCause.DARK)


def test_snr_examples():
    assert snr_db(0.1, 2e-7) == pytest.approx(56.9897, abs=1e-4)
    assert snr_db(3e-5, 3e-5) == 0.0
    assert snr_db(0.1, 2e-7 + 1.2e-6) == pytest.approx(48.5387, abs=1e-4)
    with pytest.raises(ParameterError):
        snr_db(0.0, 1e-7)
    with pytest.raises(ParameterError):
        snr_db(0.1, -1e-7)


@given(st.floats(1e-12, 1.0), st.floats(1e-12, 1.0), st.floats(1e-6, 1e6))
def test_snr_scale_invariant(s, n, a):
    assert snr_db(a * s, a * n) == pytest.approx(snr_db(s, n), abs=1e-9)


def test_conventional_equivalent():
    balanced = DetectorSpec()
    conv = conventional_equivalent(balanced)
    assert conv.mode is DetectorMode.CONVENTIONAL
    assert conv.dark_count_prob_per_gate == pytest.approx(1.0023744672e-5, rel=1e-9)
    assert conv.quantum_efficiency == 0.10
    assert snr_db(0.1, conv.dark_count_prob_per_gate) == pytest.approx(snr_db(0.1, 2e-7) - 17.0)
    with pytest.raises(StateError):
        conventional_equivalent(conv)
