import numpy as np
import pytest

from pnpqkd import SystemConfig


@pytest.fixture
def defaults():
    return SystemConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def make_noiseless(config, visibility=1.0):
    """Stray light off, zero dark counts, given intrinsic visibility."""
    from dataclasses import replace

    from pnpqkd import DetectorSpec, InterferometerSpec

    silent = DetectorSpec(dark_count_prob_per_gate=0.0)
    return replace(config.without_stray(), detector1=silent, detector2=silent,
                   interferometer=InterferometerSpec(visibility))


@pytest.fixture
def noiseless(defaults):
    return make_noiseless(defaults)
