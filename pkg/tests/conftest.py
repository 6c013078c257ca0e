import numpy as np
import pytest

from kmband import Observation


def obs(pairs):
    """Build observations from (time, event) pairs."""
    return [Observation(t, bool(e)) for t, e in pairs]


def random_censored_dataset(rng, n_lo=3, n_hi=50, max_censor_frac=0.8):
    """Continuous times (a.s. tie-free), censoring fraction in [0, max]."""
    n = int(rng.integers(n_lo, n_hi + 1))
    frac = rng.uniform(0.0, max_censor_frac)
    times = rng.exponential(2.0, n)
    events = rng.random(n) >= frac
    return [Observation(t, bool(e)) for t, e in zip(times, events)]


@pytest.fixture
def five_point():
    """Alternating event/censor dataset used throughout the suite."""
    return obs([(1, 1), (2, 0), (3, 1), (4, 0), (5, 1)])
