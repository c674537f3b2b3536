"""Session-wide fixtures: the shared benchmark cache and one tracked run."""

import pytest

from mcflab import SphereFlow, StepParams, evolve, make_grid
from mcflab.acceptance import Lab


@pytest.fixture(scope="session")
def lab():
    """One benchmark cache for the whole session; runs build on first use."""
    return Lab()


@pytest.fixture(scope="session")
def disc_arrival():
    """Unit-disc run to extinction at h = 1/128 with a per-step arrival tape."""
    h = 1.0 / 128
    origin, shape = make_grid((0.0, 0.0), 1.25, h)
    field = SphereFlow(1.0, 2).level_set(0.0, origin, h, shape)
    return evolve(field, StepParams(cfl=0.8, t_end=0.6, reinit_period=25),
                  [0.25], track_arrival=True)
