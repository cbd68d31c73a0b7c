"""Shared fixtures: small windows and seeded reference patterns.

Monte Carlo checks in this suite use fixed seeds throughout; tolerances
are stated next to each assertion in units of the relevant standard
error so a genuine regression, not sampling noise, is what trips them.
"""

import numpy as np
import pytest

import zonalspec as zs


@pytest.fixture(scope="session")
def unit70():
    """The default 70 x 70 observation window."""
    return zs.Window.square(70.0)


@pytest.fixture(scope="session")
def window30():
    """A smaller window that keeps per-test simulation cheap."""
    return zs.Window.square(30.0)


@pytest.fixture(scope="session")
def poisson70(unit70):
    """One seeded homogeneous Poisson pattern, about a thousand points."""
    return zs.sim_poisson(0.204, unit70, seed=1234)


@pytest.fixture(scope="session")
def poisson30(window30):
    """A denser seeded Poisson pattern on the small window."""
    return zs.sim_poisson(1.0, window30, seed=99)
