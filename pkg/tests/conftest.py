import math
from fractions import Fraction

import pytest

from inls.exponents import CRITICAL, CriticalityParams
from inls.grids import GridSpec, PotentialWeight
from inls.dynamics import SimConfig


@pytest.fixture
def free_2d_config():
    """Free evolution (lam = 0) on a 2-d box."""
    grid = GridSpec.tensor(2, 20.0, 128)
    params = CriticalityParams(
        n=2, s=Fraction(1, 2), b=Fraction(1, 2), sigma=Fraction(2), lambda_sign="defocusing"
    )
    return SimConfig(
        params=params,
        grid=grid,
        weight=PotentialWeight(b=0.5, delta=grid.spacing),
        lam=0.0,
        dt_init=1e-3,
        t_end=0.1,
        dt_min=1e-12,
    )


@pytest.fixture
def defocusing_2d_config():
    grid = GridSpec.tensor(2, 20.0, 128)
    params = CriticalityParams(
        n=2, s=Fraction(1, 2), b=Fraction(1, 2), sigma=Fraction(2), lambda_sign="defocusing"
    )
    return SimConfig(
        params=params,
        grid=grid,
        weight=PotentialWeight(b=0.5, delta=2 * grid.spacing),
        lam=1.0,
        dt_init=1e-3,
        t_end=0.1,
        dt_min=1e-12,
    )


@pytest.fixture
def focusing_radial_config():
    """Energy-critical focusing configuration on a radial grid (sigma1 = 3)."""
    grid = GridSpec.radial(3, 12.0, 1024)
    params = CriticalityParams(
        n=3, s=Fraction(1), b=Fraction(1, 2), sigma=CRITICAL, lambda_sign="focusing"
    )
    return SimConfig(
        params=params,
        grid=grid,
        weight=PotentialWeight(b=0.5, delta=0.0),
        lam=-1.0,
        dt_init=1e-3,
        t_end=0.5,
        dt_min=1e-12,
    )
