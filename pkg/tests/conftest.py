from __future__ import annotations

import pytest

from grid_planning.network import GridNetwork, grid_from_dict
from grid_planning.network.synth import SyntheticCase, synthesize_case

from tests.grids import feeder_dict


@pytest.fixture(scope="session")
def synthetic_case() -> SyntheticCase:
    return synthesize_case(n_buses=106, n_feeders=4, seed=0, days=7)


@pytest.fixture
def leaf_pv_grid() -> GridNetwork:
    """Busbar plus one 4-segment NAYY 4x50 feeder (buses 2..5)."""
    return grid_from_dict(feeder_dict([4]))
