import pytest

from nethil.coord.scenario import Scenario
from nethil.netchan.profile import ChannelProfile


@pytest.fixture
def ideal_profile() -> ChannelProfile:
    return ChannelProfile(name="ideal")


@pytest.fixture
def lossy_profile() -> ChannelProfile:
    return ChannelProfile.static(plr=0.1, delay_ms=10)


@pytest.fixture
def cross_scenario():
    """Two warehouse robots on a plus-shaped floor, 20 m arms."""
    return Scenario.model_validate({
        "name": "cross",
        "preset": "warehouse",
        "fleet_size": 2,
        "bounds": {"x_min": -12, "y_min": -12, "x_max": 12, "y_max": 12},
        "locations": [
            {"name": "w", "x": -10, "y": 0, "heading_deg": 0},
            {"name": "e", "x": 10, "y": 0, "heading_deg": 180},
            {"name": "s", "x": 0, "y": -10, "heading_deg": 90},
            {"name": "n", "x": 0, "y": 10, "heading_deg": 270},
        ],
    })
