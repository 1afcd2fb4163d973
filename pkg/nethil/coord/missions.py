import logging
from dataclasses import dataclass, replace

import numpy as np

from nethil.coord.envelope import Envelope, RobotSpec, sweep_envelope
from nethil.coord.path import PathGeom
from nethil.coord.scenario import Scenario

logger = logging.getLogger(__name__)

PARKED_MISSION = 0
DRAFT_MISSION = -1


@dataclass(frozen=True)
class Mission:
    mission_id: int
    robot_id: int
    start: str
    goal: str
    path: PathGeom
    envelope: Envelope

    @property
    def length(self) -> float:
        return self.path.length


class MissionRegistry:
    """
    Geometry of every mission handed out so far, keyed by (robot_id, mission_id).
    Both the coordinator and the robots resolve mission ids through it.
    """

    def __init__(self, scenario: Scenario, specs: list[RobotSpec]):
        self.scenario = scenario
        self.specs = specs
        self.ds = scenario.sample_spacing
        self._missions: dict[tuple[int, int], Mission] = {}
        self._routes: dict[tuple[str, str], PathGeom] = {}
        self._envelopes: dict[tuple[int, str, str], tuple[PathGeom, Envelope]] = {}

    def get(self, robot_id: int, mission_id: int) -> Mission:
        return self._missions[(robot_id, mission_id)]

    def park(self, robot_id: int, location: str) -> Mission:
        path = self.scenario.parked(location)
        mission = Mission(
            PARKED_MISSION, robot_id, location, location, path,
            sweep_envelope(path, self.specs[robot_id], self.ds),
        )
        self._missions[(robot_id, PARKED_MISSION)] = mission
        return mission

    def draft(self, robot_id: int, start: str, goal: str) -> Mission:
        """Geometry of a prospective mission; nothing is recorded until `register`."""
        key = (robot_id, start, goal)
        if key not in self._envelopes:
            route = (start, goal)
            if route not in self._routes:
                self._routes[route] = self.scenario.route(start, goal)
            path = self._routes[route]
            self._envelopes[key] = (path, sweep_envelope(path, self.specs[robot_id], self.ds))
        path, envelope = self._envelopes[key]
        return Mission(DRAFT_MISSION, robot_id, start, goal, path, envelope)

    def register(self, draft: Mission, mission_id: int) -> Mission:
        mission = replace(draft, mission_id=mission_id)
        self._missions[(mission.robot_id, mission_id)] = mission
        return mission

    def create(self, robot_id: int, mission_id: int, start: str, goal: str) -> Mission:
        return self.register(self.draft(robot_id, start, goal), mission_id)

    def forget(self, robot_id: int, before_mission: int) -> None:
        """Drop finished missions older than `before_mission` to bound memory on long runs."""
        stale = [k for k in self._missions if k[0] == robot_id and 0 < k[1] < before_mission]
        for k in stale:
            del self._missions[k]


class MissionGenerator:
    """Seeded goal assignment: a goal is never a location another robot is heading to or parked at."""

    def __init__(self, scenario: Scenario, rng: np.random.Generator):
        self.names = [loc.name for loc in scenario.locations]
        self.rng = rng
        self._next_id = 1

    def initial_locations(self, fleet_size: int) -> list[str]:
        order = self.rng.permutation(len(self.names))
        return [self.names[i] for i in order[:fleet_size]]

    def goal_order(self, current: str, taken: set[str]) -> list[str]:
        """Free goals in a seeded random order; the first one that can be served is used."""
        free = [n for n in self.names if n != current and n not in taken]
        return [free[i] for i in self.rng.permutation(len(free))]

    def next_id(self) -> int:
        mission_id = self._next_id
        self._next_id += 1
        return mission_id
