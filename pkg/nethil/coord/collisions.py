import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from nethil.coord.coordinator import CsRecord
from nethil.coord.envelope import RobotSpec
from nethil.coord.fleet import RobotState
from nethil.coord.geometry import obb_intersect

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CollisionEvent:
    t_ns: int
    pair: tuple[int, int]
    cs_id: int  # -1 when no critical section covers the contact

    @property
    def pair_label(self) -> str:
        return f"{self.pair[0]}-{self.pair[1]}"


class CollisionDetector:
    """
    Edge-triggered footprint contact counting: one event per robot pair and
    CS engagement, however long the overlap lasts.
    """

    def __init__(self, specs: list[RobotSpec]):
        self.specs = {s.robot_id: s for s in specs}
        self._reach = {
            pair: self.specs[pair[0]].footprint(0, 0, 0).radius + self.specs[pair[1]].footprint(0, 0, 0).radius
            for pair in combinations(sorted(self.specs), 2)
        }
        self._touching: set[tuple[int, int]] = set()
        self._counted: set[tuple] = set()
        self.events: list[CollisionEvent] = []

    def check(self, t_ns: int, states: dict[int, RobotState], records: list[CsRecord]) -> list[CollisionEvent]:
        new_events = []
        for pair, reach in self._reach.items():
            a, b = states[pair[0]], states[pair[1]]
            dx, dy = b.x - a.x, b.y - a.y
            touching = dx * dx + dy * dy <= reach * reach and obb_intersect(
                self.specs[a.robot_id].footprint(a.x, a.y, a.theta),
                self.specs[b.robot_id].footprint(b.x, b.y, b.theta),
            )
            if not touching:
                self._touching.discard(pair)
                continue
            if pair in self._touching:
                continue
            self._touching.add(pair)

            rec = _covering(records, a, b)
            key = (pair, rec.cs_id) if rec else (pair, a.mission_id, b.mission_id)
            if key in self._counted:
                continue
            self._counted.add(key)
            event = CollisionEvent(t_ns, pair, rec.cs_id if rec else -1)
            new_events.append(event)
            logger.debug(f"Collision robots {event.pair_label} at t={t_ns / 1e9:.2f} s (CS {event.cs_id})")
        self.events.extend(new_events)
        return new_events

    @property
    def count(self) -> int:
        return len(self.events)


def _covering(records: list[CsRecord], a: RobotState, b: RobotState) -> Optional[CsRecord]:
    for rec in records:
        cs = rec.cs
        if {cs.robot_a, cs.robot_b} != {a.robot_id, b.robot_id}:
            continue
        missions = dict(zip((cs.robot_a, cs.robot_b), rec.missions))
        if missions[a.robot_id] != a.mission_id or missions[b.robot_id] != b.mission_id:
            continue
        lo_a, hi_a = cs.range_of(a.robot_id)
        lo_b, hi_b = cs.range_of(b.robot_id)
        if lo_a <= a.path_index <= hi_a and lo_b <= b.path_index <= hi_b:
            return rec
    return None


def detect_collisions(
    detector: CollisionDetector, t_ns: int, states: dict[int, RobotState], records: list[CsRecord]
) -> list[CollisionEvent]:
    return detector.check(t_ns, states, records)
