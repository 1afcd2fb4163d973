import logging
from dataclasses import dataclass, replace
from typing import Optional

from nethil.config.constants import MessageType, robot_endpoint
from nethil.coord.envelope import CriticalSection, Envelope, RobotSpec, find_critical_sections
from nethil.coord.fleet import UNRESTRICTED, RobotState
from nethil.coord.kinematics import braking_distance, time_to_reach
from nethil.coord.missions import Mission, MissionGenerator, MissionRegistry
from nethil.netchan.wire import CriticalPoint, RobotStatus, WireMessage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoordinationPolicy:
    safety_margin: int = 1  # envelope samples kept clear before a CS
    revocable: bool = False
    deadlock_recovery: bool = True


@dataclass(frozen=True)
class ReportedState:
    """What the coordinator believes about a robot, from its latest status."""

    robot_id: int
    mission_id: int
    path_index: int
    s: float
    v: float


@dataclass
class CsRecord:
    cs: CriticalSection
    missions: tuple[int, int]  # mission ids of robot_a, robot_b
    holder: Optional[int] = None
    released: bool = False

    @property
    def cs_id(self) -> int:
        return self.cs.cs_id

    def involves(self, robot_id: int) -> bool:
        return robot_id in (self.cs.robot_a, self.cs.robot_b)


@dataclass(frozen=True)
class FleetView:
    """Per-robot geometry and limits the ordering policy needs."""

    specs: dict[int, RobotSpec]
    envelopes: dict[int, Envelope]

    def stop_s(self, robot_id: int, entry: int, margin: int) -> float:
        return float(self.envelopes[robot_id].s[max(0, entry - margin)])

    def can_stop_before(self, st: ReportedState, entry: int, margin: int) -> bool:
        spec = self.specs[st.robot_id]
        return st.s + braking_distance(st.v, spec.a_max) <= self.stop_s(st.robot_id, entry, margin) + 1e-9

    def can_yield(self, st: ReportedState, entry: int, margin: int) -> bool:
        """Short of the section and still able to stop at its stop point."""
        return st.path_index < entry and self.can_stop_before(st, entry, margin)

    def eta(self, st: ReportedState, entry: int) -> float:
        spec = self.specs[st.robot_id]
        target = float(self.envelopes[st.robot_id].s[entry])
        return time_to_reach(target - st.s, st.v, spec.v_max, spec.a_max)


def can_order(cs: CriticalSection, reported: dict[int, ReportedState], fleet: FleetView, margin: int) -> bool:
    """At least one of the two robots can still be made to wait."""
    return any(fleet.can_yield(reported[r], cs.range_of(r)[0], margin) for r in (cs.robot_a, cs.robot_b))


def _grant(rec: CsRecord, reported: dict[int, ReportedState], fleet: FleetView, policy: CoordinationPolicy) -> int:
    """
    A robot that cannot yield (inside the section, or unable to stop short of
    it) goes first. Otherwise earliest ETA first, ties to the lower id.
    """
    a, b = rec.cs.robot_a, rec.cs.robot_b
    entry = {a: rec.cs.a_range[0], b: rec.cs.b_range[0]}
    can_wait = {r: fleet.can_yield(reported[r], entry[r], policy.safety_margin) for r in (a, b)}

    if can_wait[a] != can_wait[b]:
        return b if can_wait[a] else a
    if not can_wait[a]:
        # neither can stop: the one further in keeps going
        logger.debug(f"CS {rec.cs_id}: neither robot{a} nor robot{b} can yield")
        return max((a, b), key=lambda r: (reported[r].path_index - entry[r], -r))

    eta_a = fleet.eta(reported[a], entry[a])
    eta_b = fleet.eta(reported[b], entry[b])
    return a if (eta_a, a) <= (eta_b, b) else b


def coordinator_update(
    reported_states: dict[int, ReportedState],
    critical_sections: list[CsRecord],
    policy: CoordinationPolicy,
    fleet: FleetView,
) -> list[tuple[int, int]]:
    """
    One ordering pass. Grants precedence on undecided CSs, releases CSs the
    holder has left, and returns (robot_id, critical_index) for every robot,
    -1 meaning unrestricted. Records are updated in place.
    """
    restriction: dict[int, int] = {rid: UNRESTRICTED for rid in reported_states}

    for rec in critical_sections:
        if rec.released:
            continue
        cs = rec.cs
        if rec.holder is not None:
            holder_exit = cs.range_of(rec.holder)[1]
            if reported_states[rec.holder].path_index > holder_exit:
                rec.released = True
                continue

        undecided = rec.holder is None
        if not undecided and policy.revocable:
            undecided = all(
                reported_states[r].path_index < cs.range_of(r)[0] for r in (cs.robot_a, cs.robot_b)
            )
        if undecided:
            rec.holder = _grant(rec, reported_states, fleet, policy)

        yielder = cs.other(rec.holder)
        critical = max(0, cs.range_of(yielder)[0] - policy.safety_margin)
        current = restriction[yielder]
        restriction[yielder] = critical if current == UNRESTRICTED else min(current, critical)

    return sorted(restriction.items())


def _restriction_without(robot_id: int, skip: CsRecord, records: list[CsRecord], margin: int) -> int:
    crit = UNRESTRICTED
    for rec in records:
        if rec is skip or rec.released or rec.holder is None or rec.holder == robot_id or not rec.involves(robot_id):
            continue
        stop = max(0, rec.cs.range_of(robot_id)[0] - margin)
        crit = stop if crit == UNRESTRICTED else min(crit, stop)
    return crit


def find_deadlock(
    reported_states: dict[int, ReportedState],
    critical_sections: list[CsRecord],
    restrictions: dict[int, int],
    fleet: FleetView,
) -> Optional[list[CsRecord]]:
    """
    Wait-for edges (yielder -> holder, both at rest, yielder at its stop
    point) that lie on a cycle. Every edge is searched, so a robot waiting on
    several holders is handled. Returns the records on any cycle, by cs_id.
    """
    def blocked(rid: int) -> bool:
        st = reported_states[rid]
        crit = restrictions.get(rid, UNRESTRICTED)
        if st.v != 0.0 or crit == UNRESTRICTED:
            return False
        env = fleet.envelopes[rid]
        return st.path_index >= crit or float(env.s[crit]) - st.s <= 1e-6

    edges: list[CsRecord] = []
    holders: dict[int, set[int]] = {}
    for rec in critical_sections:
        if rec.released or rec.holder is None:
            continue
        yielder = rec.cs.other(rec.holder)
        if blocked(yielder) and reported_states[rec.holder].v == 0.0:
            edges.append(rec)
            holders.setdefault(yielder, set()).add(rec.holder)

    def reaches(src: int, dst: int) -> bool:
        stack, seen = [src], set()
        while stack:
            rid = stack.pop()
            if rid == dst:
                return True
            if rid in seen:
                continue
            seen.add(rid)
            stack.extend(holders.get(rid, ()))
        return False

    on_cycle = [rec for rec in edges if reaches(rec.holder, rec.cs.other(rec.holder))]
    return sorted(on_cycle, key=lambda r: r.cs_id) or None


def break_deadlock(
    cycle: list[CsRecord],
    records: list[CsRecord],
    reported: dict[int, ReportedState],
    fleet: FleetView,
    margin: int,
) -> Optional[CsRecord]:
    """
    Hand one CS on the cycle to its waiting robot. The holder must be able to
    yield it, and the waiting robot must have nothing else holding it at its
    current index. Returns the record handed over, or None.
    """
    for rec in cycle:
        holder = rec.holder
        waiting = rec.cs.other(holder)
        if not fleet.can_yield(reported[holder], rec.cs.range_of(holder)[0], margin):
            continue
        still = _restriction_without(waiting, rec, records, margin)
        if still != UNRESTRICTED and still <= reported[waiting].path_index:
            continue
        rec.holder = waiting
        return rec
    return None


class Coordinator:
    """
    Central coordinator: hands out missions, keeps the CS book and sends a
    CRITICAL_POINT to every robot each control period.
    """

    def __init__(
        self,
        registry: MissionRegistry,
        generator: MissionGenerator,
        policy: CoordinationPolicy,
        initial: dict[int, Mission],
        initial_states: dict[int, RobotState],
    ):
        self.registry = registry
        self.generator = generator
        self.policy = policy
        self.specs = {spec.robot_id: spec for spec in registry.specs}
        self.assigned: dict[int, Mission] = dict(initial)
        self.reports: dict[int, tuple[int, RobotStatus]] = {
            rid: (-1, RobotStatus(st.mission_id, st.path_index, st.x, st.y, st.theta, st.v))
            for rid, st in initial_states.items()
        }
        self.records: list[CsRecord] = []
        self.cs_total = 0
        self.last_cs_ns = 0
        self.missions_completed = 0
        self.missions_deferred = 0
        self.deadlocks_resolved = 0
        self.stale_reports = 0
        self._next_cs_id = 0
        self._cp_seq = {rid: 0 for rid in self.assigned}
        self.restrictions: dict[int, int] = {rid: UNRESTRICTED for rid in self.assigned}

    # ── status intake ──────────────────────────────────────────────────────

    def receive_status(self, msg: WireMessage) -> bool:
        last_seq, _ = self.reports[msg.robot_id]
        if msg.seq <= last_seq:
            self.stale_reports += 1
            return False
        self.reports[msg.robot_id] = (msg.seq, msg.payload)
        return True

    def reported_state(self, robot_id: int) -> ReportedState:
        _, st = self.reports[robot_id]
        mission = self.assigned[robot_id]
        if st.mission_id != mission.mission_id:
            # still finishing the previous mission, which ends where this one starts
            return ReportedState(robot_id, mission.mission_id, 0, 0.0, 0.0)
        env = mission.envelope
        idx = min(max(st.path_index, 0), len(env) - 1)
        s = mission.path.project(st.x, st.y, near_s=float(env.s[idx]), window=2.0 * self.registry.ds)
        return ReportedState(robot_id, mission.mission_id, idx, s, st.v)

    # ── missions ───────────────────────────────────────────────────────────

    def _completed(self, robot_id: int) -> bool:
        _, st = self.reports[robot_id]
        mission = self.assigned[robot_id]
        return (
            st.mission_id == mission.mission_id
            and st.v == 0.0
            and st.path_index >= len(mission.envelope) - 1
        )

    def _sections_for(self, robot_id: int, draft: Mission) -> Optional[list[CriticalSection]]:
        """CSs a mission would create, or None when one of them could not be ordered safely."""
        reported = {robot_id: ReportedState(robot_id, draft.mission_id, 0, 0.0, 0.0)}
        envelopes = {robot_id: draft.envelope}
        sections = []
        for other, other_mission in sorted(self.assigned.items()):
            if other == robot_id:
                continue
            reported[other] = self.reported_state(other)
            envelopes[other] = other_mission.envelope
            sections += find_critical_sections(
                draft.envelope, other_mission.envelope,
                a_start=0, b_start=max(0, reported[other].path_index - 1),
                robot_a=robot_id, robot_b=other,
            )
        fleet = FleetView(self.specs, envelopes)
        if all(can_order(cs, reported, fleet, self.policy.safety_margin) for cs in sections):
            return sections
        return None

    def _assign(self, robot_id: int, now_ns: int) -> None:
        current = self.assigned[robot_id]
        taken = {m.goal for rid, m in self.assigned.items() if rid != robot_id}
        for goal in self.generator.goal_order(current.goal, taken):
            draft = self.registry.draft(robot_id, current.goal, goal)
            sections = self._sections_for(robot_id, draft)
            if sections is not None:
                break
        else:
            # every route would start inside a CS the other robot can no longer stop short of
            self.missions_deferred += 1
            logger.debug(f"robot{robot_id}: no safe mission from {current.goal} yet")
            return

        if current.mission_id != 0:
            self.missions_completed += 1
        mission = self.registry.register(draft, self.generator.next_id())
        self.registry.forget(robot_id, current.mission_id)
        self.assigned[robot_id] = mission
        self.records = [rec for rec in self.records if not rec.involves(robot_id)]

        for cs in sections:
            cs = replace(cs, cs_id=self._next_cs_id)
            self._next_cs_id += 1
            other_mission = self.assigned[cs.robot_b]
            self.records.append(CsRecord(cs, (mission.mission_id, other_mission.mission_id)))

        if sections:
            self.cs_total += len(sections)
            self.last_cs_ns = now_ns
        logger.debug(
            f"robot{robot_id}: mission {mission.mission_id} {mission.start} -> {mission.goal} "
            f"({mission.length:.1f} m, {len(sections)} new CS)"
        )

    # ── control cycle ──────────────────────────────────────────────────────

    def fleet_view(self) -> FleetView:
        return FleetView(self.specs, {rid: m.envelope for rid, m in self.assigned.items()})

    def update(self, now_ns: int) -> list[WireMessage]:
        for rid in sorted(self.assigned):
            if self._completed(rid):
                self._assign(rid, now_ns)

        reported = {rid: self.reported_state(rid) for rid in self.assigned}
        fleet = self.fleet_view()
        restrictions = dict(coordinator_update(reported, self.records, self.policy, fleet))

        if self.policy.deadlock_recovery:
            cycle = find_deadlock(reported, self.records, restrictions, fleet)
            if cycle is not None and self._break_cycle(cycle, reported, fleet):
                restrictions = dict(coordinator_update(reported, self.records, self.policy, fleet))

        self.restrictions = restrictions
        messages = []
        for rid in sorted(self.assigned):
            self._cp_seq[rid] += 1
            messages.append(WireMessage(
                msg_type=MessageType.CRITICAL_POINT,
                robot_id=rid,
                seq=self._cp_seq[rid],
                send_time_ns=now_ns,
                payload=CriticalPoint(self.assigned[rid].mission_id, restrictions[rid]),
            ))
        return messages

    def _break_cycle(self, cycle: list[CsRecord], reported: dict[int, ReportedState], fleet: FleetView) -> bool:
        rec = break_deadlock(cycle, self.records, reported, fleet, self.policy.safety_margin)
        if rec is None:
            return False
        self.deadlocks_resolved += 1
        robots = sorted({r.cs.robot_a for r in cycle} | {r.cs.robot_b for r in cycle})
        logger.info(f"Deadlock among robots {robots}: CS {rec.cs_id} handed to robot{rec.holder}")
        return True

    @staticmethod
    def destination(robot_id: int) -> str:
        return robot_endpoint(robot_id)
