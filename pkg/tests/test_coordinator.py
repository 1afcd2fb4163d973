import math

import numpy as np
import pytest

from nethil.config.constants import MessageType
from nethil.coord.coordinator import (
    CoordinationPolicy,
    Coordinator,
    CsRecord,
    FleetView,
    ReportedState,
    break_deadlock,
    coordinator_update,
    find_deadlock,
)
from nethil.coord.envelope import CriticalSection, RobotSpec, find_critical_sections, sweep_envelope
from nethil.coord.fleet import UNRESTRICTED, RobotAgent
from nethil.coord.missions import MissionGenerator, MissionRegistry
from nethil.coord.path import arc_length_parameterize
from nethil.coord.scenario import Scenario
from nethil.netchan.wire import RobotStatus, WireMessage

SPECS = {0: RobotSpec(0, 2.0, 0.5, 2.0, 1.0), 1: RobotSpec(1, 2.0, 0.5, 2.0, 1.0)}
MARGIN = 2


def _crossing():
    env_a = sweep_envelope(arc_length_parameterize([(-10, 0), (10, 0)]), SPECS[0], 0.5)
    env_b = sweep_envelope(arc_length_parameterize([(0, -10), (0, 10)]), SPECS[1], 0.5)
    (cs,) = find_critical_sections(env_a, env_b, robot_a=0, robot_b=1)
    fleet = FleetView(SPECS, {0: env_a, 1: env_b})
    return CsRecord(cs, (1, 1)), fleet


def _states(s0, v0, s1, v1):
    def rep(rid, s, v):
        return ReportedState(rid, 1, int(s / 0.5), s, v)
    return {0: rep(0, s0, v0), 1: rep(1, s1, v1)}


def test_earliest_arrival_goes_first():
    rec, fleet = _crossing()
    # robot 0 needs 5.5 s to the entry at s=9, robot 1 only 2 s
    out = coordinator_update(_states(0.0, 0.0, 5.0, 2.0), [rec], CoordinationPolicy(MARGIN), fleet)
    assert out == [(0, 18 - MARGIN), (1, UNRESTRICTED)]
    assert rec.holder == 1


def test_equal_arrival_goes_to_lower_id():
    rec, fleet = _crossing()
    out = coordinator_update(_states(2.0, 0.0, 2.0, 0.0), [rec], CoordinationPolicy(MARGIN), fleet)
    assert out == [(0, UNRESTRICTED), (1, 18 - MARGIN)]


def test_robot_that_cannot_stop_keeps_precedence():
    rec, fleet = _crossing()
    # robot 1 arrives sooner, but robot 0 is too fast to stop before s=8
    out = coordinator_update(_states(6.5, 2.0, 7.2, 1.0), [rec], CoordinationPolicy(MARGIN), fleet)
    assert rec.holder == 0
    assert out == [(0, UNRESTRICTED), (1, 18 - MARGIN)]


def test_precedence_is_sticky_until_release():
    rec, fleet = _crossing()
    policy = CoordinationPolicy(MARGIN)
    coordinator_update(_states(0.0, 0.0, 5.0, 2.0), [rec], policy, fleet)
    assert rec.holder == 1
    # robot 0 would now arrive first, but the grant stands
    out = coordinator_update(_states(8.0, 0.0, 5.0, 0.0), [rec], policy, fleet)
    assert rec.holder == 1
    assert dict(out)[0] == 18 - MARGIN

    out = coordinator_update(_states(8.0, 0.0, 11.5, 2.0), [rec], policy, fleet)
    assert rec.released
    assert out == [(0, UNRESTRICTED), (1, UNRESTRICTED)]


def test_revocable_policy_regrants_before_anyone_enters():
    rec, fleet = _crossing()
    policy = CoordinationPolicy(MARGIN, revocable=True)
    coordinator_update(_states(0.0, 0.0, 5.0, 2.0), [rec], policy, fleet)
    assert rec.holder == 1
    coordinator_update(_states(8.0, 1.0, 0.0, 0.0), [rec], policy, fleet)
    assert rec.holder == 0


def test_tightest_restriction_wins():
    rec, fleet = _crossing()
    far = CsRecord(CriticalSection(0, 1, (30, 32), (30, 32), cs_id=7), (1, 1), holder=1)
    out = coordinator_update(_states(0.0, 0.0, 5.0, 2.0), [far, rec], CoordinationPolicy(MARGIN), fleet)
    assert dict(out)[0] == 18 - MARGIN


def test_margin_never_goes_below_the_path_start():
    rec, fleet = _crossing()
    out = coordinator_update(_states(0.0, 0.0, 5.0, 2.0), [rec], CoordinationPolicy(safety_margin=50), fleet)
    assert dict(out)[0] == 0


def test_deadlock_cycle_is_found():
    rec, fleet = _crossing()
    other = CsRecord(CriticalSection(0, 1, (30, 32), (2, 4), cs_id=1), (1, 1))
    rec.holder, other.holder = 0, 1
    # both at rest exactly on their stop points
    reported = {0: ReportedState(0, 1, 16, 8.0, 0.0), 1: ReportedState(1, 1, 0, 0.0, 0.0)}
    restrictions = {0: 16, 1: 0}
    cycle = find_deadlock(reported, [rec, other], restrictions, fleet)
    assert cycle is not None
    assert {r.cs_id for r in cycle} == {rec.cs_id, other.cs_id}


def test_no_deadlock_while_the_holder_moves():
    rec, fleet = _crossing()
    other = CsRecord(CriticalSection(0, 1, (30, 32), (2, 4), cs_id=1), (1, 1))
    rec.holder, other.holder = 0, 1
    reported = {0: ReportedState(0, 1, 16, 8.0, 0.5), 1: ReportedState(1, 1, 0, 0.0, 0.0)}
    assert find_deadlock(reported, [rec, other], {0: 16, 1: 0}, fleet) is None


def _coordinator(scenario, seed=1):
    specs = scenario.robot_specs()
    registry = MissionRegistry(scenario, specs)
    generator = MissionGenerator(scenario, np.random.default_rng(seed))
    starts = generator.initial_locations(scenario.fleet_size)
    parked = {s.robot_id: registry.park(s.robot_id, starts[s.robot_id]) for s in specs}
    robots = {rid: RobotAgent(specs[rid], registry, m) for rid, m in parked.items()}
    coordinator = Coordinator(
        registry, generator, CoordinationPolicy(scenario.safety_margin_indices), parked,
        {rid: r.state for rid, r in robots.items()},
    )
    return coordinator, robots


def test_first_update_assigns_missions_and_sends_one_cp_each(cross_scenario):
    coordinator, robots = _coordinator(cross_scenario)
    messages = coordinator.update(0)
    assert [m.robot_id for m in messages] == [0, 1]
    assert all(m.msg_type == MessageType.CRITICAL_POINT for m in messages)
    assert all(m.payload.mission_id > 0 for m in messages)
    goals = {coordinator.assigned[r].goal for r in robots}
    assert len(goals) == 2
    assert all(coordinator.assigned[r].start == robots[r].mission.goal for r in robots)


def test_cp_sequence_numbers_increase(cross_scenario):
    coordinator, _ = _coordinator(cross_scenario)
    first = coordinator.update(0)
    second = coordinator.update(100_000_000)
    assert [m.seq for m in second] == [m.seq + 1 for m in first]


def test_stale_status_is_dropped(cross_scenario):
    coordinator, _ = _coordinator(cross_scenario)
    status = RobotStatus(0, 0, 0.0, 0.0, 0.0, 0.0)
    assert coordinator.receive_status(WireMessage(MessageType.ROBOT_STATUS, 0, 5, 0, status))
    assert not coordinator.receive_status(WireMessage(MessageType.ROBOT_STATUS, 0, 4, 0, status))
    assert coordinator.stale_reports == 1


def test_report_for_previous_mission_counts_as_start(cross_scenario):
    coordinator, _ = _coordinator(cross_scenario)
    coordinator.update(0)
    st = coordinator.reported_state(0)
    assert (st.path_index, st.s, st.v) == (0, 0.0, 0.0)
    assert st.mission_id == coordinator.assigned[0].mission_id


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_same_seed_same_missions(cross_scenario, seed):
    a, _ = _coordinator(cross_scenario, seed)
    b, _ = _coordinator(cross_scenario, seed)
    a.update(0)
    b.update(0)
    assert {r: m.goal for r, m in a.assigned.items()} == {r: m.goal for r, m in b.assigned.items()}
    assert a.cs_total == b.cs_total


def _from_the_crossing():
    # robot 0 starts on the crossing itself: its section begins at index 0
    env_a = sweep_envelope(arc_length_parameterize([(0, 0), (10, 0)]), SPECS[0], 0.5)
    env_b = sweep_envelope(arc_length_parameterize([(0, -10), (0, 10)]), SPECS[1], 0.5)
    (cs,) = find_critical_sections(env_a, env_b, robot_a=0, robot_b=1)
    assert (cs.a_range, cs.b_range) == ((0, 2), (18, 22))
    return CsRecord(cs, (1, 1)), FleetView(SPECS, {0: env_a, 1: env_b})


def test_robot_inside_the_section_keeps_precedence():
    rec, fleet = _from_the_crossing()
    # robot 1 could still stop, robot 0 cannot leave the section by waiting
    reported = _states(0.0, 0.0, 5.0, 2.0)
    out = coordinator_update(reported, [rec], CoordinationPolicy(MARGIN), fleet)
    assert rec.holder == 0
    assert out == [(0, UNRESTRICTED), (1, 18 - MARGIN)]


def test_robot_inside_wins_even_when_the_other_cannot_stop():
    rec, fleet = _from_the_crossing()
    # robot 1 is 1 m past its braking point and robot 0 cannot get out of the way by waiting
    out = coordinator_update(_states(0.0, 0.0, 7.0, 2.0), [rec], CoordinationPolicy(MARGIN), fleet)
    assert rec.holder == 0
    assert dict(out)[0] == UNRESTRICTED


def test_can_yield_needs_the_robot_short_of_its_entry():
    _, fleet = _crossing()
    at_stop = ReportedState(0, 1, 16, 8.0, 0.0)
    inside = ReportedState(0, 1, 18, 9.0, 0.0)
    assert fleet.can_yield(at_stop, 18, MARGIN)
    assert not fleet.can_yield(inside, 18, MARGIN)
    assert not fleet.can_yield(ReportedState(0, 1, 15, 7.5, 1.2), 18, MARGIN)


def test_deadlock_search_follows_every_wait_edge():
    _, fleet = _crossing()
    fleet = FleetView({**SPECS, 2: RobotSpec(2, 2.0, 0.5, 2.0, 1.0)}, {**fleet.envelopes, 2: fleet.envelopes[1]})
    # robot 0 waits on robot 2 (listed first, not waiting on anyone) and on robot 1, which waits on robot 0
    side = CsRecord(CriticalSection(0, 2, (18, 22), (18, 22), cs_id=0), (1, 1), holder=2)
    ahead = CsRecord(CriticalSection(0, 1, (18, 22), (30, 32), cs_id=1), (1, 1), holder=1)
    back = CsRecord(CriticalSection(0, 1, (30, 32), (2, 4), cs_id=2), (1, 1), holder=0)
    reported = {
        0: ReportedState(0, 1, 16, 8.0, 0.0),
        1: ReportedState(1, 1, 0, 0.0, 0.0),
        2: ReportedState(2, 1, 0, 0.0, 0.0),
    }
    restrictions = {0: 16, 1: 0, 2: UNRESTRICTED}
    cycle = find_deadlock(reported, [side, ahead, back], restrictions, fleet)
    assert [r.cs_id for r in cycle] == [1, 2]


def _two_way_wait():
    _, fleet = _crossing()
    # each robot holds a section further along its own path and waits at s=8 for the other's
    held_by_0 = CsRecord(CriticalSection(0, 1, (30, 32), (18, 22), cs_id=0), (1, 1), holder=0)
    held_by_1 = CsRecord(CriticalSection(0, 1, (18, 22), (30, 32), cs_id=1), (1, 1), holder=1)
    reported = {0: ReportedState(0, 1, 16, 8.0, 0.0), 1: ReportedState(1, 1, 16, 8.0, 0.0)}
    return held_by_0, held_by_1, reported, fleet


def test_breaking_a_deadlock_frees_the_waiting_robot():
    held_by_0, held_by_1, reported, fleet = _two_way_wait()
    records = [held_by_0, held_by_1]
    cycle = find_deadlock(reported, records, {0: 16, 1: 16}, fleet)
    handed = break_deadlock(cycle, records, reported, fleet, MARGIN)
    assert handed is held_by_0
    assert held_by_0.holder == 1
    out = coordinator_update(reported, records, CoordinationPolicy(MARGIN), fleet)
    assert out == [(0, 16), (1, UNRESTRICTED)]


def test_handover_skips_sections_that_would_leave_the_robot_blocked():
    held_by_0, held_by_1, reported, fleet = _two_way_wait()
    # a second section robot 0 holds keeps robot 1 at the same stop point
    also_0 = CsRecord(CriticalSection(0, 1, (36, 38), (18, 22), cs_id=5), (1, 1), holder=0)
    records = [held_by_0, held_by_1, also_0]
    cycle = find_deadlock(reported, records, {0: 16, 1: 16}, fleet)
    assert [r.cs_id for r in cycle] == [0, 1, 5]
    handed = break_deadlock(cycle, records, reported, fleet, MARGIN)
    assert handed is held_by_1
    assert (held_by_0.holder, held_by_1.holder, also_0.holder) == (0, 0, 0)


def test_no_handover_when_every_holder_is_inside():
    held_by_0, held_by_1, _, fleet = _two_way_wait()
    reported = {0: ReportedState(0, 1, 31, 15.5, 0.0), 1: ReportedState(1, 1, 31, 15.5, 0.0)}
    records = [held_by_0, held_by_1]
    assert break_deadlock(records, records, reported, fleet, MARGIN) is None
    assert (held_by_0.holder, held_by_1.holder) == (0, 1)


@pytest.fixture
def hub_scenario():
    """The cross floor plus a station on the crossing itself."""
    return Scenario.model_validate({
        "name": "hub",
        "preset": "warehouse",
        "fleet_size": 2,
        "bounds": {"x_min": -12, "y_min": -12, "x_max": 12, "y_max": 12},
        "locations": [
            {"name": "w", "x": -10, "y": 0},
            {"name": "e", "x": 10, "y": 0, "heading_deg": 180},
            {"name": "s", "x": 0, "y": -10, "heading_deg": 90},
            {"name": "n", "x": 0, "y": 10, "heading_deg": 270},
            {"name": "c", "x": 0, "y": 0},
        ],
    })


def _status(seq, mission, state):
    return WireMessage(MessageType.ROBOT_STATUS, 1, seq, 0, RobotStatus(mission, state[0], 0.0, state[1], math.pi / 2, state[2]))


def test_mission_waits_while_its_start_is_in_the_way(hub_scenario):
    specs = hub_scenario.robot_specs()
    registry = MissionRegistry(hub_scenario, specs)
    generator = MissionGenerator(hub_scenario, np.random.default_rng(1))
    parked = registry.park(0, "c")
    crossing = registry.create(1, 1, "s", "n")
    robot0 = RobotAgent(specs[0], registry, parked)
    robot1 = RobotAgent(specs[1], registry, crossing)
    coordinator = Coordinator(
        registry, generator, CoordinationPolicy(MARGIN), {0: parked, 1: crossing},
        {0: robot0.state, 1: robot1.state},
    )

    # robot 1 at y=-3 doing 2 m/s cannot stop short of the crossing robot 0 sits on
    coordinator.receive_status(_status(1, 1, (14, -3.0, 2.0)))
    messages = coordinator.update(0)
    assert coordinator.assigned[0].mission_id == 0
    assert coordinator.missions_deferred == 1
    assert coordinator.cs_total == 0
    assert messages[0].payload.mission_id == 0

    # once it is through, robot 0 gets a mission
    coordinator.receive_status(_status(2, 1, (24, 2.0, 2.0)))
    coordinator.update(100_000_000)
    assert coordinator.assigned[0].mission_id > 0
    assert coordinator.missions_deferred == 1
