from nethil.coord.collisions import CollisionDetector, detect_collisions
from nethil.coord.coordinator import CsRecord
from nethil.coord.envelope import CriticalSection, RobotSpec
from nethil.coord.fleet import RobotState

SPECS = [RobotSpec(0, 2.0, 0.5, 2.0, 1.0), RobotSpec(1, 2.0, 0.5, 2.0, 1.0), RobotSpec(2, 2.0, 0.5, 2.0, 1.0)]


def _state(rid, x, y, theta=0.0, mission=1, index=0):
    return RobotState(rid, mission, 0.0, 0.0, x, y, theta, index)


def _fleet(x1, mission1=1, index=0):
    return {
        0: _state(0, 0.0, 0.0, index=index),
        1: _state(1, x1, 0.0, mission=mission1, index=index),
        2: _state(2, 50.0, 50.0),
    }


def test_one_event_per_contact_episode():
    detector = CollisionDetector(SPECS)
    assert detect_collisions(detector, 0, _fleet(1.5), []) != []
    assert detect_collisions(detector, 10, _fleet(1.0), []) == []
    assert detector.count == 1
    (event,) = detector.events
    assert event.pair == (0, 1)
    assert event.pair_label == "0-1"
    assert event.cs_id == -1


def test_separated_robots_never_collide():
    detector = CollisionDetector(SPECS)
    detector.check(0, _fleet(2.5), [])
    assert detector.count == 0


def test_touching_again_in_the_same_engagement_is_not_recounted():
    detector = CollisionDetector(SPECS)
    detector.check(0, _fleet(1.5), [])
    detector.check(10, _fleet(5.0), [])
    detector.check(20, _fleet(1.5), [])
    assert detector.count == 1
    # a new mission is a new engagement
    detector.check(30, _fleet(5.0), [])
    detector.check(40, _fleet(1.5, mission1=2), [])
    assert detector.count == 2


def test_contact_inside_a_critical_section_is_attributed_to_it():
    rec = CsRecord(CriticalSection(0, 1, (3, 6), (3, 6), cs_id=42), (1, 1))
    detector = CollisionDetector(SPECS)
    (event,) = detector.check(0, _fleet(1.5, index=4), [rec])
    assert event.cs_id == 42


def test_stale_mission_section_is_not_used():
    rec = CsRecord(CriticalSection(0, 1, (3, 6), (3, 6), cs_id=42), (1, 9))
    detector = CollisionDetector(SPECS)
    (event,) = detector.check(0, _fleet(1.5, index=4), [rec])
    assert event.cs_id == -1
