import json
import math

import numpy as np
import pytest

from nethil.config.constants import Activation, EgmCommand
from nethil.netchan.profile import ChannelProfile, load_profile
from nethil.teleop.egm import EgmState, egm_server_step
from nethil.teleop.kinematics import ReachabilityError, fk_2link, ik_2link
from nethil.teleop.motion import MotionProfile, TeleopConfig, generate_swing, map_motion
from nethil.teleop.servo import robot_joint_step
from nethil.teleop.simulation import run_teleop

from helpers import egm_ctrl, egm_joints

WATCHDOG_NS = 500_000_000
RECONNECT_NS = 1_000_000_000


@pytest.mark.parametrize("branch", ["up", "down"])
@pytest.mark.parametrize("target", [(0.45, 0.0), (0.45, 0.24), (-0.2, 0.3), (0.1, -0.5)])
def test_ik_lands_on_the_target(branch, target):
    q1, q2 = ik_2link(target, 0.35, 0.35, branch)
    assert fk_2link(q1, q2, 0.35, 0.35) == pytest.approx(target, abs=1e-9)
    assert (q2 >= 0) if branch == "down" else (q2 <= 0)
    assert -math.pi < q1 <= math.pi


@pytest.mark.parametrize("branch", ["up", "down"])
def test_ik_at_full_reach(branch):
    assert ik_2link((0.7, 0.0), 0.35, 0.35, branch) == (0.0, 0.0)
    q1, q2 = ik_2link((0.0, 0.7), 0.35, 0.35, branch)
    assert q2 == 0.0
    assert q1 == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("branch", ["up", "down"])
def test_ik_inverts_fk_across_the_annulus(branch):
    rng = np.random.default_rng(11)
    r = np.sqrt(rng.uniform(0.01**2, 0.7**2, 10_000))
    theta = rng.uniform(-math.pi, math.pi, 10_000)
    worst = 0.0
    for x, y in zip(r * np.cos(theta), r * np.sin(theta)):
        q1, q2 = ik_2link((float(x), float(y)), 0.35, 0.35, branch)
        fx, fy = fk_2link(q1, q2, 0.35, 0.35)
        worst = max(worst, math.hypot(fx - x, fy - y))
    assert worst <= 1e-9


@pytest.mark.parametrize("target", [(0.71, 0.0), (0.02, 0.0)])
def test_unreachable_target(target):
    with pytest.raises(ReachabilityError, match="annulus"):
        ik_2link(target, 0.35, 0.3)


def test_swing_sample_count_for_the_default_session():
    assert MotionProfile().sample_count == 448671
    assert MotionProfile().frame_period_ns == 8_000_000


def test_swing_is_centered_on_the_motion_center():
    t_ns, x, y = generate_swing(MotionProfile(loops=2))
    assert t_ns[1] == 8_000_000
    assert np.all(x == 0.45)
    assert y.max() == pytest.approx(0.3, abs=1e-4)
    assert y.min() == pytest.approx(-0.3, abs=1e-4)


def test_motion_mapping_scales_about_the_center():
    assert map_motion((1.0, 2.0), 0.5, (0.0, 1.0)) == (0.5, 1.5)


def test_joints_are_ignored_until_activation():
    state, accepted, events = egm_server_step(EgmState(), 0, egm_joints(0), WATCHDOG_NS, RECONNECT_NS)
    assert accepted is None and events == []

    state, _, events = egm_server_step(state, 0, egm_ctrl(0), WATCHDOG_NS, RECONNECT_NS)
    assert state.activation == Activation.ACTIVE
    assert [e.event for e in events] == ["activate"]

    state, accepted, _ = egm_server_step(state, 8_000_000, egm_joints(1, (0.1, 0.2)), WATCHDOG_NS, RECONNECT_NS)
    assert accepted == (0.1, 0.2)
    assert state.last_packet_ns == 8_000_000


def test_watchdog_trips_after_a_silent_gap():
    state, _, _ = egm_server_step(EgmState(), 0, egm_ctrl(0), WATCHDOG_NS, RECONNECT_NS)
    state, _, events = egm_server_step(state, WATCHDOG_NS, None, WATCHDOG_NS, RECONNECT_NS)
    assert events == []

    now = WATCHDOG_NS + 1
    state, accepted, events = egm_server_step(state, now, egm_joints(5), WATCHDOG_NS, RECONNECT_NS)
    assert accepted is None
    assert [e.event for e in events] == ["watchdog_trip"]
    assert state.activation == Activation.INACTIVE
    assert state.pending_reactivation_at_ns == now + RECONNECT_NS
    assert state.dropout_episodes == 1


def test_reordered_joint_targets_are_skipped():
    state, _, _ = egm_server_step(EgmState(), 0, egm_ctrl(0), WATCHDOG_NS, RECONNECT_NS)
    state, _, _ = egm_server_step(state, 1, egm_joints(7), WATCHDOG_NS, RECONNECT_NS)
    state, accepted, _ = egm_server_step(state, 2, egm_joints(6), WATCHDOG_NS, RECONNECT_NS)
    assert accepted is None
    assert state.last_seq == 7


def test_deactivate_and_repeated_activate():
    state, _, _ = egm_server_step(EgmState(), 0, egm_ctrl(0), WATCHDOG_NS, RECONNECT_NS)
    same, _, events = egm_server_step(state, 1, egm_ctrl(1), WATCHDOG_NS, RECONNECT_NS)
    assert same == state and events == []

    state, _, events = egm_server_step(state, 2, egm_ctrl(2, EgmCommand.DEACTIVATE), WATCHDOG_NS, RECONNECT_NS)
    assert state.activation == Activation.INACTIVE
    assert [e.event for e in events] == ["deactivate"]
    assert state.dropout_episodes == 0


def test_servo_is_rate_limited_and_lands_exactly():
    q = np.zeros(2)
    target = np.array([0.1, -0.05])
    q = robot_joint_step(q, target, 0.008, 3.0)
    assert q == pytest.approx([0.024, -0.024])
    for _ in range(10):
        q = robot_joint_step(q, target, 0.008, 3.0)
    assert np.array_equal(q, target)


def test_servo_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        robot_joint_step([0.0], [1.0], 0.0, 3.0)


@pytest.mark.parametrize("profile", ["ideal", "ethernet-lab"])
def test_clean_channel_executes_every_loop(profile, tmp_path):
    run = run_teleop(MotionProfile(loops=10), load_profile(profile), TeleopConfig(), seed=1, out_dir=tmp_path)
    assert run.stats.n_s == 10
    assert run.stats.n_a == 10
    assert run.stats.mlr == 0.0
    assert run.stats.dropout_episodes == 0
    assert run.stats.activations_sent == 1
    for name in ("desired.csv", "measured.csv", "egm_events.csv", "joint_error.csv", "stats.json"):
        assert (tmp_path / name).exists()
    assert json.loads((tmp_path / "stats.json").read_text())["samples"] == run.stats.samples


def test_dead_channel_loses_every_loop():
    run = run_teleop(MotionProfile(loops=3), ChannelProfile.static(1.0, 0), TeleopConfig(), seed=1)
    assert run.stats.n_s == 3
    assert run.stats.n_a == 0
    assert run.stats.mlr == 1.0
    # one activation per reconnect delay over the ~12 s session
    assert run.stats.activations_sent == 13
    assert run.stats.lost_samples == run.stats.samples


def test_same_seed_same_teleop_run():
    profile = load_profile("wifi6-long")
    a = run_teleop(MotionProfile(loops=20), profile, TeleopConfig(), seed=3)
    b = run_teleop(MotionProfile(loops=20), profile, TeleopConfig(), seed=3)
    assert a.stats == b.stats
    assert np.array_equal(a.measured_y, b.measured_y)


@pytest.mark.slow
@pytest.mark.parametrize("profile", ["ideal", "ethernet-lab"])
def test_full_session_on_a_clean_channel_loses_nothing(profile):
    run = run_teleop(MotionProfile(), load_profile(profile), TeleopConfig(), seed=1)
    assert run.stats.n_s == 890
    assert run.stats.n_a == 890
    assert run.stats.mlr == 0.0
    assert run.stats.dropout_episodes == 0


@pytest.mark.slow
def test_long_wifi_session_loses_some_loops():
    run = run_teleop(MotionProfile(), load_profile("wifi6-long"), TeleopConfig(), seed=1)
    assert run.stats.n_s == 890
    assert 0.0 < run.stats.mlr <= 0.2
    assert run.stats.dropout_episodes >= 1
