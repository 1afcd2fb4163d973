import csv
import json
import time
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from nethil.config.constants import (
    Activation, CONTROLLER_ENDPOINT, Direction, EgmCommand, MessageType, NS_PER_S, robot_endpoint,
)
from nethil.metrics.errors import joint_error_series
from nethil.metrics.peaks import count_motion_loops
from nethil.metrics.rates import mlr
from nethil.netchan.link import open_link
from nethil.netchan.profile import ChannelProfile
from nethil.netchan.tap import TapSink
from nethil.netchan.wire import EgmCtrl, EgmJoints, WireMessage
from nethil.teleop.egm import EgmState, egm_server_step
from nethil.teleop.kinematics import fk_2link, ik_2link
from nethil.teleop.motion import MotionProfile, TeleopConfig, generate_swing, map_motion
from nethil.teleop.servo import robot_joint_step

logger = logging.getLogger(__name__)

ROBOT_ID = 0


@dataclass
class TeleopStats:
    profile: str
    seed: int
    loops: int
    samples: int
    n_s: int
    n_a: int
    mlr: float
    joint_error_mean: float
    joint_error_max: float
    lost_samples: int
    dropout_episodes: int
    activations_sent: int
    series: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


@dataclass
class TeleopRun:
    stats: TeleopStats
    desired_y: np.ndarray
    measured_y: np.ndarray
    wall_s: float


class _Series:
    def __init__(self, out_dir: Optional[Path]):
        self._files = []
        self.desired = self.measured = self.events = self.errors = None
        self.out_dir = out_dir
        if out_dir is None:
            return
        out_dir.mkdir(parents=True, exist_ok=True)
        self.desired = self._open(out_dir / "desired.csv", ["t_ns", "seq", "q1_des", "q2_des", "y_des"])
        self.measured = self._open(out_dir / "measured.csv", ["t_ns", "seq_last_applied", "q1", "q2", "y_tcp"])
        self.events = self._open(out_dir / "egm_events.csv", ["t_ns", "event"])

    def _open(self, path: Path, header: list[str]):
        fh = open(path, "w", encoding="utf-8", newline="")
        self._files.append(fh)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        return writer

    def names(self) -> dict:
        if self.out_dir is None:
            return {}
        return {
            "desired": "desired.csv",
            "measured": "measured.csv",
            "events": "egm_events.csv",
            "joint_error": "joint_error.csv",
        }

    def close(self) -> None:
        for fh in self._files:
            fh.close()


def run_teleop(
    motion: MotionProfile,
    channel_profile: ChannelProfile,
    config: TeleopConfig,
    seed: int,
    out_dir: Optional[Path] = None,
    tap_path: Optional[Path] = None,
) -> TeleopRun:
    """
    Stream one synthetic swing through the channel into the servo model and
    measure how many motion loops survive.
    """
    started = time.monotonic()
    t_ns, hand_x, hand_y = generate_swing(motion)
    frame_ns = motion.frame_period_ns
    dt = frame_ns / NS_PER_S

    tap = TapSink(tap_path) if tap_path else None
    link, clock = open_link(channel_profile, np.random.SeedSequence(seed), tap=tap)
    series = _Series(out_dir)
    robot = robot_endpoint(ROBOT_ID)

    egm = EgmState()
    q = np.array(ik_2link(map_motion((hand_x[0], hand_y[0]), config.mapping_scale, motion.center),
                          config.l1, config.l2, config.elbow))
    target = q.copy()
    ctrl_seq = 0
    activations_sent = 0
    last_activate_ns: Optional[int] = None

    desired_q: dict[int, tuple[float, float]] = {}
    measured_q: dict[int, tuple[float, float]] = {}
    desired_y = np.empty(len(t_ns))
    measured_y = np.empty(len(t_ns))

    def send_activate(now: int) -> None:
        nonlocal ctrl_seq, activations_sent, last_activate_ns
        msg = WireMessage(MessageType.EGM_CTRL, ROBOT_ID, ctrl_seq, now, EgmCtrl(EgmCommand.ACTIVATE))
        link.send(now, msg, CONTROLLER_ENDPOINT, robot, Direction.COMMAND)
        ctrl_seq += 1
        activations_sent += 1
        last_activate_ns = now

    logger.info(
        f"Teleop run: profile={channel_profile.name} seed={seed} loops={motion.loops} samples={len(t_ns)}"
    )
    try:
        for k in range(len(t_ns)):
            now = int(t_ns[k])
            clock.wait_until(now)

            # controller: (re)activation, then this frame's joint target
            if k == 0:
                send_activate(now)
            elif egm.activation == Activation.INACTIVE:
                pending = egm.pending_reactivation_at_ns
                if pending is not None and last_activate_ns < pending:
                    due = pending
                else:
                    # the last attempt was lost; retry at the reconnect cadence
                    due = last_activate_ns + config.reconnect_delay_ns
                if now >= due:
                    send_activate(now)

            tx, ty = map_motion((hand_x[k], hand_y[k]), config.mapping_scale, motion.center)
            q_des = ik_2link((tx, ty), config.l1, config.l2, config.elbow)
            desired_q[k] = q_des
            desired_y[k] = ty
            link.send(now, WireMessage(MessageType.EGM_JOINTS, ROBOT_ID, k, now, EgmJoints(q_des)),
                      CONTROLLER_ENDPOINT, robot, Direction.COMMAND)
            if series.desired:
                series.desired.writerow([now, k, q_des[0], q_des[1], ty])

            # robot: drain arrivals, watchdog, servo
            applied = False
            for delivery in link.poll(now):
                egm, accepted, events = egm_server_step(
                    egm, now, delivery.message, config.watchdog_timeout_ns, config.reconnect_delay_ns,
                )
                _log_events(series, events)
                if accepted is not None:
                    target = np.array(accepted)
                    applied = True
            egm, _, events = egm_server_step(egm, now, None, config.watchdog_timeout_ns, config.reconnect_delay_ns)
            _log_events(series, events)

            q = robot_joint_step(q, target, dt, config.qdot_max)
            _, y_tcp = fk_2link(q[0], q[1], config.l1, config.l2)
            measured_y[k] = y_tcp
            if applied:
                measured_q[egm.last_seq] = (float(q[0]), float(q[1]))
            if series.measured:
                series.measured.writerow([now, egm.last_seq, q[0], q[1], y_tcp])
    finally:
        link.close()
        series.close()
        if tap:
            tap.close()

    separation_s = config.peak_separation_loops * motion.loop_period_s
    n_s = count_motion_loops(desired_y, config.peak_threshold, separation_s, motion.rate_hz)
    n_a = count_motion_loops(measured_y, config.peak_threshold, separation_s, motion.rate_hz)
    joint_err = joint_error_series(desired_q, measured_q)
    if out_dir is not None:
        _write_joint_errors(out_dir / "joint_error.csv", joint_err)

    stats = TeleopStats(
        profile=channel_profile.name,
        seed=seed,
        loops=motion.loops,
        samples=len(t_ns),
        n_s=n_s,
        n_a=n_a,
        mlr=float(mlr(n_s, n_a)),
        joint_error_mean=joint_err.mean_abs,
        joint_error_max=joint_err.max_abs,
        lost_samples=int(joint_err.lost_seqs.size),
        dropout_episodes=egm.dropout_episodes,
        activations_sent=activations_sent,
        series=series.names(),
    )
    wall_s = time.monotonic() - started
    logger.info(
        f"Teleop finished: n_s={n_s} n_a={n_a} mlr={stats.mlr:.6f} "
        f"dropouts={stats.dropout_episodes} wall={wall_s:.1f} s"
    )
    if out_dir is not None:
        (out_dir / "stats.json").write_text(stats.to_json(), encoding="utf-8")
    return TeleopRun(stats=stats, desired_y=desired_y, measured_y=measured_y, wall_s=wall_s)


def _log_events(series: _Series, events) -> None:
    for event in events:
        if event.event == "watchdog_trip":
            logger.debug(f"EGM dropout at {event.t_ns / 1e9:.3f} s")
        if series.events:
            series.events.writerow([event.t_ns, event.event])


def _write_joint_errors(path: Path, joint_err) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seq", "e_q1", "e_q2"])
        for seq, err in zip(joint_err.seqs, joint_err.errors):
            writer.writerow([int(seq), float(err[0]), float(err[1])])
