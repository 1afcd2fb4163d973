import csv
import json
import time
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from nethil.config.constants import CONTROLLER_ENDPOINT, NS_PER_MS, NS_PER_S, Direction, robot_endpoint
from nethil.coord.collisions import CollisionDetector
from nethil.coord.coordinator import CoordinationPolicy, Coordinator
from nethil.coord.fleet import RobotAgent
from nethil.coord.missions import MissionGenerator, MissionRegistry
from nethil.coord.scenario import Scenario
from nethil.metrics.rates import collision_rate
from nethil.netchan.link import open_link
from nethil.netchan.profile import ChannelProfile
from nethil.netchan.tap import TapSink

logger = logging.getLogger(__name__)


class NonProgressError(RuntimeError):
    """No critical section was created within the progress timeout."""


@dataclass
class CoordStats:
    scenario: str
    profile: str
    seed: int
    min_cs: int
    plr: float
    delay_ms: float
    control_period_ms: int
    tracker_period_ms: int
    ds: float
    safety_margin: int
    cs_total: int = 0
    collision_count: int = 0
    p_collision: float = 0.0
    virtual_duration_s: float = 0.0
    missions_completed: int = 0
    missions_deferred: int = 0
    deadlocks_resolved: int = 0
    messages: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


@dataclass
class CoordRun:
    stats: CoordStats
    events: list
    wall_s: float


class _Traces:
    """poses.csv / commands.csv / events.csv for one run; every writer is optional."""

    def __init__(self, out_dir: Optional[Path], poses: bool):
        self._files = []
        self.poses = self.commands = self.events = None
        if out_dir is None:
            return
        out_dir.mkdir(parents=True, exist_ok=True)
        if poses:
            self.poses = self._open(out_dir / "poses.csv", ["t_ns", "robot_id", "x", "y", "theta", "v", "s"])
        self.commands = self._open(out_dir / "commands.csv", ["t_ns", "robot_id", "critical_index", "seq"])
        self.events = self._open(out_dir / "events.csv", ["t_ns", "pair", "cs_id"])

    def _open(self, path: Path, header: list[str]):
        fh = open(path, "w", encoding="utf-8", newline="")
        self._files.append(fh)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        return writer

    def close(self) -> None:
        for fh in self._files:
            fh.close()


def run_coordination(
    scenario: Scenario,
    profile: ChannelProfile,
    seed: int,
    min_cs: int,
    out_dir: Optional[Path] = None,
    trace_poses: bool = False,
    tap_path: Optional[Path] = None,
    max_virtual_s: Optional[float] = None,
) -> CoordRun:
    """
    Drive robots, coordinator and channel on one timeline until min_cs
    critical sections have been created.
    """
    started = time.monotonic()
    mission_seed, channel_seed = np.random.SeedSequence(seed).spawn(2)

    specs = scenario.robot_specs()
    registry = MissionRegistry(scenario, specs)
    generator = MissionGenerator(scenario, np.random.default_rng(mission_seed))
    starts = generator.initial_locations(scenario.fleet_size)
    parked = {spec.robot_id: registry.park(spec.robot_id, starts[spec.robot_id]) for spec in specs}
    robots = {rid: RobotAgent(specs[rid], registry, mission) for rid, mission in parked.items()}

    policy = CoordinationPolicy(
        safety_margin=scenario.safety_margin_indices,
        revocable=scenario.revocable,
        deadlock_recovery=scenario.deadlock_recovery,
    )
    coordinator = Coordinator(
        registry, generator, policy, parked, {rid: r.state for rid, r in robots.items()},
    )
    detector = CollisionDetector(specs)

    tap = TapSink(tap_path) if tap_path else None
    link, clock = open_link(profile, channel_seed, tap=tap)
    traces = _Traces(out_dir, trace_poses)

    tick_ns = scenario.tracker_period_ms * NS_PER_MS
    dt = tick_ns / NS_PER_S
    control_every = scenario.control_period_ms // scenario.tracker_period_ms
    timeout_ns = int(scenario.progress_timeout_s * NS_PER_S)
    limit_ns = int(max_virtual_s * NS_PER_S) if max_virtual_s else None

    def route(now_ns: int) -> None:
        for delivery in link.poll(now_ns):
            msg = delivery.message
            if delivery.destination == CONTROLLER_ENDPOINT:
                coordinator.receive_status(msg)
            else:
                robots[msg.robot_id].apply_critical_point(msg)

    logger.info(
        f"Coordination run: scenario={scenario.name} profile={profile.name} seed={seed} min_cs={min_cs}"
    )
    tick = 0
    now_ns = 0
    try:
        while True:
            now_ns = tick * tick_ns
            clock.wait_until(now_ns)

            if tick > 0:
                for robot in robots.values():
                    robot.step(dt)
            for rid, robot in robots.items():
                link.send(now_ns, robot.status_message(now_ns), robot_endpoint(rid), CONTROLLER_ENDPOINT, Direction.STATUS)
            route(now_ns)

            if tick % control_every == 0:
                for msg in coordinator.update(now_ns):
                    link.send(now_ns, msg, CONTROLLER_ENDPOINT, robot_endpoint(msg.robot_id), Direction.COMMAND)
                    if traces.commands:
                        traces.commands.writerow([now_ns, msg.robot_id, msg.payload.critical_index, msg.seq])
            route(now_ns)

            states = {rid: r.state for rid, r in robots.items()}
            for event in detector.check(now_ns, states, coordinator.records):
                if traces.events:
                    traces.events.writerow([event.t_ns, event.pair_label, event.cs_id])
            if traces.poses:
                for rid, st in states.items():
                    traces.poses.writerow([now_ns, rid, st.x, st.y, st.theta, st.v, st.s])

            if coordinator.cs_total >= min_cs:
                break
            if now_ns - coordinator.last_cs_ns > timeout_ns:
                raise NonProgressError(
                    f"No critical section created for {scenario.progress_timeout_s:g} s of virtual time "
                    f"(t={now_ns / NS_PER_S:.1f} s, cs_total={coordinator.cs_total}, "
                    f"restrictions={coordinator.restrictions})"
                )
            if limit_ns is not None and now_ns >= limit_ns:
                logger.warning(f"Stopping at the virtual time limit with cs_total={coordinator.cs_total}")
                break
            tick += 1
    finally:
        link.close()
        traces.close()
        if tap:
            tap.close()

    stats = CoordStats(
        scenario=scenario.name,
        profile=profile.name,
        seed=seed,
        min_cs=min_cs,
        plr=profile.mean_loss(Direction.COMMAND),
        delay_ms=profile.mean_delay_ms(Direction.COMMAND),
        control_period_ms=scenario.control_period_ms,
        tracker_period_ms=scenario.tracker_period_ms,
        ds=scenario.sample_spacing,
        safety_margin=policy.safety_margin,
        cs_total=coordinator.cs_total,
        collision_count=detector.count,
        p_collision=_collision_rate(detector.count, coordinator.cs_total),
        virtual_duration_s=now_ns / NS_PER_S,
        missions_completed=coordinator.missions_completed,
        missions_deferred=coordinator.missions_deferred,
        deadlocks_resolved=coordinator.deadlocks_resolved,
        messages={
            f"{d.value}_{k}": v
            for d, c in link.counters.items()
            for k, v in asdict(c).items()
        },
    )
    wall_s = time.monotonic() - started
    logger.info(
        f"Run finished: cs_total={stats.cs_total} collisions={stats.collision_count} "
        f"virtual={stats.virtual_duration_s:.1f} s wall={wall_s:.1f} s"
    )
    if out_dir is not None:
        (out_dir / "stats.json").write_text(stats.to_json(), encoding="utf-8")
    return CoordRun(stats=stats, events=list(detector.events), wall_s=wall_s)


def _collision_rate(collisions: int, cs_total: int) -> float:
    if cs_total == 0:
        return 0.0
    return float(collision_rate(collisions, cs_total))
