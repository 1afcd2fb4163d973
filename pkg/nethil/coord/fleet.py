import logging
from dataclasses import dataclass, replace
from typing import Optional

from nethil.config.constants import MessageType
from nethil.coord.envelope import RobotSpec
from nethil.coord.kinematics import advance_along
from nethil.coord.missions import Mission, MissionRegistry
from nethil.netchan.wire import CriticalPoint, RobotStatus, WireMessage

logger = logging.getLogger(__name__)

UNRESTRICTED = -1
# arc-length tolerance for "reached the end of the mission"
ARRIVAL_TOL = 1e-6


@dataclass(frozen=True)
class RobotState:
    robot_id: int
    mission_id: int
    s: float
    v: float
    x: float
    y: float
    theta: float
    path_index: int
    critical_index: int = UNRESTRICTED
    last_cp_seq: int = -1
    status_seq: int = 0


def stop_target(state: RobotState, mission: Mission) -> float:
    """Arc position the tracker must be able to stop at."""
    if state.critical_index == UNRESTRICTED:
        return mission.length
    idx = min(state.critical_index, len(mission.envelope) - 1)
    return min(mission.length, float(mission.envelope.s[idx]))


def tracker_step(state: RobotState, dt: float, spec: RobotSpec, mission: Mission) -> RobotState:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    s, v = advance_along(state.s, state.v, dt, stop_target(state, mission), spec.v_max, spec.a_max)
    s = min(s, mission.length)
    x, y, theta = mission.path.pose_at(s)
    return replace(
        state, s=s, v=v, x=x, y=y, theta=theta,
        path_index=mission.envelope.index_at(s),
    )


def mission_complete(state: RobotState, mission: Mission) -> bool:
    return state.v == 0.0 and mission.length - state.s <= ARRIVAL_TOL


class RobotAgent:
    """Robot-side endpoint: applies critical points, tracks the path, reports status."""

    def __init__(self, spec: RobotSpec, registry: MissionRegistry, mission: Mission):
        self.spec = spec
        self.registry = registry
        self.mission = mission
        x, y, theta = mission.path.pose_at(0.0)
        self.state = RobotState(spec.robot_id, mission.mission_id, 0.0, 0.0, x, y, theta, 0)
        self.ignored_cps = 0

    @property
    def robot_id(self) -> int:
        return self.spec.robot_id

    def apply_critical_point(self, msg: WireMessage) -> bool:
        """Returns False when the message is older than the last applied one."""
        cp: CriticalPoint = msg.payload
        if msg.seq <= self.state.last_cp_seq:
            self.ignored_cps += 1
            return False

        if cp.mission_id != self.state.mission_id:
            # a new mission only starts from rest at the end of the current one
            if not mission_complete(self.state, self.mission):
                logger.warning(
                    f"robot{self.robot_id}: mission {cp.mission_id} arrived before "
                    f"mission {self.state.mission_id} finished; ignoring"
                )
                self.state = replace(self.state, last_cp_seq=msg.seq)
                return False
            self.mission = self.registry.get(self.robot_id, cp.mission_id)
            x, y, theta = self.mission.path.pose_at(0.0)
            self.state = replace(
                self.state, mission_id=cp.mission_id, s=0.0, v=0.0,
                x=x, y=y, theta=theta, path_index=0,
            )

        self.state = replace(self.state, critical_index=cp.critical_index, last_cp_seq=msg.seq)
        return True

    def step(self, dt: float) -> RobotState:
        self.state = tracker_step(self.state, dt, self.spec, self.mission)
        return self.state

    def status_message(self, now_ns: int) -> WireMessage:
        st = self.state
        self.state = replace(st, status_seq=st.status_seq + 1)
        return WireMessage(
            msg_type=MessageType.ROBOT_STATUS,
            robot_id=self.robot_id,
            seq=st.status_seq,
            send_time_ns=now_ns,
            payload=RobotStatus(st.mission_id, st.path_index, st.x, st.y, st.theta, st.v),
        )
