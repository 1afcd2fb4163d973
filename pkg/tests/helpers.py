import socket

from nethil.config.constants import EgmCommand, MessageType
from nethil.netchan.wire import CriticalPoint, EgmCtrl, EgmJoints, RobotStatus, WireMessage


def critical_point(seq: int, robot_id: int = 0, mission_id: int = 1, index: int = -1, t_ns: int = 0) -> WireMessage:
    return WireMessage(MessageType.CRITICAL_POINT, robot_id, seq, t_ns, CriticalPoint(mission_id, index))


def robot_status(seq: int, robot_id: int = 0, t_ns: int = 0) -> WireMessage:
    return WireMessage(
        MessageType.ROBOT_STATUS, robot_id, seq, t_ns, RobotStatus(1, 3, 1.5, -2.0, 0.25, 0.8)
    )


def egm_joints(seq: int, q=(0.1, -0.2), t_ns: int = 0) -> WireMessage:
    return WireMessage(MessageType.EGM_JOINTS, 0, seq, t_ns, EgmJoints(tuple(q)))


def egm_ctrl(seq: int, command: EgmCommand = EgmCommand.ACTIVATE, t_ns: int = 0) -> WireMessage:
    return WireMessage(MessageType.EGM_CTRL, 0, seq, t_ns, EgmCtrl(command))


def free_udp_port() -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]
