import struct
from dataclasses import dataclass, field
from typing import Union

from nethil.config.constants import MessageType, EgmCommand, WIRE_MAGIC, WIRE_VERSION

# magic, version, msg_type, robot_id, seq, send_time_ns
HEADER = struct.Struct("<4sBBHIQ")
HEADER_SIZE = HEADER.size  # 20

_CRITICAL_POINT = struct.Struct("<Ii")
_ROBOT_STATUS = struct.Struct("<Iidddd")
_JOINT_COUNT = struct.Struct("<B")
_EGM_CTRL = struct.Struct("<B")


class WireError(ValueError):
    """Base class for datagram decoding failures."""


class BadMagicError(WireError):
    pass


class UnsupportedVersionError(WireError):
    pass


class UnknownMessageTypeError(WireError):
    pass


class ShortBufferError(WireError):
    pass


class PayloadLengthError(WireError):
    pass


@dataclass(frozen=True)
class CriticalPoint:
    mission_id: int
    critical_index: int  # -1 = unrestricted


@dataclass(frozen=True)
class RobotStatus:
    mission_id: int
    path_index: int
    x: float
    y: float
    theta: float
    v: float


@dataclass(frozen=True)
class EgmJoints:
    joints: tuple[float, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class EgmCtrl:
    command: EgmCommand


Payload = Union[CriticalPoint, RobotStatus, EgmJoints, EgmCtrl]

_PAYLOAD_TYPES = {
    MessageType.CRITICAL_POINT: CriticalPoint,
    MessageType.ROBOT_STATUS: RobotStatus,
    MessageType.EGM_JOINTS: EgmJoints,
    MessageType.EGM_CTRL: EgmCtrl,
}


@dataclass(frozen=True)
class WireMessage:
    msg_type: MessageType
    robot_id: int
    seq: int
    send_time_ns: int
    payload: Payload
    version: int = WIRE_VERSION


def encode_message(msg: WireMessage) -> bytes:
    """Serialize a message into the little-endian NHL1 datagram layout."""
    expected = _PAYLOAD_TYPES.get(MessageType(msg.msg_type))
    if not isinstance(msg.payload, expected):
        raise WireError(f"{MessageType(msg.msg_type).name} cannot carry {type(msg.payload).__name__}")

    try:
        header = HEADER.pack(
            WIRE_MAGIC, msg.version, int(msg.msg_type), msg.robot_id, msg.seq, msg.send_time_ns
        )
        payload = msg.payload
        if isinstance(payload, CriticalPoint):
            body = _CRITICAL_POINT.pack(payload.mission_id, payload.critical_index)
        elif isinstance(payload, RobotStatus):
            body = _ROBOT_STATUS.pack(
                payload.mission_id, payload.path_index,
                payload.x, payload.y, payload.theta, payload.v,
            )
        elif isinstance(payload, EgmJoints):
            count = len(payload.joints)
            body = _JOINT_COUNT.pack(count) + struct.pack(f"<{count}d", *payload.joints)
        else:
            body = _EGM_CTRL.pack(int(payload.command))
    except struct.error as e:
        raise WireError(f"Field out of range: {e}") from e

    return header + body


def decode_message(data: bytes) -> WireMessage:
    """Parse a datagram; raises a WireError subclass naming the failure kind."""
    if len(data) < HEADER_SIZE:
        raise ShortBufferError(f"Datagram of {len(data)} bytes is shorter than the {HEADER_SIZE}-byte header")

    magic, version, raw_type, robot_id, seq, send_time_ns = HEADER.unpack_from(data)
    if magic != WIRE_MAGIC:
        raise BadMagicError(f"Bad magic {magic.hex()}")
    if version != WIRE_VERSION:
        raise UnsupportedVersionError(f"Unsupported wire version {version}")
    try:
        msg_type = MessageType(raw_type)
    except ValueError:
        raise UnknownMessageTypeError(f"Unknown msg_type {raw_type}") from None

    body = data[HEADER_SIZE:]
    if msg_type == MessageType.CRITICAL_POINT:
        _expect_length(msg_type, body, _CRITICAL_POINT.size)
        payload = CriticalPoint(*_CRITICAL_POINT.unpack(body))
    elif msg_type == MessageType.ROBOT_STATUS:
        _expect_length(msg_type, body, _ROBOT_STATUS.size)
        payload = RobotStatus(*_ROBOT_STATUS.unpack(body))
    elif msg_type == MessageType.EGM_JOINTS:
        if not body:
            raise PayloadLengthError("EGM_JOINTS payload is missing its joint count")
        count = body[0]
        _expect_length(msg_type, body, 1 + 8 * count)
        payload = EgmJoints(struct.unpack_from(f"<{count}d", body, 1))
    else:
        _expect_length(msg_type, body, _EGM_CTRL.size)
        try:
            payload = EgmCtrl(EgmCommand(body[0]))
        except ValueError:
            raise WireError(f"EGM_CTRL command byte {body[0]} is not defined") from None

    return WireMessage(
        msg_type=msg_type,
        robot_id=robot_id,
        seq=seq,
        send_time_ns=send_time_ns,
        payload=payload,
        version=version,
    )


def _expect_length(msg_type: MessageType, body: bytes, size: int) -> None:
    if len(body) != size:
        raise PayloadLengthError(f"{msg_type.name} payload is {len(body)} bytes, expected {size}")
