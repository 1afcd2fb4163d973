from enum import Enum, IntEnum


class MessageType(IntEnum):
    CRITICAL_POINT = 1
    ROBOT_STATUS = 2
    EGM_JOINTS = 3
    EGM_CTRL = 4


class EgmCommand(IntEnum):
    DEACTIVATE = 0
    ACTIVATE = 1


class Direction(str, Enum):
    COMMAND = "command"  # controller -> robot
    STATUS = "status"    # robot -> controller


class LinkMode(str, Enum):
    EMULATED = "emulated"
    REAL_PASSTHROUGH = "real-passthrough"


class TapDirection(str, Enum):
    SEND = "send"
    RECV = "recv"


class Activation(str, Enum):
    INACTIVE = "inactive"
    ACTIVE = "active"


# ── Wire format ────────────────────────────────────────────────────────────
WIRE_MAGIC = b"NHL1"
WIRE_VERSION = 1
UNKNOWN_MSG_TYPE = "unknown"

# ── Endpoints used in taps ─────────────────────────────────────────────────
CONTROLLER_ENDPOINT = "controller"


def robot_endpoint(robot_id: int) -> str:
    return f"robot{robot_id}"


# ── Fleet presets (length m, width m, v_max m/s, a_max m/s²) ───────────────
FLEET_PRESETS = {
    "harbor": {"length_m": 14.8, "width_m": 3.0, "v_max": 6.0, "a_max": 2.0, "ds": 2.0},
    "warehouse": {"length_m": 2.0, "width_m": 0.5, "v_max": 2.0, "a_max": 1.0, "ds": 0.5},
}
FLEET_SIZE = 7

# ── Channel profiles ───────────────────────────────────────────────────────
# Report ordering for teleoperation suites and HiL-analog grid rows
PROFILE_ORDER = ["ideal", "ethernet-lab", "wifi6-short", "wifi6-long", "wifi6-long-iid"]

DEFAULT_GRID_PLR = [0.0, 0.1]
DEFAULT_GRID_DELAY_MS = [0.0, 10.0, 50.0, 100.0]
DEFAULT_ENSEMBLE_SEEDS = [1, 2, 3, 4, 5]

NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000
