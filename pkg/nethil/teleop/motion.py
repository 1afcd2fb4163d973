import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field

from nethil.config.constants import NS_PER_S
from nethil.config.settings import settings


class MotionProfile(BaseModel):
    """Synthetic side-to-side arm swing, expressed about `center` in the robot base frame."""

    rate_hz: float = Field(settings.TELEOP_RATE_HZ, gt=0)
    loop_period_s: float = Field(settings.TELEOP_LOOP_PERIOD_S, gt=0)
    loops: int = Field(settings.TELEOP_LOOPS, ge=1)
    amplitude_m: float = Field(0.3, ge=0)
    center: tuple[float, float] = (0.45, 0.0)

    @property
    def frame_period_ns(self) -> int:
        return int(round(NS_PER_S / self.rate_hz))

    @property
    def sample_count(self) -> int:
        return int(round(self.rate_hz * self.loop_period_s * self.loops))


class TeleopConfig(BaseModel):
    mapping_scale: float = Field(0.8, gt=0)
    l1: float = Field(0.35, gt=0)
    l2: float = Field(0.35, gt=0)
    qdot_max: float = Field(3.0, gt=0)  # rad/s, every joint
    watchdog_timeout_ms: float = Field(settings.WATCHDOG_TIMEOUT_MS, gt=0)
    reconnect_delay_ms: float = Field(settings.RECONNECT_DELAY_MS, gt=0)
    elbow: Literal["up", "down"] = "down"
    peak_threshold: float = Field(0.5, ge=0, lt=1)
    peak_separation_loops: float = Field(0.5, gt=0)

    @property
    def watchdog_timeout_ns(self) -> int:
        return int(round(self.watchdog_timeout_ms * 1e6))

    @property
    def reconnect_delay_ns(self) -> int:
        return int(round(self.reconnect_delay_ms * 1e6))


def generate_swing(profile: MotionProfile) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Desired hand positions, one per frame: returns (t_ns, x, y)."""
    n = profile.sample_count
    t_ns = np.arange(n, dtype=np.int64) * profile.frame_period_ns
    t_s = np.arange(n, dtype=float) / profile.rate_hz
    x0, y0 = profile.center
    x = np.full(n, x0, dtype=float)
    y = y0 + profile.amplitude_m * np.sin(2.0 * math.pi * t_s / profile.loop_period_s)
    return t_ns, x, y


def map_motion(
    human_point: tuple[float, float],
    scale: float,
    center: tuple[float, float] = (0.0, 0.0),
) -> tuple[float, float]:
    return (
        center[0] + scale * (human_point[0] - center[0]),
        center[1] + scale * (human_point[1] - center[1]),
    )
