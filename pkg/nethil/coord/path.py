import math
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class PathGeom:
    """
    Piecewise-linear path. `s[i]` is the arc length at waypoint i and
    `theta[i]` the heading of the segment leaving it (the last waypoint keeps
    the heading of the segment that reaches it).
    """

    waypoints: np.ndarray  # (n, 2)
    s: np.ndarray          # (n,)
    theta: np.ndarray      # (n,)

    @property
    def length(self) -> float:
        return float(self.s[-1])

    def pose_at(self, s: float) -> tuple[float, float, float]:
        n = len(self.s)
        if n == 1 or s <= 0.0:
            x, y = self.waypoints[0]
            return float(x), float(y), float(self.theta[0])
        if s >= self.s[-1]:
            x, y = self.waypoints[-1]
            return float(x), float(y), float(self.theta[-1])

        i = int(np.searchsorted(self.s, s, side="right")) - 1
        i = min(i, n - 2)
        seg = self.s[i + 1] - self.s[i]
        f = (s - self.s[i]) / seg
        x0, y0 = self.waypoints[i]
        x1, y1 = self.waypoints[i + 1]
        return float(x0 + f * (x1 - x0)), float(y0 + f * (y1 - y0)), float(self.theta[i])

    def poses_at(self, s_values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized pose_at for sorted or unsorted arc positions."""
        s_values = np.clip(np.asarray(s_values, dtype=float), 0.0, self.length)
        n = len(self.s)
        if n == 1:
            k = len(s_values)
            return (
                np.full(k, self.waypoints[0, 0]),
                np.full(k, self.waypoints[0, 1]),
                np.full(k, self.theta[0]),
            )
        i = np.clip(np.searchsorted(self.s, s_values, side="right") - 1, 0, n - 2)
        seg = self.s[i + 1] - self.s[i]
        f = (s_values - self.s[i]) / seg
        p0 = self.waypoints[i]
        p1 = self.waypoints[i + 1]
        xy = p0 + f[:, None] * (p1 - p0)
        # at the very end the heading is the last segment's
        heading = np.where(s_values >= self.length, self.theta[-1], self.theta[i])
        return xy[:, 0], xy[:, 1], heading

    def project(self, x: float, y: float, near_s: float = 0.0, window: float = math.inf) -> float:
        """Arc position of the closest point to (x, y), searched within ±window of near_s."""
        if len(self.s) == 1:
            return 0.0
        best_s, best_d2 = 0.0, math.inf
        lo, hi = near_s - window, near_s + window
        for i in range(len(self.s) - 1):
            s0, s1 = self.s[i], self.s[i + 1]
            if s1 < lo or s0 > hi:
                continue
            x0, y0 = self.waypoints[i]
            dx, dy = self.waypoints[i + 1] - self.waypoints[i]
            seg2 = dx * dx + dy * dy
            t = ((x - x0) * dx + (y - y0) * dy) / seg2
            t = min(1.0, max(0.0, t))
            px, py = x0 + t * dx, y0 + t * dy
            d2 = (x - px) ** 2 + (y - py) ** 2
            if d2 < best_d2:
                best_d2, best_s = d2, s0 + t * (s1 - s0)
        return float(best_s)


def arc_length_parameterize(waypoints: Sequence[Sequence[float]], heading: float | None = None) -> PathGeom:
    """
    Build a PathGeom from (x, y) waypoints. A single-waypoint path has
    length 0 and takes `heading` (default 0).
    """
    pts = np.asarray(waypoints, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise PathError("A path needs at least one waypoint")

    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    if np.any(seg_len == 0.0):
        i = int(np.argmin(seg_len))
        raise PathError(f"Waypoints {i} and {i + 1} coincide at {tuple(pts[i])}")

    s = np.concatenate([[0.0], np.cumsum(seg_len)])
    if len(pts) == 1:
        theta = np.array([heading or 0.0])
    else:
        seg_theta = np.arctan2(seg[:, 1], seg[:, 0])
        theta = np.concatenate([seg_theta, seg_theta[-1:]])
    return PathGeom(waypoints=pts, s=s, theta=theta)
