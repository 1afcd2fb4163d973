import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from nethil.coord.geometry import OrientedRect, obb_intersect_matrix
from nethil.coord.path import PathGeom

# 8-connectivity: diagonal steps belong to the same run
_STRUCTURE = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class RobotSpec:
    robot_id: int
    length_m: float
    width_m: float
    v_max: float
    a_max: float

    @property
    def half_length(self) -> float:
        return self.length_m / 2

    @property
    def half_width(self) -> float:
        return self.width_m / 2

    def footprint(self, x: float, y: float, theta: float) -> OrientedRect:
        return OrientedRect(x, y, self.half_length, self.half_width, theta)


@dataclass(frozen=True)
class Envelope:
    """Footprint rectangles sampled along a path; sample i sits at arc position s[i]."""

    s: np.ndarray
    centers: np.ndarray  # (n, 2)
    angles: np.ndarray
    half_length: float
    half_width: float

    def __len__(self) -> int:
        return len(self.s)

    def rect(self, i: int) -> OrientedRect:
        cx, cy = self.centers[i]
        return OrientedRect(float(cx), float(cy), self.half_length, self.half_width, float(self.angles[i]))

    def index_at(self, s: float) -> int:
        """Index of the sample at or before arc position s."""
        i = int(np.searchsorted(self.s, s + 1e-9, side="right")) - 1
        return min(max(i, 0), len(self.s) - 1)


@dataclass(frozen=True)
class CriticalSection:
    robot_a: int
    robot_b: int
    a_range: tuple[int, int]  # inclusive
    b_range: tuple[int, int]
    cs_id: int = -1

    def range_of(self, robot_id: int) -> tuple[int, int]:
        return self.a_range if robot_id == self.robot_a else self.b_range

    def other(self, robot_id: int) -> int:
        return self.robot_b if robot_id == self.robot_a else self.robot_a


def sweep_envelope(path: PathGeom, spec: RobotSpec, ds: float) -> Envelope:
    if ds <= 0:
        raise ValueError(f"ds must be positive, got {ds}")
    length = path.length
    count = int(math.floor(length / ds + 1e-9)) + 1
    s = np.arange(count, dtype=float) * ds
    if length - s[-1] > 1e-9:
        s = np.append(s, length)
    x, y, theta = path.poses_at(s)
    return Envelope(
        s=s,
        centers=np.stack([x, y], axis=-1),
        angles=theta,
        half_length=spec.half_length,
        half_width=spec.half_width,
    )


def intersection_matrix(env_a: Envelope, env_b: Envelope, a_start: int = 0, b_start: int = 0) -> np.ndarray:
    return obb_intersect_matrix(
        env_a.centers[a_start:], env_a.angles[a_start:], env_a.half_length, env_a.half_width,
        env_b.centers[b_start:], env_b.angles[b_start:], env_b.half_length, env_b.half_width,
    )


def find_critical_sections(
    env_a: Envelope,
    env_b: Envelope,
    a_start: int = 0,
    b_start: int = 0,
    robot_a: int = 0,
    robot_b: int = 1,
) -> list[CriticalSection]:
    """
    Overlap regions between two envelopes, as index ranges on each. Only
    samples from a_start / b_start on are considered; returned indices are
    absolute. Components whose ranges overlap on either envelope are merged
    so each returned range is maximal.
    """
    hits = intersection_matrix(env_a, env_b, a_start, b_start)
    if not hits.any():
        return []

    labels, _ = ndimage.label(hits, structure=_STRUCTURE)
    boxes = [
        [sl[0].start, sl[0].stop - 1, sl[1].start, sl[1].stop - 1]
        for sl in ndimage.find_objects(labels)
        if sl is not None
    ]
    boxes = _merge_boxes(boxes)
    boxes.sort(key=lambda b: (b[0], b[2]))

    return [
        CriticalSection(
            robot_a=robot_a,
            robot_b=robot_b,
            a_range=(a0 + a_start, a1 + a_start),
            b_range=(b0 + b_start, b1 + b_start),
        )
        for a0, a1, b0, b1 in boxes
    ]


def _merge_boxes(boxes: list[list[int]]) -> list[list[int]]:
    merged = True
    while merged:
        merged = False
        out: list[list[int]] = []
        for box in boxes:
            for other in out:
                if _ranges_touch(box[0], box[1], other[0], other[1]) or \
                        _ranges_touch(box[2], box[3], other[2], other[3]):
                    other[0] = min(other[0], box[0])
                    other[1] = max(other[1], box[1])
                    other[2] = min(other[2], box[2])
                    other[3] = max(other[3], box[3])
                    merged = True
                    break
            else:
                out.append(list(box))
        boxes = out
    return boxes


def _ranges_touch(lo1: int, hi1: int, lo2: int, hi2: int) -> bool:
    # adjacent ranges count too, otherwise a range would not be maximal
    return lo1 <= hi2 + 1 and lo2 <= hi1 + 1
