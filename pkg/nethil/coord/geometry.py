import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OrientedRect:
    cx: float
    cy: float
    half_length: float
    half_width: float
    angle: float

    def corners(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        ux = np.array([c, s]) * self.half_length
        uy = np.array([-s, c]) * self.half_width
        center = np.array([self.cx, self.cy])
        return np.array([center + ux + uy, center - ux + uy, center - ux - uy, center + ux - uy])

    @property
    def radius(self) -> float:
        return math.hypot(self.half_length, self.half_width)


def obb_intersect(a: OrientedRect, b: OrientedRect) -> bool:
    """
    Separating-axis test for two oriented rectangles. Touching counts as
    intersecting.
    """
    dx, dy = b.cx - a.cx, b.cy - a.cy
    if dx * dx + dy * dy > (a.radius + b.radius) ** 2:
        return False

    ca, sa = math.cos(a.angle), math.sin(a.angle)
    cb, sb = math.cos(b.angle), math.sin(b.angle)
    axes_a = ((ca, sa), (-sa, ca))
    axes_b = ((cb, sb), (-sb, cb))

    for ux, uy in axes_a + axes_b:
        ra = a.half_length * abs(ux * axes_a[0][0] + uy * axes_a[0][1]) + \
            a.half_width * abs(ux * axes_a[1][0] + uy * axes_a[1][1])
        rb = b.half_length * abs(ux * axes_b[0][0] + uy * axes_b[0][1]) + \
            b.half_width * abs(ux * axes_b[1][0] + uy * axes_b[1][1])
        if abs(dx * ux + dy * uy) > ra + rb:
            return False
    return True


def obb_intersect_matrix(
    ca: np.ndarray, angle_a: np.ndarray, hl_a: float, hw_a: float,
    cb: np.ndarray, angle_b: np.ndarray, hl_b: float, hw_b: float,
) -> np.ndarray:
    """
    Pairwise SAT over two rectangle sets sharing a footprint each.

    ca, cb: (n, 2) and (m, 2) centers; angle_a, angle_b: (n,) and (m,).
    Returns an (n, m) boolean matrix.
    """
    d = cb[None, :, :] - ca[:, None, :]  # (n, m, 2)
    dist2 = np.einsum("nmk,nmk->nm", d, d)
    reach = math.hypot(hl_a, hw_a) + math.hypot(hl_b, hw_b)
    hit = dist2 <= reach * reach
    if not hit.any():
        return hit

    # relative angle is all that matters for the projected half-extents
    rel = angle_b[None, :] - angle_a[:, None]
    cos_r = np.abs(np.cos(rel))
    sin_r = np.abs(np.sin(rel))

    ax_a = np.stack([np.cos(angle_a), np.sin(angle_a)], axis=-1)  # (n, 2)
    ay_a = np.stack([-np.sin(angle_a), np.cos(angle_a)], axis=-1)
    ax_b = np.stack([np.cos(angle_b), np.sin(angle_b)], axis=-1)  # (m, 2)
    ay_b = np.stack([-np.sin(angle_b), np.cos(angle_b)], axis=-1)

    # axes of a
    proj = np.abs(np.einsum("nmk,nk->nm", d, ax_a))
    hit &= proj <= hl_a + hl_b * cos_r + hw_b * sin_r
    proj = np.abs(np.einsum("nmk,nk->nm", d, ay_a))
    hit &= proj <= hw_a + hl_b * sin_r + hw_b * cos_r
    # axes of b
    proj = np.abs(np.einsum("nmk,mk->nm", d, ax_b))
    hit &= proj <= hl_b + hl_a * cos_r + hw_a * sin_r
    proj = np.abs(np.einsum("nmk,mk->nm", d, ay_b))
    hit &= proj <= hw_b + hl_a * sin_r + hw_a * cos_r
    return hit


def rect_hits_box(rect: OrientedRect, x_min: float, y_min: float, x_max: float, y_max: float) -> bool:
    box = OrientedRect(
        cx=(x_min + x_max) / 2, cy=(y_min + y_max) / 2,
        half_length=(x_max - x_min) / 2, half_width=(y_max - y_min) / 2, angle=0.0,
    )
    return obb_intersect(rect, box)


def point_rect_distance(
    px: float, py: float, centers: np.ndarray, angles: np.ndarray, half_length: float, half_width: float,
) -> np.ndarray:
    """Distance from a point to each rectangle of a set sharing one footprint; 0 inside."""
    d = np.array([px, py]) - centers
    c, s = np.cos(angles), np.sin(angles)
    along = np.abs(d[:, 0] * c + d[:, 1] * s) - half_length
    across = np.abs(d[:, 1] * c - d[:, 0] * s) - half_width
    return np.hypot(np.maximum(along, 0.0), np.maximum(across, 0.0))
