import math
from typing import Literal

# slack on the reachable annulus before a target counts as unreachable (m)
REACH_TOL = 1e-9
# |cos q2| this close to 1 is treated as a straight or folded arm
FOLD_TOL = 1e-12

Branch = Literal["up", "down"]


class ReachabilityError(ValueError):
    def __init__(self, distance: float, r_min: float, r_max: float):
        self.distance = distance
        self.r_min = r_min
        self.r_max = r_max
        super().__init__(
            f"Target at distance {distance:.6f} m is outside the reachable annulus [{r_min:.6f}, {r_max:.6f}] m"
        )


def fk_2link(q1: float, q2: float, l1: float, l2: float) -> tuple[float, float]:
    return (
        l1 * math.cos(q1) + l2 * math.cos(q1 + q2),
        l1 * math.sin(q1) + l2 * math.sin(q1 + q2),
    )


def ik_2link(target: tuple[float, float], l1: float, l2: float, branch: Branch = "down") -> tuple[float, float]:
    """
    Closed-form planar two-link IK. "down" takes q2 >= 0, "up" takes q2 <= 0.
    """
    x, y = target
    r = math.hypot(x, y)
    r_min, r_max = abs(l1 - l2), l1 + l2
    if r > r_max + REACH_TOL or r < r_min - REACH_TOL:
        raise ReachabilityError(r, r_min, r_max)

    c2 = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if c2 >= 1.0 - FOLD_TOL:
        c2 = 1.0
    elif c2 <= -1.0 + FOLD_TOL:
        c2 = -1.0
    q2 = math.atan2(math.sqrt(max(0.0, 1.0 - c2 * c2)), c2)
    if branch == "up":
        q2 = -q2
    q1 = math.atan2(y, x) - math.atan2(l2 * math.sin(q2), l1 + l2 * math.cos(q2))
    # keep q1 in (-pi, pi]
    q1 = math.atan2(math.sin(q1), math.cos(q1))
    return q1, q2
