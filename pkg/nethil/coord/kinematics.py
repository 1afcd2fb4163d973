import math
from dataclasses import dataclass

# speeds below this are treated as rest (m/s)
_REST_EPS = 1e-9


@dataclass(frozen=True)
class TrapezoidProfile:
    length: float
    v_max: float
    a_max: float
    v_peak: float
    t_accel: float
    t_cruise: float

    @property
    def duration(self) -> float:
        return 2 * self.t_accel + self.t_cruise

    def position(self, t: float) -> float:
        a, vp = self.a_max, self.v_peak
        if t <= 0.0:
            return 0.0
        if t >= self.duration:
            return self.length
        if t < self.t_accel:
            return 0.5 * a * t * t
        d_acc = 0.5 * a * self.t_accel ** 2
        if t < self.t_accel + self.t_cruise:
            return d_acc + vp * (t - self.t_accel)
        td = self.duration - t
        return self.length - 0.5 * a * td * td

    def velocity(self, t: float) -> float:
        if t <= 0.0 or t >= self.duration:
            return 0.0
        if t < self.t_accel:
            return self.a_max * t
        if t < self.t_accel + self.t_cruise:
            return self.v_peak
        return self.a_max * (self.duration - t)


def trapezoid_profile(length_m: float, v_max: float, a_max: float) -> TrapezoidProfile:
    """Rest-to-rest profile; triangular when the path is too short to reach v_max."""
    if length_m >= v_max * v_max / a_max:
        t_acc = v_max / a_max
        t_cruise = (length_m - v_max * v_max / a_max) / v_max
        v_peak = v_max
    else:
        t_acc = math.sqrt(length_m / a_max)
        t_cruise = 0.0
        v_peak = a_max * t_acc
    return TrapezoidProfile(length_m, v_max, a_max, v_peak, t_acc, t_cruise)


def braking_distance(v: float, a_max: float) -> float:
    return v * v / (2.0 * a_max)


def time_to_reach(distance: float, v: float, v_max: float, a_max: float) -> float:
    """Time to cover `distance` from speed v, accelerating at a_max up to v_max."""
    if distance <= 0.0:
        return 0.0
    d_acc = (v_max * v_max - v * v) / (2.0 * a_max)
    if d_acc >= distance:
        return (-v + math.sqrt(v * v + 2.0 * a_max * distance)) / a_max
    return (v_max - v) / a_max + (distance - d_acc) / v_max


def advance_along(s: float, v: float, dt: float, s_stop: float, v_max: float, a_max: float) -> tuple[float, float]:
    """
    One tracker tick along the path. Picks the highest speed reachable within
    ±a_max·dt that still allows a stop at s_stop; when no such speed exists
    the robot brakes at a_max and overshoots.
    """
    v_lo = max(0.0, v - a_max * dt)
    v_hi = min(v_max, v + a_max * dt)

    beta = dt / 2.0
    gamma = v * dt / 2.0 - (s_stop - s)
    disc = beta * beta - 2.0 * gamma / a_max
    v_stop = a_max * (-beta + math.sqrt(disc)) if disc >= 0.0 else -math.inf

    v_new = max(v_lo, min(v_hi, v_stop))
    if v_lo == 0.0 and v_new < _REST_EPS:
        v_new = 0.0
    if v_new == 0.0 and v < a_max * dt:
        moved = braking_distance(v, a_max)  # comes to rest inside the tick
    else:
        moved = (v + v_new) * beta
    return s + moved, v_new
