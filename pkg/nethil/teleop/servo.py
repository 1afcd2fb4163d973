import numpy as np


def robot_joint_step(q_current, q_target, dt: float, qdot_max: float) -> np.ndarray:
    """Move every joint toward its target by at most qdot_max·dt; never overshoots."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    q = np.asarray(q_current, dtype=float)
    target = np.asarray(q_target, dtype=float)
    limit = qdot_max * dt
    error = target - q
    # within reach the target is taken as is, so repeated steps land on it exactly
    return np.where(np.abs(error) <= limit, target, q + np.clip(error, -limit, limit))
