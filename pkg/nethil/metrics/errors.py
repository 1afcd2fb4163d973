from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class JointErrorSeries:
    seqs: np.ndarray      # matched seqs, ascending
    errors: np.ndarray    # (len(seqs), joints): measured - desired
    lost_seqs: np.ndarray
    mean_abs: float
    max_abs: float


def joint_error_series(
    desired: Mapping[int, Sequence[float]],
    measured: Mapping[int, Sequence[float]],
) -> JointErrorSeries:
    """Per-seq joint error; desired seqs with no measurement are reported as lost."""
    matched = sorted(seq for seq in desired if seq in measured)
    lost = sorted(seq for seq in desired if seq not in measured)

    if matched:
        des = np.array([desired[s] for s in matched], dtype=float)
        mea = np.array([measured[s] for s in matched], dtype=float)
        errors = mea - des
        abs_err = np.abs(errors)
        mean_abs, max_abs = float(abs_err.mean()), float(abs_err.max())
    else:
        width = len(next(iter(desired.values()))) if desired else 0
        errors = np.zeros((0, width))
        mean_abs = max_abs = 0.0

    return JointErrorSeries(
        seqs=np.array(matched, dtype=np.int64),
        errors=errors,
        lost_seqs=np.array(lost, dtype=np.int64),
        mean_abs=mean_abs,
        max_abs=max_abs,
    )
