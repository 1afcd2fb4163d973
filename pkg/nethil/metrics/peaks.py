import numpy as np
from scipy.ndimage import maximum_filter1d


def peak_indices(series, threshold_fraction: float = 0.5, half_window: int = 1) -> np.ndarray:
    """
    Samples that are the maximum of [i - w, i + w], are the earliest sample in
    that window holding that value, and rise above
    min + threshold_fraction·(max - min).
    """
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        return np.array([], dtype=int)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return np.array([], dtype=int)

    w = max(1, int(half_window))
    window_max = maximum_filter1d(x, size=2 * w + 1, mode="nearest")
    candidates = np.flatnonzero((x == window_max) & (x > lo + threshold_fraction * (hi - lo)))

    keep = []
    for i in candidates:
        start = max(0, i - w)
        # plateaus count once, at their first sample
        if not np.any(x[start:i] == x[i]):
            keep.append(i)
    return np.array(keep, dtype=int)


def count_motion_loops(
    series,
    threshold_fraction: float = 0.5,
    min_separation_s: float = 0.0,
    rate_hz: float = 1.0,
) -> int:
    """
    Loop count as the number of peaks. min_separation_s is converted into a
    half-window of samples at rate_hz; zero means adjacent-sample maxima.
    """
    half_window = int(round(min_separation_s * rate_hz))
    return int(len(peak_indices(series, threshold_fraction, half_window)))
