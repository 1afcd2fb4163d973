import time
import logging

logger = logging.getLogger(__name__)


class VirtualClock:
    """
    Simulated nanosecond timeline. Time moves only when the run loop says so,
    so emulated runs are reproducible bit-for-bit.
    """

    def __init__(self, start_ns: int = 0):
        self._now_ns = start_ns

    def now_ns(self) -> int:
        return self._now_ns

    def wait_until(self, t_ns: int) -> None:
        if t_ns > self._now_ns:
            self._now_ns = t_ns


class WallClock:
    """Paces a run against the host's monotonic clock, origin at construction."""

    def __init__(self):
        self._origin = time.monotonic_ns()

    def now_ns(self) -> int:
        return time.monotonic_ns() - self._origin

    def wait_until(self, t_ns: int) -> None:
        remaining = t_ns - self.now_ns()
        if remaining > 0:
            time.sleep(remaining / 1e9)
        elif remaining < -50_000_000:
            logger.debug(f"Run loop is {-remaining / 1e6:.1f} ms behind schedule")
