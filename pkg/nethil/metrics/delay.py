import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import numpy as np

from nethil.config.constants import TapDirection
from nethil.metrics.rates import MetricsError
from nethil.netchan.tap import TapRecord


@dataclass(frozen=True)
class DelayStats:
    matched: int
    lost: int
    mean_ns: Optional[float]
    p95_ns: Optional[int]
    max_ns: Optional[int]
    clock_synchronized: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render(self) -> str:
        lines = [f"matched: {self.matched}", f"lost:    {self.lost}"]
        if self.matched:
            lines += [
                f"mean:    {self.mean_ns / 1e6:.6f} ms",
                f"p95:     {self.p95_ns / 1e6:.6f} ms",
                f"max:     {self.max_ns / 1e6:.6f} ms",
            ]
        if not self.clock_synchronized:
            lines.append("note:    endpoints do not share a clock; one-way delays are UNSYNCHRONIZED")
        return "\n".join(lines) + "\n"


def _index(records: Iterable[TapRecord], side: str) -> dict[tuple, int]:
    out: dict[tuple, int] = {}
    for rec in records:
        key = (str(rec.msg_type), rec.robot_id, rec.seq)
        if key in out:
            raise MetricsError(f"duplicate {side} tap key {key}")
        out[key] = rec.t_ns
    return out


def filter_records(
    records: Iterable[TapRecord],
    endpoint: Optional[str] = None,
    direction: Optional[TapDirection] = None,
) -> list[TapRecord]:
    return [
        r for r in records
        if (endpoint is None or r.endpoint_id == endpoint) and (direction is None or r.direction == direction)
    ]


def nearest_rank(sorted_values: np.ndarray, pct: float) -> int:
    rank = max(1, math.ceil(pct / 100.0 * len(sorted_values)))
    return int(sorted_values[rank - 1])


def one_way_delay_stats(
    send_tap: Iterable[TapRecord],
    recv_tap: Iterable[TapRecord],
    clock_synchronized: bool = True,
) -> DelayStats:
    """Match send and recv records on (msg_type, robot_id, seq) and summarize latency."""
    sends = _index(send_tap, "send")
    recvs = _index(recv_tap, "recv")

    latencies = np.array(
        sorted(recvs[key] - t for key, t in sends.items() if key in recvs), dtype=np.int64
    )
    matched = int(latencies.size)
    lost = len(sends) - matched
    if matched == 0:
        return DelayStats(0, lost, None, None, None, clock_synchronized)
    return DelayStats(
        matched=matched,
        lost=lost,
        mean_ns=float(latencies.mean()),
        p95_ns=nearest_rank(latencies, 95),
        max_ns=int(latencies[-1]),
        clock_synchronized=clock_synchronized,
    )
