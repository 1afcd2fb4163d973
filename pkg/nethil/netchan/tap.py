import csv
import logging
from dataclasses import dataclass, astuple
from pathlib import Path
from typing import Optional, TextIO, Union

from nethil.config.constants import TapDirection, UNKNOWN_MSG_TYPE

logger = logging.getLogger(__name__)

TAP_HEADER = ["endpoint", "direction", "msg_type", "robot_id", "seq", "t_ns"]


class TapFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TapRecord:
    endpoint_id: str
    direction: TapDirection
    msg_type: Union[int, str]  # MessageType value or "unknown"
    robot_id: int
    seq: int
    t_ns: int

    def key(self) -> tuple:
        return (self.endpoint_id, self.direction, self.msg_type, self.robot_id, self.seq)


class TapSink:
    """
    Append-only CSV writer for tap records. A sink opened without a path
    keeps records in memory only.
    """

    def __init__(self, path: Optional[Path] = None, keep: bool = False):
        self.path = Path(path) if path else None
        self.records: list[TapRecord] = []
        self._keep = keep or self.path is None
        self._fh: Optional[TextIO] = None
        self._writer = None
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "w", encoding="utf-8", newline="")
            self._writer = csv.writer(self._fh, lineterminator="\n")
            self._writer.writerow(TAP_HEADER)

    def append(self, record: TapRecord) -> None:
        if self._keep:
            self.records.append(record)
        if self._writer is not None:
            row = list(astuple(record))
            row[1] = record.direction.value
            if not isinstance(record.msg_type, str):
                row[2] = int(record.msg_type)
            self._writer.writerow(row)

    def flush(self) -> None:
        if self._fh:
            self._fh.flush()

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None
            self._writer = None

    def __enter__(self) -> "TapSink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def tap_append(sink: TapSink, record: TapRecord) -> None:
    sink.append(record)


def load_tap(path: Union[str, Path]) -> list[TapRecord]:
    path = Path(path)
    records: list[TapRecord] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1:
                if row and row != TAP_HEADER:
                    raise TapFormatError(f"{path}:1: unexpected header {row}")
                continue
            if not row:
                continue
            records.append(_parse_row(path, line_no, row))
    return records


def _parse_row(path: Path, line_no: int, row: list[str]) -> TapRecord:
    if len(row) != len(TAP_HEADER):
        raise TapFormatError(f"{path}:{line_no}: expected {len(TAP_HEADER)} fields, got {len(row)}")
    endpoint, direction, msg_type, robot_id, seq, t_ns = row
    try:
        return TapRecord(
            endpoint_id=endpoint,
            direction=TapDirection(direction),
            msg_type=msg_type if msg_type == UNKNOWN_MSG_TYPE else int(msg_type),
            robot_id=int(robot_id),
            seq=int(seq),
            t_ns=int(t_ns),
        )
    except ValueError as e:
        raise TapFormatError(f"{path}:{line_no}: {e}") from e
