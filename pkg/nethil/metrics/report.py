import json
from dataclasses import asdict, dataclass
from typing import Optional

from nethil.config.constants import PROFILE_ORDER
from nethil.metrics.rates import collision_rate, format_scaled, mlr

STATIC_METHOD = "static"

_COORD_COLUMNS = ["case", "method", "plr", "delay_ms", "runs", "cs_total", "collisions", "p_collision_x1e-3"]
_TELEOP_COLUMNS = ["case", "method", "plr", "delay_ms", "runs", "n_s", "n_a", "mlr", "dropouts"]


@dataclass(frozen=True)
class ReportRow:
    case: str
    method: str
    plr: float
    delay_ms: float
    runs: int = 1
    failed_runs: int = 0
    # coordination
    cs_total: Optional[int] = None
    collisions: Optional[int] = None
    # teleoperation
    n_s: Optional[int] = None
    n_a: Optional[int] = None
    dropouts: Optional[int] = None

    @property
    def is_teleop(self) -> bool:
        return self.n_s is not None

    def p_collision_text(self) -> str:
        if not self.cs_total:
            return "n/a"
        return format_scaled(collision_rate(self.collisions, self.cs_total), scale=1000, digits=6)

    def mlr_text(self) -> str:
        if not self.n_s:
            return "n/a"
        return format_scaled(mlr(self.n_s, self.n_a), scale=1, digits=6)

    def cells(self) -> list[str]:
        head = [self.case, self.method, f"{self.plr:g}", f"{self.delay_ms:g}", f"{self.runs}"]
        if self.failed_runs:
            head[4] += f" ({self.failed_runs} failed)"
        if self.is_teleop:
            return head + [str(self.n_s), str(self.n_a), self.mlr_text(), str(self.dropouts or 0)]
        return head + [str(self.cs_total), str(self.collisions), self.p_collision_text()]


def _method_rank(method: str) -> tuple[int, str]:
    if method == STATIC_METHOD:
        return 0, method
    if method in PROFILE_ORDER:
        return 1 + PROFILE_ORDER.index(method), method
    return 1 + len(PROFILE_ORDER), method


def sort_rows(rows: list[ReportRow]) -> list[ReportRow]:
    return sorted(rows, key=lambda r: (r.case, _method_rank(r.method), r.plr, r.delay_ms))


def _table(columns: list[str], rows: list[list[str]]) -> str:
    widths = [len(c) for c in columns]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_report(rows: list[ReportRow]) -> tuple[str, dict]:
    """Aligned text table(s) plus the JSON-ready document, both deterministic."""
    ordered = sort_rows(rows)
    coord = [r for r in ordered if not r.is_teleop]
    teleop = [r for r in ordered if r.is_teleop]

    parts = []
    if coord or not teleop:
        parts.append(_table(_COORD_COLUMNS, [r.cells() for r in coord]))
    if teleop:
        parts.append(_table(_TELEOP_COLUMNS, [r.cells() for r in teleop]))
    text = "\n".join(parts)

    doc = {
        "rows": [
            {
                **{k: v for k, v in asdict(r).items() if v is not None},
                **({"mlr": r.mlr_text()} if r.is_teleop else {"p_collision_x1e-3": r.p_collision_text()}),
            }
            for r in ordered
        ]
    }
    return text, doc


def rows_from_document(doc: dict) -> list[ReportRow]:
    fields = set(ReportRow.__dataclass_fields__)
    return [ReportRow(**{k: v for k, v in row.items() if k in fields}) for row in doc.get("rows", [])]


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
