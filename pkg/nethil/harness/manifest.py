import json
import hashlib
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from nethil.config.settings import settings

logger = logging.getLogger(__name__)


def file_sha256(path: Optional[Path]) -> Optional[str]:
    if path is None or not Path(path).exists():
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    seeds: list[int]
    scenario: Optional[str] = None
    scenario_sha256: Optional[str] = None
    profiles: dict[str, Optional[str]] = field(default_factory=dict)  # name -> sha256 (None for built-in cells)
    parameters: dict[str, Any] = field(default_factory=dict)
    tool: str = f"{settings.APP_NAME} {settings.APP_VERSION}"
    started_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    wall_s: Optional[float] = None

    def write(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.debug(f"Manifest written to {path}")
        return path
