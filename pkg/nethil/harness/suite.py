import time
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from nethil.harness.manifest import RunManifest, file_sha256
from nethil.metrics.report import ReportRow, dump_document, render_report
from nethil.netchan.profile import ChannelProfile
from nethil.teleop.motion import MotionProfile, TeleopConfig
from nethil.teleop.simulation import run_teleop

logger = logging.getLogger(__name__)

TELEOP_CASE = "teleop"


@dataclass
class SuiteResult:
    rows: list[ReportRow]
    failures: list[str] = field(default_factory=list)
    text: str = ""

    @property
    def ok(self) -> bool:
        return not self.failures


def run_teleop_suite(
    profiles: list[ChannelProfile],
    motion: MotionProfile,
    config: TeleopConfig,
    seeds: list[int],
    out_dir: Path,
    profile_sources: Optional[dict[str, Path]] = None,
    tap: bool = False,
) -> SuiteResult:
    """One teleoperation run per (profile, seed), reported ideal -> ethernet-lab -> wifi6-*."""
    profile_sources = profile_sources or {}
    manifest = RunManifest(
        command="teleop",
        seeds=list(seeds),
        profiles={p.name: file_sha256(profile_sources.get(p.name)) for p in profiles},
        parameters={"motion": motion.model_dump(), "config": config.model_dump()},
    )
    manifest.write(out_dir)
    started = time.monotonic()

    rows, failures = [], []
    for profile in profiles:
        n_s = n_a = dropouts = runs = failed = 0
        for seed in seeds:
            runs += 1
            run_dir = out_dir / "runs" / profile.name / str(seed)
            try:
                run = run_teleop(
                    motion, profile, config, seed, out_dir=run_dir,
                    tap_path=run_dir / "tap.csv" if tap else None,
                )
            except Exception as e:
                logger.error(f"Teleop run {profile.name}/seed {seed} failed: {e}")
                failures.append(f"{profile.name}/{seed}: {type(e).__name__}: {e}")
                failed += 1
                continue
            n_s += run.stats.n_s
            n_a += run.stats.n_a
            dropouts += run.stats.dropout_episodes

        rows.append(ReportRow(
            case=TELEOP_CASE,
            method=profile.name,
            plr=profile.mean_loss(),
            delay_ms=profile.mean_delay_ms(),
            runs=runs,
            failed_runs=failed,
            n_s=n_s,
            n_a=n_a,
            dropouts=dropouts,
        ))

    text, doc = render_report(rows)
    doc["failures"] = failures
    (out_dir / "report.json").write_text(dump_document(doc), encoding="utf-8")
    (out_dir / "report.txt").write_text(text, encoding="utf-8")

    manifest.wall_s = round(time.monotonic() - started, 3)
    manifest.write(out_dir)
    return SuiteResult(rows=rows, failures=failures, text=text)
