import time
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from nethil.config.constants import DEFAULT_ENSEMBLE_SEEDS, DEFAULT_GRID_DELAY_MS, DEFAULT_GRID_PLR
from nethil.config.settings import settings
from nethil.coord.scenario import Scenario
from nethil.coord.simulation import run_coordination
from nethil.harness.manifest import RunManifest, file_sha256
from nethil.metrics.report import STATIC_METHOD, ReportRow, dump_document, render_report
from nethil.netchan.profile import ChannelProfile

logger = logging.getLogger(__name__)


class GridSpec(BaseModel):
    cells: list[tuple[float, float]] = Field(
        default_factory=lambda: [(p, d) for p in DEFAULT_GRID_PLR for d in DEFAULT_GRID_DELAY_MS]
    )
    profiles: list[str] = Field(default_factory=list)  # channel-profile rows next to the static cells
    seeds: list[int] = Field(default_factory=lambda: list(DEFAULT_ENSEMBLE_SEEDS))
    min_cs: int = Field(settings.DEFAULT_MIN_CS, ge=1)

    @model_validator(mode="after")
    def _nonempty(self) -> "GridSpec":
        if not self.cells and not self.profiles:
            raise ValueError("a grid needs at least one cell or profile")
        if not self.seeds:
            raise ValueError("a grid needs at least one seed")
        for plr, delay in self.cells:
            if not 0.0 <= plr <= 1.0 or delay < 0:
                raise ValueError(f"invalid cell (plr={plr}, delay_ms={delay})")
        return self

    @classmethod
    def from_lists(cls, plrs: list[float], delays: list[float], **kwargs) -> "GridSpec":
        return cls(cells=[(p, d) for p in plrs for d in delays], **kwargs)


@dataclass
class GridJob:
    label: str
    method: str
    plr: float
    delay_ms: float
    profile: ChannelProfile
    seed: int


@dataclass
class GridResult:
    rows: list[ReportRow]
    failures: list[str] = field(default_factory=list)
    text: str = ""

    @property
    def ok(self) -> bool:
        return not self.failures


def cell_label(plr: float, delay_ms: float) -> str:
    return f"plr{plr:g}_delay{delay_ms:g}ms"


def grid_jobs(grid: GridSpec, named_profiles: dict[str, ChannelProfile]) -> list[GridJob]:
    jobs = []
    for plr, delay in grid.cells:
        profile = ChannelProfile.static(plr, delay)
        for seed in grid.seeds:
            jobs.append(GridJob(cell_label(plr, delay), STATIC_METHOD, plr, delay, profile, seed))
    for name in grid.profiles:
        profile = named_profiles[name]
        for seed in grid.seeds:
            jobs.append(GridJob(
                name, name, profile.mean_loss(), profile.mean_delay_ms(), profile, seed,
            ))
    return jobs


def _run_job(scenario: Scenario, job: GridJob, min_cs: int, run_dir: Path, trace_poses: bool) -> dict:
    try:
        run = run_coordination(scenario, job.profile, job.seed, min_cs, out_dir=run_dir, trace_poses=trace_poses)
        return {"ok": True, "stats": asdict(run.stats)}
    except Exception as e:
        logger.error(f"Run {job.label}/seed {job.seed} failed: {e}")
        return {"ok": False, "error": f"{type(e).__name__}: {e}"}


def run_grid(
    scenario: Scenario,
    grid: GridSpec,
    out_dir: Path,
    named_profiles: Optional[dict[str, ChannelProfile]] = None,
    scenario_source: Optional[Path] = None,
    profile_sources: Optional[dict[str, Path]] = None,
    workers: int = 1,
    trace_poses: bool = False,
) -> GridResult:
    """One coordination run per (cell, seed); collisions and CS are summed per cell."""
    named_profiles = named_profiles or {}
    profile_sources = profile_sources or {}
    jobs = grid_jobs(grid, named_profiles)

    manifest = RunManifest(
        command="grid",
        seeds=list(grid.seeds),
        scenario=scenario.name,
        scenario_sha256=file_sha256(scenario_source),
        profiles={name: file_sha256(profile_sources.get(name)) for name in grid.profiles},
        parameters={
            "cells": [list(c) for c in grid.cells],
            "min_cs": grid.min_cs,
            "control_period_ms": scenario.control_period_ms,
            "tracker_period_ms": scenario.tracker_period_ms,
            "ds": scenario.sample_spacing,
            "safety_margin_indices": scenario.safety_margin_indices,
            "workers": workers,
        },
    )
    manifest.write(out_dir)
    started = time.monotonic()
    logger.info(f"Grid: {len(jobs)} runs over {len(grid.cells) + len(grid.profiles)} cells, workers={workers}")

    run_dirs = [out_dir / "runs" / job.label / str(job.seed) for job in jobs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_job, scenario, job, grid.min_cs, run_dir, trace_poses)
                for job, run_dir in zip(jobs, run_dirs)
            ]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [
            _run_job(scenario, job, grid.min_cs, run_dir, trace_poses)
            for job, run_dir in zip(jobs, run_dirs)
        ]

    result = aggregate_grid(scenario.name, jobs, outcomes)
    text, doc = render_report(result.rows)
    doc["failures"] = result.failures
    (out_dir / "report.json").write_text(dump_document(doc), encoding="utf-8")
    (out_dir / "report.txt").write_text(text, encoding="utf-8")
    result.text = text

    manifest.wall_s = round(time.monotonic() - started, 3)
    manifest.write(out_dir)
    return result


def aggregate_grid(case: str, jobs: list[GridJob], outcomes: list[dict]) -> GridResult:
    cells: dict[str, dict] = {}
    failures = []
    for job, outcome in zip(jobs, outcomes):
        cell = cells.setdefault(job.label, {
            "method": job.method, "plr": job.plr, "delay_ms": job.delay_ms,
            "runs": 0, "failed": 0, "cs_total": 0, "collisions": 0,
        })
        cell["runs"] += 1
        if not outcome["ok"]:
            cell["failed"] += 1
            failures.append(f"{job.label}/{job.seed}: {outcome['error']}")
            continue
        cell["cs_total"] += outcome["stats"]["cs_total"]
        cell["collisions"] += outcome["stats"]["collision_count"]

    rows = [
        ReportRow(
            case=case, method=c["method"], plr=c["plr"], delay_ms=c["delay_ms"],
            runs=c["runs"], failed_runs=c["failed"], cs_total=c["cs_total"], collisions=c["collisions"],
        )
        for c in cells.values()
    ]
    return GridResult(rows=rows, failures=failures)
