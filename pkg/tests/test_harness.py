import json

import pytest
from pydantic import ValidationError

from nethil.config.settings import settings
from nethil.harness.grid import GridSpec, aggregate_grid, cell_label, grid_jobs, run_grid
from nethil.harness.loader import profile_with_source, resolve_file, scenario_with_source
from nethil.harness.manifest import RunManifest, file_sha256
from nethil.harness.suite import run_teleop_suite
from nethil.netchan.profile import load_profile
from nethil.teleop.motion import MotionProfile, TeleopConfig


def test_cell_labels():
    assert cell_label(0.1, 50.0) == "plr0.1_delay50ms"
    assert cell_label(0.0, 0.0) == "plr0_delay0ms"


def test_default_grid_is_the_eight_cell_sweep():
    grid = GridSpec()
    assert len(grid.cells) == 8
    assert grid.seeds == [1, 2, 3, 4, 5]


@pytest.mark.parametrize("kwargs", [{"cells": []}, {"seeds": []}, {"cells": [(1.5, 0.0)]}, {"cells": [(0.1, -1.0)]}])
def test_invalid_grids(kwargs):
    with pytest.raises(ValidationError):
        GridSpec(**kwargs)


def test_jobs_cover_every_cell_and_seed():
    ideal = load_profile("ideal")
    grid = GridSpec.from_lists([0.0, 0.1], [0.0, 10.0], profiles=["ideal"], seeds=[1, 2])
    jobs = grid_jobs(grid, {"ideal": ideal})
    assert len(jobs) == 10
    assert [j.seed for j in jobs[:2]] == [1, 2]
    assert jobs[2].label == "plr0_delay10ms"
    assert jobs[2].profile.delay_ns == 10_000_000
    assert (jobs[-1].label, jobs[-1].method, jobs[-1].profile) == ("ideal", "ideal", ideal)


def test_aggregate_sums_runs_per_cell():
    grid = GridSpec(cells=[(0.1, 10.0)], seeds=[1, 2, 3])
    jobs = grid_jobs(grid, {})
    outcomes = [
        {"ok": True, "stats": {"cs_total": 1000, "collision_count": 2}},
        {"ok": False, "error": "NonProgressError: stuck"},
        {"ok": True, "stats": {"cs_total": 1004, "collision_count": 1}},
    ]
    result = aggregate_grid("harbor", jobs, outcomes)
    (row,) = result.rows
    assert (row.runs, row.failed_runs, row.cs_total, row.collisions) == (3, 1, 2004, 3)
    assert result.failures == ["plr0.1_delay10ms/2: NonProgressError: stuck"]
    assert not result.ok


def test_small_grid_run(cross_scenario, tmp_path):
    grid = GridSpec(cells=[(0.0, 0.0)], seeds=[1, 2], min_cs=10)
    result = run_grid(cross_scenario, grid, tmp_path)
    assert result.ok
    (row,) = result.rows
    assert row.runs == 2
    assert row.cs_total >= 20
    assert row.collisions == 0

    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["failures"] == []
    assert doc["rows"][0]["p_collision_x1e-3"] == "0.000000"
    assert (tmp_path / "report.txt").read_text() == result.text
    assert (tmp_path / "runs" / "plr0_delay0ms" / "2" / "stats.json").exists()

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "grid"
    assert manifest["parameters"]["min_cs"] == 10
    assert manifest["wall_s"] is not None


def test_teleop_suite_is_seed_stable_on_a_clean_channel(tmp_path):
    result = run_teleop_suite(
        [load_profile("ideal")], MotionProfile(loops=4), TeleopConfig(), [1, 2], tmp_path,
    )
    (row,) = result.rows
    assert (row.n_s, row.n_a, row.runs) == (8, 8, 2)
    assert row.mlr_text() == "0.000000"
    assert (tmp_path / "runs" / "ideal" / "1" / "measured.csv").exists()
    assert "ideal" in (tmp_path / "report.txt").read_text()


def test_manifest_records_tool_and_hashes(tmp_path):
    profile, src = profile_with_source("wifi6-long")
    manifest = RunManifest(command="coord", seeds=[3], profiles={profile.name: file_sha256(src)})
    path = manifest.write(tmp_path / "out")
    doc = json.loads(path.read_text())
    assert doc["tool"] == f"{settings.APP_NAME} {settings.APP_VERSION}"
    assert len(doc["profiles"]["wifi6-long"]) == 64
    assert doc["seeds"] == [3]


def test_missing_files_hash_to_none(tmp_path):
    assert file_sha256(None) is None
    assert file_sha256(tmp_path / "nope.yaml") is None


def test_references_resolve_to_bundled_files(tmp_path):
    scenario, src = scenario_with_source("warehouse")
    assert scenario.name == "warehouse"
    assert src == settings.SCENARIOS_DIR / "warehouse.yaml"
    local = tmp_path / "p.yaml"
    local.write_text("name: p\n")
    assert resolve_file(local, settings.PROFILES_DIR) == local
