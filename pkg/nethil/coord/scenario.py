import math
import logging
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from nethil.config.constants import FLEET_PRESETS, FLEET_SIZE
from nethil.config.settings import settings
from nethil.coord.envelope import RobotSpec, sweep_envelope
from nethil.coord.geometry import point_rect_distance, rect_hits_box
from nethil.coord.path import PathError, PathGeom, arc_length_parameterize

logger = logging.getLogger(__name__)


class ScenarioError(ValueError):
    pass


class RouteError(ScenarioError):
    """A route leaves the map or sweeps through an obstacle."""


class Bounds(BaseModel):
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @model_validator(mode="after")
    def _ordered(self) -> "Bounds":
        if self.x_min >= self.x_max or self.y_min >= self.y_max:
            raise ValueError("bounds must satisfy x_min < x_max and y_min < y_max")
        return self

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


class Obstacle(Bounds):
    name: str = ""


class Location(BaseModel):
    name: str
    x: float
    y: float
    heading_deg: float = 0.0

    @property
    def heading(self) -> float:
        return math.radians(self.heading_deg)


class PathSpec(BaseModel):
    from_: str = Field(alias="from")
    to: str
    via: list[tuple[float, float]] = Field(default_factory=list)

    model_config = {"populate_by_name": True}


class RobotParams(BaseModel):
    length_m: float = Field(gt=0)
    width_m: float = Field(gt=0)
    v_max: float = Field(gt=0)
    a_max: float = Field(gt=0)


class Scenario(BaseModel):
    name: str
    preset: Optional[Literal["harbor", "warehouse"]] = None
    robot: Optional[RobotParams] = None
    fleet_size: int = Field(FLEET_SIZE, ge=1)
    bounds: Bounds
    obstacles: list[Obstacle] = Field(default_factory=list)
    locations: list[Location]
    paths: list[PathSpec] = Field(default_factory=list)
    ds: Optional[float] = Field(None, gt=0)
    safety_margin_m: float = Field(1.0, ge=0)
    control_period_ms: int = Field(settings.CONTROL_PERIOD_MS, gt=0)
    tracker_period_ms: int = Field(settings.TRACKER_PERIOD_MS, gt=0)
    progress_timeout_s: float = Field(settings.PROGRESS_TIMEOUT_S, gt=0)
    deadlock_recovery: bool = True
    revocable: bool = False

    @model_validator(mode="after")
    def _check(self) -> "Scenario":
        if self.robot is None and self.preset is None:
            raise ValueError("either 'preset' or 'robot' must be given")
        names = [loc.name for loc in self.locations]
        if len(set(names)) != len(names):
            raise ValueError("location names must be unique")
        if len(self.locations) <= self.fleet_size:
            raise ValueError(f"need more than {self.fleet_size} locations for {self.fleet_size} robots")
        for i, p in enumerate(self.paths):
            for end in (p.from_, p.to):
                if end not in names:
                    raise ValueError(f"paths.{i}: unknown location {end!r}")
        if self.control_period_ms % self.tracker_period_ms:
            raise ValueError("control_period_ms must be a multiple of tracker_period_ms")
        return self

    @property
    def robot_params(self) -> RobotParams:
        if self.robot is not None:
            return self.robot
        preset = FLEET_PRESETS[self.preset]
        return RobotParams(**{k: preset[k] for k in ("length_m", "width_m", "v_max", "a_max")})

    @property
    def sample_spacing(self) -> float:
        if self.ds is not None:
            return self.ds
        if self.preset is not None:
            return FLEET_PRESETS[self.preset]["ds"]
        return 0.5

    @property
    def safety_margin_indices(self) -> int:
        return int(math.ceil(self.safety_margin_m / self.sample_spacing - 1e-9))

    def robot_specs(self) -> list[RobotSpec]:
        p = self.robot_params
        return [RobotSpec(i, p.length_m, p.width_m, p.v_max, p.a_max) for i in range(self.fleet_size)]

    def location(self, name: str) -> Location:
        for loc in self.locations:
            if loc.name == name:
                return loc
        raise ScenarioError(f"Unknown location {name!r}")

    def route(self, start: str, goal: str) -> PathGeom:
        """
        Waypoint path between two locations: an authored path if one exists
        (either direction), else the straight segment.
        """
        a, b = self.location(start), self.location(goal)
        via: list[tuple[float, float]] = []
        for p in self.paths:
            if p.from_ == start and p.to == goal:
                via = list(p.via)
                break
            if p.from_ == goal and p.to == start:
                via = list(reversed(p.via))
        try:
            return arc_length_parameterize([(a.x, a.y), *via, (b.x, b.y)])
        except PathError as e:
            raise ScenarioError(f"Route {start} -> {goal}: {e}") from e

    def parked(self, name: str) -> PathGeom:
        loc = self.location(name)
        return arc_length_parameterize([(loc.x, loc.y)], heading=loc.heading)


def validate_routes(scenario: Scenario) -> None:
    """
    Every route between distinct locations must stay in bounds and clear of
    obstacles, and keep a robot parked at any third location (in any heading)
    out of its swept envelope.
    """
    spec = scenario.robot_specs()[0]
    reach = spec.footprint(0.0, 0.0, 0.0).radius
    names = [loc.name for loc in scenario.locations]
    for loc in scenario.locations:
        if not scenario.bounds.contains(loc.x, loc.y):
            raise RouteError(f"Location {loc.name} lies outside the map bounds")
    for start in names:
        for goal in names:
            if start == goal:
                continue
            path = scenario.route(start, goal)
            for x, y in path.waypoints:
                if not scenario.bounds.contains(float(x), float(y)):
                    raise RouteError(f"Route {start} -> {goal} leaves the map at ({x:g}, {y:g})")
            env = sweep_envelope(path, spec, scenario.sample_spacing)
            for obs in scenario.obstacles:
                for i in range(len(env)):
                    if rect_hits_box(env.rect(i), obs.x_min, obs.y_min, obs.x_max, obs.y_max):
                        raise RouteError(
                            f"Route {start} -> {goal} sweeps through obstacle {obs.name or '?'}"
                        )
            for loc in scenario.locations:
                if loc.name in (start, goal):
                    continue
                gap = point_rect_distance(loc.x, loc.y, env.centers, env.angles, env.half_length, env.half_width)
                if float(gap.min()) <= reach:
                    raise RouteError(
                        f"Route {start} -> {goal} passes within {float(gap.min()):.2f} m of location "
                        f"{loc.name}; a robot parked there needs {reach:.2f} m"
                    )


def load_scenario(ref: str | Path) -> Scenario:
    """Load by path or bundled name (scenarios/<name>.yaml) and check every route."""
    path = Path(ref)
    if not path.exists():
        path = Path(settings.SCENARIOS_DIR) / f"{ref}.yaml"
    if not path.exists():
        raise ScenarioError(f"Unknown scenario: {ref}")

    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ScenarioError(f"Scenario {path} is not valid YAML: {e}") from e
    data.setdefault("name", path.stem)

    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ScenarioError(f"Scenario {path}: {details}") from e

    validate_routes(scenario)
    logger.info(
        f"Loaded scenario {scenario.name}: {scenario.fleet_size} robots, "
        f"{len(scenario.locations)} locations, ds={scenario.sample_spacing} m"
    )
    return scenario
