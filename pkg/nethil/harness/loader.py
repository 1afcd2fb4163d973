from pathlib import Path

from nethil.config.settings import settings
from nethil.coord.scenario import Scenario, load_scenario
from nethil.netchan.profile import ChannelProfile, load_profile


def resolve_file(ref: str | Path, directory: Path) -> Path:
    """The file a profile/scenario reference points at, for hashing."""
    path = Path(ref)
    if path.exists():
        return path
    return Path(directory) / f"{ref}.yaml"


def scenario_with_source(ref: str | Path) -> tuple[Scenario, Path]:
    return load_scenario(ref), resolve_file(ref, settings.SCENARIOS_DIR)


def profile_with_source(ref: str | Path) -> tuple[ChannelProfile, Path]:
    return load_profile(ref), resolve_file(ref, settings.PROFILES_DIR)
