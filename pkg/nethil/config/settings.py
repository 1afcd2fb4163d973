from pathlib import Path

from pydantic_settings import BaseSettings

_ROOT = Path(__file__).resolve().parents[2]


class Settings(BaseSettings):
    # App
    APP_NAME: str = "nethil"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # Data / output
    PROFILES_DIR: Path = _ROOT / "profiles"
    SCENARIOS_DIR: Path = _ROOT / "scenarios"
    OUTPUT_DIR: Path = Path("runs")

    # Coordination
    CONTROL_PERIOD_MS: int = 100
    TRACKER_PERIOD_MS: int = 10
    DEFAULT_MIN_CS: int = 10000
    PROGRESS_TIMEOUT_S: float = 600.0  # virtual seconds without a new CS

    # Teleoperation
    TELEOP_RATE_HZ: int = 125
    TELEOP_LOOP_PERIOD_S: float = 4.033
    TELEOP_LOOPS: int = 890
    WATCHDOG_TIMEOUT_MS: int = 500
    RECONNECT_DELAY_MS: int = 1000

    # Agents / proxy
    PROXY_RECV_BUFFER: int = 65535

    class Config:
        env_file = ".env"
        env_prefix = "NETHIL_"


settings = Settings()
