import logging
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from nethil.config.constants import Direction, LinkMode, NS_PER_MS
from nethil.config.settings import settings

logger = logging.getLogger(__name__)


class ProfileError(ValueError):
    """Raised when a channel profile cannot be resolved or is invalid."""


class JitterModel(BaseModel):
    kind: Literal["none", "uniform", "exponential"] = "none"
    half_width_ns: int = Field(0, ge=0)
    mean_ns: int = Field(0, ge=0)

    def mean_ns_value(self) -> float:
        # uniform jitter is symmetric, so only the exponential model shifts the mean
        return float(self.mean_ns) if self.kind == "exponential" else 0.0


class LossModel(BaseModel):
    kind: Literal["bernoulli", "gilbert_elliott"] = "bernoulli"
    p: float = Field(0.0, ge=0.0, le=1.0)
    p_good_to_bad: float = Field(0.0, ge=0.0, le=1.0)
    p_bad_to_good: float = Field(1.0, ge=0.0, le=1.0)
    loss_in_good: float = Field(0.0, ge=0.0, le=1.0)
    loss_in_bad: float = Field(1.0, ge=0.0, le=1.0)

    def stationary_bad(self) -> float:
        """Long-run probability of the Bad state of the two-state chain."""
        total = self.p_good_to_bad + self.p_bad_to_good
        if total == 0.0:
            return 0.0  # chain never leaves its initial Good state
        return self.p_good_to_bad / total

    def mean_loss(self) -> float:
        if self.kind == "bernoulli":
            return self.p
        pi_bad = self.stationary_bad()
        return pi_bad * self.loss_in_bad + (1.0 - pi_bad) * self.loss_in_good


class DirectionSettings(BaseModel):
    delay_ns: int = Field(0, ge=0)
    jitter: JitterModel = Field(default_factory=JitterModel)
    loss: LossModel = Field(default_factory=LossModel)


class Endpoints(BaseModel):
    """UDP addresses used by the real-passthrough transport ("ip:port")."""

    command_send: str = "127.0.0.1:9101"
    command_recv: str = "127.0.0.1:9102"
    status_send: str = "127.0.0.1:9201"
    status_recv: str = "127.0.0.1:9202"


class ChannelProfile(BaseModel):
    name: str
    mode: LinkMode = LinkMode.EMULATED
    delay_ns: int = Field(0, ge=0)
    jitter: JitterModel = Field(default_factory=JitterModel)
    loss: LossModel = Field(default_factory=LossModel)
    command: Optional[DirectionSettings] = None
    status: Optional[DirectionSettings] = None
    endpoints: Optional[Endpoints] = None

    @model_validator(mode="after")
    def _check_mode(self) -> "ChannelProfile":
        if self.mode == LinkMode.REAL_PASSTHROUGH:
            impaired = (
                self.delay_ns != 0
                or self.jitter.kind != "none"
                or self.loss.mean_loss() != 0.0
                or self.command is not None
                or self.status is not None
            )
            if impaired:
                raise ValueError("real-passthrough profiles carry no impairment; configure the proxy instead")
            if self.endpoints is None:
                self.endpoints = Endpoints()
        return self

    def settings_for(self, direction: Direction) -> DirectionSettings:
        override = self.command if direction == Direction.COMMAND else self.status
        if override is not None:
            return override
        return DirectionSettings(delay_ns=self.delay_ns, jitter=self.jitter, loss=self.loss)

    @property
    def emulated(self) -> bool:
        return self.mode == LinkMode.EMULATED

    def mean_delay_ms(self, direction: Direction = Direction.COMMAND) -> float:
        cfg = self.settings_for(direction)
        return (cfg.delay_ns + cfg.jitter.mean_ns_value()) / NS_PER_MS

    def mean_loss(self, direction: Direction = Direction.COMMAND) -> float:
        return self.settings_for(direction).loss.mean_loss()

    @classmethod
    def static(cls, plr: float, delay_ms: float) -> "ChannelProfile":
        """Static model cell: fixed one-way delay and i.i.d. Bernoulli loss."""
        return cls(
            name=f"static-plr{plr:g}-delay{delay_ms:g}ms",
            delay_ns=int(round(delay_ms * NS_PER_MS)),
            loss=LossModel(kind="bernoulli", p=plr),
        )


def load_profile(ref: str | Path) -> ChannelProfile:
    """
    Resolve a profile by file path or by bundled name (profiles/<name>.yaml).
    """
    path = Path(ref)
    if not path.exists():
        path = Path(settings.PROFILES_DIR) / f"{ref}.yaml"
    if not path.exists():
        raise ProfileError(f"Unknown channel profile: {ref}")

    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ProfileError(f"Profile {path} is not valid YAML: {e}") from e

    data.setdefault("name", path.stem)
    try:
        profile = ChannelProfile.model_validate(data)
    except ValidationError as e:
        raise ProfileError(f"Profile {path}: {_format_errors(e)}") from e

    logger.debug(f"Loaded channel profile {profile.name} ({profile.mode.value}) from {path}")
    return profile


def _format_errors(e: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
    )
