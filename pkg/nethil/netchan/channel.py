import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from nethil.config.constants import Direction
from nethil.netchan.profile import ChannelProfile, LossModel, JitterModel

logger = logging.getLogger(__name__)


class GeState(str, Enum):
    GOOD = "good"
    BAD = "bad"


@dataclass(frozen=True)
class Drop:
    pass


@dataclass(frozen=True)
class DeliverAfter:
    extra_ns: int


Outcome = Union[Drop, DeliverAfter]


@dataclass
class ChannelState:
    """Seeded generator plus the per-direction loss-chain state it drives."""

    rng: np.random.Generator
    ge: dict[Direction, GeState] = field(
        default_factory=lambda: {Direction.COMMAND: GeState.GOOD, Direction.STATUS: GeState.GOOD}
    )

    @classmethod
    def seeded(cls, seed: int | np.random.SeedSequence) -> "ChannelState":
        return cls(rng=np.random.default_rng(seed))


def gilbert_elliott_step(
    state: GeState, params: LossModel, rng: np.random.Generator
) -> tuple[GeState, bool]:
    """Advance the Good/Bad chain once, then sample loss at the new state's rate."""
    u = rng.random()
    if state == GeState.GOOD:
        state = GeState.BAD if u < params.p_good_to_bad else GeState.GOOD
    else:
        state = GeState.GOOD if u < params.p_bad_to_good else GeState.BAD

    loss_p = params.loss_in_bad if state == GeState.BAD else params.loss_in_good
    lose = rng.random() < loss_p
    return state, lose


def sample_channel(profile: ChannelProfile, direction: Direction, chan: ChannelState) -> Outcome:
    """Draw the fate of one message on an emulated channel."""
    cfg = profile.settings_for(direction)

    if cfg.loss.kind == "bernoulli":
        lost = chan.rng.random() < cfg.loss.p
    else:
        chan.ge[direction], lost = gilbert_elliott_step(chan.ge[direction], cfg.loss, chan.rng)
    if lost:
        return Drop()

    return DeliverAfter(max(0, cfg.delay_ns + _jitter_ns(cfg.jitter, chan.rng)))


def _jitter_ns(jitter: JitterModel, rng: np.random.Generator) -> int:
    if jitter.kind == "uniform":
        return int(math.floor(rng.uniform(-jitter.half_width_ns, jitter.half_width_ns)))
    if jitter.kind == "exponential":
        if jitter.mean_ns == 0:
            return 0
        return int(math.floor(rng.exponential(jitter.mean_ns)))
    return 0
