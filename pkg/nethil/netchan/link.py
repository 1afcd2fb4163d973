from typing import Optional, Protocol, Union

import numpy as np

from nethil.config.constants import Direction
from nethil.netchan.channel import ChannelState
from nethil.netchan.clock import VirtualClock, WallClock
from nethil.netchan.emulator import Delivery, EmulatedLink
from nethil.netchan.profile import ChannelProfile
from nethil.netchan.tap import TapSink
from nethil.netchan.udp_link import UdpLink
from nethil.netchan.wire import WireMessage


class Link(Protocol):
    def send(self, now_ns: int, msg: WireMessage, source: str, destination: str, direction: Direction) -> None: ...

    def poll(self, now_ns: int) -> list[Delivery]: ...

    def pending(self) -> int: ...

    def close(self) -> None: ...


class Clock(Protocol):
    def now_ns(self) -> int: ...

    def wait_until(self, t_ns: int) -> None: ...


def open_link(
    profile: ChannelProfile,
    seed: Union[int, np.random.SeedSequence],
    tap: Optional[TapSink] = None,
) -> tuple[Link, Clock]:
    """Transport and clock for a run: in-process on virtual time, or UDP on wall time."""
    if profile.emulated:
        return EmulatedLink(profile, ChannelState.seeded(seed), tap=tap), VirtualClock()
    return UdpLink(profile, tap=tap), WallClock()
