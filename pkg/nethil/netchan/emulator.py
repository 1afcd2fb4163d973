import logging
from dataclasses import dataclass
from typing import Optional

from nethil.config.constants import CONTROLLER_ENDPOINT, Direction, TapDirection
from nethil.netchan.channel import ChannelState, DeliverAfter, sample_channel
from nethil.netchan.profile import ChannelProfile
from nethil.netchan.scheduler import EventScheduler
from nethil.netchan.tap import TapRecord, TapSink
from nethil.netchan.wire import WireMessage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Delivery:
    t_ns: int
    destination: str
    message: WireMessage


@dataclass
class LinkCounters:
    sent: int = 0
    dropped: int = 0
    delivered: int = 0


def emu_send(
    scheduler: EventScheduler,
    now_ns: int,
    msg: WireMessage,
    destination: str,
    profile: ChannelProfile,
    rng_state: ChannelState,
    direction: Direction = Direction.COMMAND,
    tap: Optional[TapSink] = None,
    source: Optional[str] = None,
) -> bool:
    """Schedule one message through the emulated channel. Returns False on drop."""
    if tap is not None:
        tap.append(_record(source or "", TapDirection.SEND, msg, now_ns))

    outcome = sample_channel(profile, direction, rng_state)
    if isinstance(outcome, DeliverAfter):
        scheduler.push(now_ns + outcome.extra_ns, msg, destination)
        return True
    return False


class EmulatedLink:
    """
    In-process transport on a virtual clock. Both directions share one
    scheduler; each send draws from the same seeded channel state.
    """

    def __init__(
        self,
        profile: ChannelProfile,
        channel: ChannelState,
        tap: Optional[TapSink] = None,
    ):
        if not profile.emulated:
            raise ValueError(f"Profile {profile.name} is not an emulated profile")
        self.profile = profile
        self.channel = channel
        self.tap = tap
        self.scheduler = EventScheduler()
        self.counters = {d: LinkCounters() for d in Direction}

    def send(self, now_ns: int, msg: WireMessage, source: str, destination: str, direction: Direction) -> None:
        delivered = emu_send(
            self.scheduler, now_ns, msg, destination, self.profile, self.channel,
            direction=direction, tap=self.tap, source=source,
        )
        counters = self.counters[direction]
        counters.sent += 1
        if not delivered:
            counters.dropped += 1

    def poll(self, now_ns: int) -> list[Delivery]:
        deliveries = []
        for event in self.scheduler.pop_due(now_ns):
            if self.tap is not None:
                self.tap.append(_record(event.destination, TapDirection.RECV, event.message, event.due_ns))
            direction = Direction.STATUS if event.destination == CONTROLLER_ENDPOINT else Direction.COMMAND
            self.counters[direction].delivered += 1
            deliveries.append(Delivery(event.due_ns, event.destination, event.message))
        return deliveries

    def pending(self) -> int:
        return len(self.scheduler)

    def close(self) -> None:
        if self.tap is not None:
            self.tap.flush()


def _record(endpoint: str, direction: TapDirection, msg: WireMessage, t_ns: int) -> TapRecord:
    return TapRecord(
        endpoint_id=endpoint,
        direction=direction,
        msg_type=int(msg.msg_type),
        robot_id=msg.robot_id,
        seq=msg.seq,
        t_ns=t_ns,
    )
