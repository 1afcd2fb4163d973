import asyncio
import socket
import time
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from nethil.config.constants import Direction, TapDirection, UNKNOWN_MSG_TYPE
from nethil.netchan.channel import ChannelState, DeliverAfter, sample_channel
from nethil.netchan.profile import ChannelProfile, JitterModel, LossModel
from nethil.netchan.tap import TapRecord, TapSink
from nethil.netchan.udp_link import parse_endpoint
from nethil.netchan.wire import WireError, decode_message

logger = logging.getLogger(__name__)


@dataclass
class AgentStats:
    received: int = 0
    forwarded: int = 0
    dropped: int = 0
    undecodable: int = 0


@dataclass
class Impairment:
    profile: ChannelProfile
    channel: ChannelState
    direction: Direction = Direction.COMMAND


def proxy_profile(delay_ms: float, plr: float, jitter_ms: float) -> ChannelProfile:
    """Static impairment for the proxy: fixed delay, uniform ±jitter, i.i.d. loss."""
    jitter = JitterModel()
    if jitter_ms > 0:
        jitter = JitterModel(kind="uniform", half_width_ns=int(round(jitter_ms * 1e6)))
    return ChannelProfile(
        name="proxy",
        delay_ns=int(round(delay_ms * 1e6)),
        jitter=jitter,
        loss=LossModel(kind="bernoulli", p=plr),
    )


class ForwardingProtocol(asyncio.DatagramProtocol):
    """
    Receives datagrams on the listen socket and re-sends them byte-identically
    from a separate send socket. With an impairment attached, each datagram
    goes through the channel sampler first and leaves after the drawn delay.
    """

    def __init__(
        self,
        forward: tuple[str, int],
        endpoint_id: str,
        tap: Optional[TapSink] = None,
        impairment: Optional[Impairment] = None,
    ):
        self.forward = forward
        self.endpoint_id = endpoint_id
        self.tap = tap
        self.impairment = impairment
        self.stats = AgentStats()
        self._unknown_seq = 0
        self._send_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self.failed: Optional[BaseException] = None

    def connection_made(self, transport) -> None:
        self._loop = asyncio.get_running_loop()

    def datagram_received(self, data: bytes, addr) -> None:
        self.stats.received += 1
        ident = self._identify(data)
        self._tap(TapDirection.RECV, ident)

        if self.impairment is None:
            self._forward(data, ident)
            return

        outcome = sample_channel(self.impairment.profile, self.impairment.direction, self.impairment.channel)
        if not isinstance(outcome, DeliverAfter):
            self.stats.dropped += 1
            return
        if outcome.extra_ns == 0:
            self._forward(data, ident)
        else:
            self._loop.call_later(outcome.extra_ns / 1e9, self._forward, data, ident)

    def error_received(self, exc: Exception) -> None:
        logger.warning(f"[{self.endpoint_id}] socket error: {exc}")

    def connection_lost(self, exc: Optional[Exception]) -> None:
        if exc is not None:
            self.failed = exc
            logger.error(f"[{self.endpoint_id}] listen socket lost: {exc}")
        self._send_sock.close()

    def _identify(self, data: bytes) -> tuple:
        try:
            msg = decode_message(data)
            return int(msg.msg_type), msg.robot_id, msg.seq
        except WireError as e:
            self.stats.undecodable += 1
            self._unknown_seq += 1
            logger.debug(f"[{self.endpoint_id}] forwarding undecodable datagram: {e}")
            return UNKNOWN_MSG_TYPE, -1, self._unknown_seq

    def _forward(self, data: bytes, ident: tuple) -> None:
        try:
            self._send_sock.sendto(data, self.forward)
        except OSError as e:
            logger.error(f"[{self.endpoint_id}] forward to {self.forward} failed: {e}")
            return
        self.stats.forwarded += 1
        self._tap(TapDirection.SEND, ident)

    def _tap(self, direction: TapDirection, ident: tuple) -> None:
        if self.tap is None:
            return
        msg_type, robot_id, seq = ident
        self.tap.append(TapRecord(self.endpoint_id, direction, msg_type, robot_id, seq, time.time_ns()))


@dataclass
class AgentHandle:
    transport: asyncio.DatagramTransport
    protocol: ForwardingProtocol
    stats: AgentStats = field(init=False)

    def __post_init__(self):
        self.stats = self.protocol.stats

    def close(self) -> None:
        self.transport.close()
        if self.protocol.tap is not None:
            self.protocol.tap.flush()


async def start_forward_agent(
    listen: str,
    forward: str,
    tap: Optional[TapSink] = None,
    impairment: Optional[Impairment] = None,
    endpoint_id: Optional[str] = None,
) -> AgentHandle:
    loop = asyncio.get_running_loop()
    endpoint_id = endpoint_id or f"{'proxy' if impairment else 'agent'}@{listen}"
    protocol = ForwardingProtocol(parse_endpoint(forward), endpoint_id, tap=tap, impairment=impairment)
    transport, _ = await loop.create_datagram_endpoint(lambda: protocol, local_addr=parse_endpoint(listen))
    logger.info(f"{endpoint_id} forwarding {listen} -> {forward}")
    return AgentHandle(transport, protocol)


async def start_impairment_proxy(
    listen: str,
    forward: str,
    delay_ms: float,
    plr: float,
    jitter_ms: float,
    seed: int,
    tap: Optional[TapSink] = None,
) -> AgentHandle:
    impairment = Impairment(
        profile=proxy_profile(delay_ms, plr, jitter_ms),
        channel=ChannelState(rng=np.random.default_rng(seed)),
    )
    handle = await start_forward_agent(listen, forward, tap=tap, impairment=impairment)
    logger.info(f"Impairment: delay={delay_ms} ms, plr={plr}, jitter=±{jitter_ms} ms, seed={seed}")
    return handle


async def _serve(handle: AgentHandle) -> None:
    try:
        while handle.protocol.failed is None:
            await asyncio.sleep(1.0)
            if handle.protocol.tap is not None:
                handle.protocol.tap.flush()
    finally:
        handle.close()
        s = handle.stats
        logger.info(
            f"{handle.protocol.endpoint_id} stopped: received={s.received} forwarded={s.forwarded} "
            f"dropped={s.dropped} undecodable={s.undecodable}"
        )
    raise OSError(f"listen socket failed: {handle.protocol.failed}")


def run_forward_agent(listen: str, forward: str, tap_sink: Optional[TapSink] = None) -> None:
    """Blocking entry point; runs until interrupted or the socket fails."""

    async def main():
        await _serve(await start_forward_agent(listen, forward, tap=tap_sink))

    asyncio.run(main())


def run_impairment_proxy(
    listen: str,
    forward: str,
    delay_ms: float,
    plr: float,
    jitter_ms: float,
    seed: int,
    tap_sink: Optional[TapSink] = None,
) -> None:
    async def main():
        await _serve(await start_impairment_proxy(listen, forward, delay_ms, plr, jitter_ms, seed, tap=tap_sink))

    asyncio.run(main())
