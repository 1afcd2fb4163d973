import socket
import time
import logging
from typing import Optional

from nethil.config.constants import CONTROLLER_ENDPOINT, Direction, TapDirection, robot_endpoint
from nethil.config.settings import settings
from nethil.netchan.emulator import Delivery, LinkCounters
from nethil.netchan.profile import ChannelProfile
from nethil.netchan.tap import TapRecord, TapSink
from nethil.netchan.wire import WireError, WireMessage, decode_message, encode_message

logger = logging.getLogger(__name__)


def parse_endpoint(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise ValueError(f"Endpoint must be ip:port, got {text!r}")
    return host, int(port)


class UdpLink:
    """
    Real-passthrough transport. Commands leave towards endpoints.command_send
    and arrive on command_recv; status leaves towards status_send and arrives
    on status_recv. Whatever sits in between (agent, proxy, a real network)
    carries the impairment.
    """

    def __init__(self, profile: ChannelProfile, tap: Optional[TapSink] = None):
        if profile.emulated or profile.endpoints is None:
            raise ValueError(f"Profile {profile.name} is not a real-passthrough profile")
        self.profile = profile
        self.tap = tap
        ep = profile.endpoints
        self._targets = {
            Direction.COMMAND: parse_endpoint(ep.command_send),
            Direction.STATUS: parse_endpoint(ep.status_send),
        }
        self._send_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._recv_socks = {
            Direction.COMMAND: self._bind(parse_endpoint(ep.command_recv)),
            Direction.STATUS: self._bind(parse_endpoint(ep.status_recv)),
        }
        self.counters = {d: LinkCounters() for d in Direction}
        self.decode_errors = 0
        logger.info(
            f"UDP link up: command {ep.command_send} -> {ep.command_recv}, "
            f"status {ep.status_send} -> {ep.status_recv}"
        )

    @staticmethod
    def _bind(addr: tuple[str, int]) -> socket.socket:
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind(addr)
        sock.setblocking(False)
        return sock

    def send(self, now_ns: int, msg: WireMessage, source: str, destination: str, direction: Direction) -> None:
        data = encode_message(msg)
        if self.tap is not None:
            self.tap.append(_record(source, TapDirection.SEND, msg, time.time_ns()))
        try:
            self._send_sock.sendto(data, self._targets[direction])
            self.counters[direction].sent += 1
        except OSError as e:
            logger.error(f"UDP send to {self._targets[direction]} failed: {e}")
            raise

    def poll(self, now_ns: int) -> list[Delivery]:
        deliveries = []
        for direction, sock in self._recv_socks.items():
            while True:
                try:
                    data, _ = sock.recvfrom(settings.PROXY_RECV_BUFFER)
                except BlockingIOError:
                    break
                try:
                    msg = decode_message(data)
                except WireError as e:
                    self.decode_errors += 1
                    logger.warning(f"Discarding undecodable {direction.value} datagram: {e}")
                    continue
                destination = (
                    robot_endpoint(msg.robot_id) if direction == Direction.COMMAND else CONTROLLER_ENDPOINT
                )
                if self.tap is not None:
                    self.tap.append(_record(destination, TapDirection.RECV, msg, time.time_ns()))
                self.counters[direction].delivered += 1
                deliveries.append(Delivery(now_ns, destination, msg))
        return deliveries

    def pending(self) -> int:
        return 0

    def close(self) -> None:
        self._send_sock.close()
        for sock in self._recv_socks.values():
            sock.close()
        if self.tap is not None:
            self.tap.flush()


def _record(endpoint: str, direction: TapDirection, msg: WireMessage, t_ns: int) -> TapRecord:
    return TapRecord(endpoint, direction, int(msg.msg_type), msg.robot_id, msg.seq, t_ns)
