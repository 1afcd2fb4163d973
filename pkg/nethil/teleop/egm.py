import logging
from dataclasses import dataclass, replace
from typing import Optional

from nethil.config.constants import Activation, EgmCommand, MessageType
from nethil.netchan.wire import WireMessage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EgmState:
    activation: Activation = Activation.INACTIVE
    last_packet_ns: int = 0
    pending_reactivation_at_ns: Optional[int] = None
    dropout_episodes: int = 0
    last_seq: int = -1


@dataclass(frozen=True)
class EgmEvent:
    t_ns: int
    event: str  # activate | deactivate | watchdog_trip


def egm_server_step(
    state: EgmState,
    now_ns: int,
    incoming: Optional[WireMessage],
    watchdog_timeout_ns: int,
    reconnect_delay_ns: int,
) -> tuple[EgmState, Optional[tuple[float, ...]], list[EgmEvent]]:
    """
    Robot-side stream state machine. Returns the new state, the joint target
    accepted by this step (if any), and the activation events it caused.
    """
    events: list[EgmEvent] = []
    # watchdog first: a packet arriving after the gap is already too late
    if state.activation == Activation.ACTIVE and now_ns - state.last_packet_ns > watchdog_timeout_ns:
        state = replace(
            state,
            activation=Activation.INACTIVE,
            pending_reactivation_at_ns=now_ns + reconnect_delay_ns,
            dropout_episodes=state.dropout_episodes + 1,
        )
        logger.debug(f"EGM watchdog trip at {now_ns / 1e9:.3f} s (episode {state.dropout_episodes})")
        events.append(EgmEvent(now_ns, "watchdog_trip"))

    if incoming is None:
        return state, None, events

    if incoming.msg_type == MessageType.EGM_CTRL:
        if incoming.payload.command == EgmCommand.ACTIVATE:
            if state.activation == Activation.ACTIVE:
                return state, None, events
            state = replace(
                state,
                activation=Activation.ACTIVE,
                last_packet_ns=now_ns,
                pending_reactivation_at_ns=None,
            )
            return state, None, events + [EgmEvent(now_ns, "activate")]
        if state.activation == Activation.INACTIVE:
            return state, None, events
        return replace(state, activation=Activation.INACTIVE), None, events + [EgmEvent(now_ns, "deactivate")]

    if incoming.msg_type != MessageType.EGM_JOINTS or state.activation != Activation.ACTIVE:
        return state, None, events
    if incoming.seq <= state.last_seq:
        # reordered behind a newer target
        return state, None, events

    state = replace(state, last_packet_ns=now_ns, last_seq=incoming.seq)
    return state, tuple(incoming.payload.joints), events
