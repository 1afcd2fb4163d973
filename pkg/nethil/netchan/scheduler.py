import heapq
from dataclasses import dataclass, field
from typing import Optional

from nethil.netchan.wire import WireMessage


@dataclass(order=True, frozen=True)
class EmuEvent:
    due_ns: int
    tie_seq: int
    message: WireMessage = field(compare=False)
    destination: str = field(compare=False)


class EventScheduler:
    """Min-heap of pending deliveries ordered by (due_ns, tie_seq)."""

    def __init__(self):
        self._heap: list[EmuEvent] = []
        self._next_tie = 0
        self.now_ns = 0

    def push(self, due_ns: int, message: WireMessage, destination: str) -> EmuEvent:
        event = EmuEvent(due_ns, self._next_tie, message, destination)
        self._next_tie += 1
        heapq.heappush(self._heap, event)
        return event

    def pop(self) -> Optional[EmuEvent]:
        if not self._heap:
            return None
        event = heapq.heappop(self._heap)
        # virtual clock never runs backwards
        self.now_ns = max(self.now_ns, event.due_ns)
        return event

    def pop_due(self, now_ns: int) -> list[EmuEvent]:
        released = []
        while self._heap and self._heap[0].due_ns <= now_ns:
            released.append(self.pop())
        return released

    def __len__(self) -> int:
        return len(self._heap)


def advance_scheduler(scheduler: EventScheduler) -> Optional[EmuEvent]:
    return scheduler.pop()
