"""Deterministic in-process message bus with an adversary hook.

Delivery is strict FIFO with no latency model. Every dequeued honest frame
passes through the optional intercept hook, which returns the frame
unchanged (pass), a different frame (modify) or ``None`` (drop); the hook
may also :meth:`Bus.inject` new frames. Injected frames bypass the hook.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Protocol

from .errors import UnknownReceiver
from .ids import Participant
from .wire import Flag, Origin, Transcript, WireMessage


class Handler(Protocol):
    def handle(self, msg: WireMessage, bus: "Bus") -> None: ...


InterceptHook = Callable[[WireMessage, "Bus"], "WireMessage | None"]


@dataclass
class BusStats:
    sent: int = 0
    injected: int = 0
    delivered: int = 0
    dropped: int = 0
    modified: int = 0

    def conserved(self) -> bool:
        return self.delivered + self.dropped + self.modified == self.sent + self.injected


class Bus:
    def __init__(self, hook: InterceptHook | None = None, max_frames: int = 100_000):
        self.hook = hook
        self.max_frames = max_frames
        self.transcript = Transcript()
        self.stats = BusStats()
        self._handlers: dict[Participant, Handler | Callable] = {}
        self._queue: deque[tuple[WireMessage, Origin]] = deque()
        self._dispatching = False

    def register(self, pid: Participant, handler: Handler | Callable[[WireMessage, "Bus"], None]) -> None:
        self._handlers[Participant(pid)] = handler

    def is_registered(self, pid: Participant) -> bool:
        return Participant(pid) in self._handlers

    def _check_receiver(self, msg: WireMessage) -> None:
        if Participant(msg.receiver) not in self._handlers:
            raise UnknownReceiver(f"no handler registered for {Participant(msg.receiver).name}")

    def send(self, msg: WireMessage) -> None:
        self._check_receiver(msg)
        self.stats.sent += 1
        self._queue.append((msg, Origin.HONEST))

    def inject(self, msg: WireMessage) -> None:
        self._check_receiver(msg)
        self.stats.injected += 1
        self._queue.append((msg, Origin.INJECTED))

    @property
    def pending(self) -> int:
        return len(self._queue)

    def run_until_idle(self) -> Transcript:
        if self._dispatching:
            raise RuntimeError("run_until_idle called from inside a handler; enqueue instead")
        self._dispatching = True
        try:
            processed = 0
            while self._queue:
                processed += 1
                if processed > self.max_frames:
                    raise RuntimeError(f"more than {self.max_frames} frames: livelock")
                msg, origin = self._queue.popleft()
                out, flag = msg, Flag.DELIVERED
                if self.hook is not None and origin is Origin.HONEST:
                    out = self.hook(msg, self)
                    if out is None:
                        flag = Flag.INTERCEPTED
                    elif out != msg:
                        flag = Flag.MODIFIED
                if flag is Flag.INTERCEPTED:
                    self.stats.dropped += 1
                    self.transcript.append(msg, flag, origin)
                    continue
                if flag is Flag.MODIFIED:
                    self.stats.modified += 1
                else:
                    self.stats.delivered += 1
                self.transcript.append(out, flag, origin)
                self._deliver(out)
        finally:
            self._dispatching = False
        return self.transcript

    def _deliver(self, msg: WireMessage) -> None:
        handler = self._handlers.get(Participant(msg.receiver))
        if handler is None:
            raise UnknownReceiver(f"no handler registered for {Participant(msg.receiver).name}")
        if hasattr(handler, "handle"):
            handler.handle(msg, self)
        else:
            handler(msg, self)
