"""Channels and a deterministic round-robin scheduler.

Processes are Python generators.  Each ``yield`` ends the process's turn:
yielding ``None`` is one reduction step, yielding :class:`Block` parks the
process until a message arrives on the named queue.  New processes join
the tail of the run queue.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Callable, Generator

from ..grades import INF
from .values import (
    SIDE_A, SIDE_B, SIDE_NAMES, Endpoint, MulticastEndpoint, SharedEndpoint,
    format_value,
)

DEFAULT_FUEL = 10**6


class DeadlockError(Exception):
    def __init__(self, blocked: list[tuple[int, str]]):
        self.blocked = blocked
        where = ", ".join(f"process {pid} on {q}" for pid, q in blocked)
        super().__init__(f"deadlock: thread blocked indefinitely ({where})")


class FuelExhausted(Exception):
    def __init__(self, steps: int):
        self.steps = steps
        super().__init__(f"fuel exhausted after {steps} steps")


class RuntimeFault(Exception):
    """An operation the type system should have ruled out."""


@dataclass(frozen=True)
class Tag:
    """Choice made by ``selectLeft``/``selectRight``."""

    side: str  # "L" or "R"


@dataclass(frozen=True)
class Block:
    key: tuple


@dataclass
class ChannelState:
    """Queues and per-side bookkeeping.  Side B may have several lanes (multicast)."""

    id: int
    lanes: int = 1
    queue_ab: list = field(default_factory=list)
    queue_ba: list = field(default_factory=list)
    refcount_a: object = 1
    refcount_b: list = field(default_factory=list)
    closed_a: bool = False
    closed_b: list = field(default_factory=list)
    lazy_server: Callable[[], Generator] | None = None

    @classmethod
    def create(cls, id: int, lanes: int = 1, refcount=1) -> ChannelState:
        return cls(
            id, lanes,
            queue_ab=[deque() for _ in range(lanes)],
            queue_ba=[deque() for _ in range(lanes)],
            refcount_a=refcount,
            refcount_b=[refcount] * lanes,
            closed_a=False,
            closed_b=[False] * lanes,
        )


@dataclass
class Process:
    pid: int
    gen: Generator
    label: str = ""
    status: str = "runnable"  # runnable | blocked | finished
    result: object = None
    blocked_on: tuple | None = None


def _key_name(key: tuple) -> str:
    chan, direction, lane = key
    side = SIDE_NAMES[SIDE_B if direction == "ab" else SIDE_A]
    return f"c{chan}:{side}" + (f".{lane}" if lane else "")


class Scheduler:
    def __init__(self, fuel: int = DEFAULT_FUEL, trace: bool = False, strict: bool = True):
        self.fuel = fuel
        self.tracing = trace
        self.strict = strict
        self.channels: dict[int, ChannelState] = {}
        self.procs: dict[int, Process] = {}
        self.run_queue: deque[int] = deque()
        self.waiters: dict[tuple, list[int]] = defaultdict(list)
        self.steps = 0
        self.events: list[str] = []
        self.current: int | None = None
        self._next_chan = 1

    # -- processes ------------------------------------------------------------

    def log(self, event: str) -> None:
        if self.tracing:
            who = "-" if self.current is None else str(self.current)
            self.events.append(f"{self.steps}: {who}: {event}")

    def spawn(self, gen: Generator, label: str = "") -> int:
        pid = len(self.procs)
        self.procs[pid] = Process(pid, gen, label)
        self.run_queue.append(pid)
        self.log(f"spawn({pid}{', ' + label if label else ''})")
        return pid

    def run(self, main: Generator):
        main_pid = self.spawn(main, "main")
        while True:
            if self.procs[main_pid].status == "finished":
                self.current = None
                return self.procs[main_pid].result
            if not self.run_queue:
                raise DeadlockError(self.blocked())
            pid = self.run_queue.popleft()
            proc = self.procs[pid]
            self.current = pid
            try:
                request = next(proc.gen)
            except StopIteration as stop:
                proc.status = "finished"
                proc.result = stop.value
                self.log(f"finish({format_value(stop.value)})")
                continue
            self.steps += 1
            if self.steps > self.fuel:
                raise FuelExhausted(self.steps)
            if isinstance(request, Block):
                proc.status = "blocked"
                proc.blocked_on = request.key
                self.waiters[request.key].append(pid)
                self.log(f"block({_key_name(request.key)})")
            else:
                self.run_queue.append(pid)

    def blocked(self) -> list[tuple[int, str]]:
        return [(p.pid, _key_name(p.blocked_on)) for p in self.procs.values() if p.status == "blocked"]

    # -- channels -------------------------------------------------------------

    def chan_create(self, lanes: int = 1, refcount=1) -> ChannelState:
        ch = ChannelState.create(self._next_chan, lanes, refcount)
        self._next_chan += 1
        self.channels[ch.id] = ch
        return ch

    def _is_closed(self, ep) -> bool:
        ch = self.channels[ep.chan]
        if isinstance(ep, MulticastEndpoint) or ep.side == SIDE_A:
            return ch.closed_a
        return ch.closed_b[getattr(ep, "lane", 0)]

    def _check_open(self, ep, op: str) -> bool:
        if self._is_closed(ep):
            if self.strict:
                raise RuntimeFault(f"{op} on closed endpoint {format_value(ep)}")
            return False
        return True

    def _enqueue(self, key: tuple, item) -> None:
        chan, direction, lane = key
        ch = self.channels[chan]
        (ch.queue_ab if direction == "ab" else ch.queue_ba)[lane].append(item)
        for pid in self.waiters.pop(key, []):
            self.procs[pid].status = "runnable"
            self.procs[pid].blocked_on = None
            self.run_queue.append(pid)

    def _out_keys(self, ep) -> list[tuple]:
        if isinstance(ep, MulticastEndpoint):
            return [(ep.chan, "ab", i) for i in range(ep.fanout)]
        if ep.side == SIDE_A:
            return [(ep.chan, "ab", 0)]
        return [(ep.chan, "ba", getattr(ep, "lane", 0))]

    def _in_key(self, ep) -> tuple:
        if isinstance(ep, MulticastEndpoint):
            raise RuntimeFault("a multicast sender cannot receive")
        if ep.side == SIDE_A:
            return (ep.chan, "ba", 0)
        return (ep.chan, "ab", getattr(ep, "lane", 0))

    def _wake_lazy(self, ep) -> None:
        ch = self.channels[ep.chan]
        if ch.lazy_server is not None and not isinstance(ep, MulticastEndpoint) and ep.side == SIDE_B:
            server, ch.lazy_server = ch.lazy_server, None
            self.spawn(server(), f"replica of c{ch.id}")

    def chan_send(self, ep, v):
        """Enqueue ``v`` (already unboxed for multicast); never blocks."""
        if not self._check_open(ep, "send"):
            return ep
        self._wake_lazy(ep)
        for key in self._out_keys(ep):
            self._enqueue(key, v)
        what = f"select(c{ep.chan}, {v.side})" if isinstance(v, Tag) else f"send(c{ep.chan}, {format_value(v)})"
        self.log(what)
        return ep

    def select_side(self, ep, side: str):
        return self.chan_send(ep, Tag(side))

    def chan_recv(self, ep):
        """Generator: dequeue the next incoming item, blocking while none is available."""
        self._check_open(ep, "recv")
        key = self._in_key(ep)
        chan, direction, lane = key
        while True:
            ch = self.channels[chan]
            q = (ch.queue_ab if direction == "ab" else ch.queue_ba)[lane]
            if q:
                item = q.popleft()
                if isinstance(item, Tag):
                    self.log(f"offer(c{chan}, {item.side})")
                else:
                    self.log(f"recv(c{chan}, {format_value(item)})")
                return item
            yield Block(key)

    def chan_close(self, ep) -> None:
        ch = self.channels[ep.chan]
        if not self._check_open(ep, "close"):
            return
        if isinstance(ep, MulticastEndpoint):
            ch.closed_a = True
        elif isinstance(ep, SharedEndpoint):
            if ep.side == SIDE_A:
                if ch.refcount_a is not INF:
                    ch.refcount_a -= 1
                ch.closed_a = ch.refcount_a == 0
            else:
                if ch.refcount_b[0] is not INF:
                    ch.refcount_b[0] -= 1
                ch.closed_b[0] = ch.refcount_b[0] == 0
        elif ep.side == SIDE_A:
            ch.closed_a = True
        else:
            ch.closed_b[ep.lane] = True
        self.log(f"close(c{ep.chan}, {SIDE_NAMES[getattr(ep, 'side', SIDE_A)]})")


__all__ = [
    "Block", "ChannelState", "DEFAULT_FUEL", "DeadlockError", "Endpoint",
    "FuelExhausted", "MulticastEndpoint", "Process", "RuntimeFault", "Scheduler",
    "SharedEndpoint", "Tag",
]
