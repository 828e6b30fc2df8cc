"""Stateful DFS over receive interleavings.

The engine keeps one :class:`ExplorationNode` per executed step.  A node
holds the snapshot it was entered with, its enabled receives, the receives
already chosen from it and, for the partial-order schedulers, a queue of
receives still to be tried.  Schedulers decide which receive to run next and
how to grow the queues; everything else is shared.

Messages addressed to synthetic clients are delivered by the engine right
after the receive that produced them.  They show up in the schedule (they are
what the history is built from) but are never branch points.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol

from .actors import (
    ActorError,
    AgentId,
    BehaviorTable,
    Message,
    Payload,
    Receive,
    Snapshot,
    SystemState,
    enabled_receives,
    execute_receive,
    snapshot,
)
from .harness import HarnessConfig, classify, client_records
from .history import INV, RES, History, HistoryEvent

DEFAULT_CUTOFF = 50_000


class ExplorationError(RuntimeError):
    """A benchmark action failed; ``prefix`` is the schedule that led there."""

    def __init__(self, message: str, prefix: list[ScheduleEntry]) -> None:
        super().__init__(message)
        self.prefix = prefix


@dataclass(frozen=True)
class ScheduleEntry:
    index: int
    receive: Receive
    forced: bool = False

    @property
    def message(self) -> Message:
        return self.receive.message

    @property
    def sender(self) -> AgentId:
        return self.receive.message.sender

    @property
    def receiver(self) -> AgentId:
        return self.receive.message.receiver

    @property
    def name(self) -> str:
        return self.receive.message.name

    @property
    def payload(self) -> Payload:
        return self.receive.message.payload

    def __str__(self) -> str:
        return f"{self.index}: {self.receive.message}"


@dataclass(frozen=True)
class Schedule:
    entries: tuple[ScheduleEntry, ...]
    clients: dict[AgentId, dict[str, Any]] = field(default_factory=dict, compare=False)

    @property
    def client_responses(self) -> tuple[ScheduleEntry, ...]:
        return tuple(e for e in self.entries if e.receiver in self.clients)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class ExplorationNode:
    snapshot: Snapshot
    enabled: list[Receive]
    explored: set[int] = field(default_factory=set)
    backtracking: dict[int, Receive] = field(default_factory=dict)
    freeze: bool = False
    executed_from: Receive | None = None
    # Entries produced by the step out of this node (chosen receive + forced client deliveries).
    step: tuple[ScheduleEntry, ...] = ()
    started: bool = False
    budget: int = 0
    delay: int = 0
    # Bitmasks over stack depths for the step out of this node.
    hb: int = 0
    causal: int = 0
    # Seqs executed from the root to reach this node.
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        self.enabled_seqs = frozenset(r.seq for r in self.enabled)

    @property
    def state(self) -> SystemState:
        return self.snapshot.state

    def unexplored(self) -> list[Receive]:
        return [r for r in self.enabled if r.seq not in self.explored]


class Strategy(Protocol):
    """What a scheduler plugs into the engine."""

    restart: bool

    def attach(self, engine: Engine) -> None: ...

    def on_node(self, engine: Engine, node: ExplorationNode) -> None: ...

    def pick(self, engine: Engine, node: ExplorationNode) -> Receive | None: ...

    def has_more(self, engine: Engine, node: ExplorationNode) -> bool: ...

    def dependent(self, engine: Engine, a: Receive, b: Receive) -> bool: ...


@dataclass
class UniqueHistory:
    history: History
    count: int
    first_index: int
    first_time: float


class HistoryAccumulator:
    """Chronological dedupe: two histories are the same iff their event tuples are."""

    def __init__(self) -> None:
        self._seen: dict[tuple, UniqueHistory] = {}

    def add(self, history: History, index: int = 0, at: float = 0.0) -> bool:
        key = history.key()
        found = self._seen.get(key)
        if found is None:
            self._seen[key] = UniqueHistory(history, 1, index, at)
            return True
        found.count += 1
        return False

    def unique(self) -> list[UniqueHistory]:
        return list(self._seen.values())

    def __len__(self) -> int:
        return len(self._seen)


def dedupe_histories(histories: Iterable[History]) -> list[UniqueHistory]:
    acc = HistoryAccumulator()
    for i, h in enumerate(histories, start=1):
        acc.add(h, i)
    return acc.unique()


@dataclass
class ExplorationReport:
    scheduler: str
    seed: int
    cutoff: int
    schedule_count: int
    exhausted: bool
    incomplete: int
    unique: list[UniqueHistory]
    depths: list[int]
    receive_count: int
    receive_time: float
    elapsed: float
    max_backtracking: int
    schedules: list[Schedule] | None = None

    @property
    def mean_receive_time(self) -> float:
        return self.receive_time / self.receive_count if self.receive_count else 0.0

    def complete_histories(self) -> list[UniqueHistory]:
        return [u for u in self.unique if u.history.complete]

    def to_json(self, include_schedules: bool = False) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "scheduler": self.scheduler,
            "seed": self.seed,
            "cutoff": self.cutoff,
            "schedules": self.schedule_count,
            "exhausted": self.exhausted,
            "incomplete": self.incomplete,
            "unique_histories": [
                {"events": [str(e) for e in u.history.events], "count": u.count, "first_index": u.first_index}
                for u in self.unique
            ],
            "receive_count": self.receive_count,
            "mean_receive_ms": self.mean_receive_time * 1000,
            "elapsed_ms": self.elapsed * 1000,
            "stateless_estimate_ms": stateless_time_estimate(self) * 1000,
        }
        if include_schedules and self.schedules is not None:
            doc["schedule_list"] = [[str(e.receive.message) for e in s.entries] for s in self.schedules]
        return doc

    def dumps(self, include_schedules: bool = False) -> str:
        return json.dumps(self.to_json(include_schedules), indent=2)


def stateless_time_estimate(report: ExplorationReport) -> float:
    """Seconds a stateless checker would need: every schedule replayed from scratch."""
    return sum(report.depths) * report.mean_receive_time


class Engine:
    def __init__(
        self,
        initial: SystemState,
        behavior: BehaviorTable,
        harness: HarnessConfig,
        strategy: Strategy,
        cutoff: int = DEFAULT_CUTOFF,
        keep_schedules: bool = False,
        max_depth: int = 10_000,
        clock: Callable[[], float] = time.perf_counter,
        observer: Callable[[SystemState, Schedule], None] | None = None,
    ) -> None:
        if cutoff < 1:
            raise ValueError("cutoff must be at least 1")
        self.initial = initial
        self.behavior = behavior
        self.harness = harness
        self.strategy = strategy
        self.cutoff = cutoff
        self.keep_schedules = keep_schedules
        self.max_depth = max_depth
        self.clock = clock
        self.observer = observer
        self.clients = client_records(initial)
        self.first_emitted_seq = initial.next_seq
        self.emitter: dict[int, int] = {}
        self.stack: list[ExplorationNode] = []
        self.receive_count = 0
        self.receive_time = 0.0
        self.max_backtracking = 0
        strategy.attach(self)

    # Helpers for schedulers.

    def emitted_at(self, seq: int) -> int | None:
        """Stack depth whose step emitted message ``seq``; None for injected ones."""
        if seq < self.first_emitted_seq:
            return None
        return self.emitter.get(seq)

    def transition(self, depth: int) -> Receive:
        r = self.stack[depth].executed_from
        assert r is not None
        return r

    # Core loop.

    def _new_node(self, state: SystemState, budget: int) -> ExplorationNode:
        path = tuple(n.executed_from.seq for n in self.stack)  # type: ignore[union-attr]
        node = ExplorationNode(snapshot(state), enabled_receives(state), budget=budget, path=path)
        self.stack.append(node)
        if len(self.stack) > self.max_depth:
            raise ExplorationError("schedule exceeds the maximum depth", self.prefix())
        self.strategy.on_node(self, node)
        for n in self.stack:
            if len(n.backtracking) > self.max_backtracking:
                self.max_backtracking = len(n.backtracking)
        return node

    def prefix(self) -> list[ScheduleEntry]:
        return [e for n in self.stack for e in n.step]

    def _run(self, state: SystemState, r: Receive) -> SystemState:
        t0 = self.clock()
        try:
            result = execute_receive(state, r, self.behavior)
        except ActorError as exc:
            raise ExplorationError(str(exc), self.prefix()) from exc
        self.receive_time += self.clock() - t0
        self.receive_count += 1
        self._emitted = result.emitted
        return result.new_state

    def _step(self, node: ExplorationNode, r: Receive, index: int) -> SystemState:
        depth = len(self.stack) - 1
        node.explored.add(r.seq)
        node.backtracking.pop(r.seq, None)
        node.executed_from = r
        state = self._run(node.state, r)
        entries = [ScheduleEntry(index, r)]
        for msg in self._emitted:
            self.emitter[msg.seq] = depth
        forced = [m for m in self._emitted if state.is_client(m.receiver)]
        for msg in forced:
            fr = Receive(msg)
            state = self._run(state, fr)
            entries.append(ScheduleEntry(index + len(entries), fr, forced=True))
        node.step = tuple(entries)
        self._masks(depth)
        return state

    def _masks(self, depth: int) -> None:
        node = self.stack[depth]
        r = node.executed_from
        hb = causal = 1 << depth
        src = self.emitted_at(r.seq)
        if src is not None:
            causal |= self.stack[src].causal
        for k in range(depth - 1, -1, -1):
            other = self.stack[k].executed_from
            if other.destination == r.destination:
                causal |= self.stack[k].causal
                break
        dependent = self.strategy.dependent
        for k in range(depth):
            if dependent(self, self.stack[k].executed_from, r):
                hb |= self.stack[k].hb
        node.hb = hb
        node.causal = causal

    def explore(self) -> ExplorationReport:
        start = self.clock()
        acc = HistoryAccumulator()
        schedules: list[Schedule] | None = [] if self.keep_schedules else None
        depths: list[int] = []
        incomplete = 0
        count = 0
        exhausted = False
        self.stack = []
        self._new_node(self.initial, getattr(self.strategy, "delay_budget", 0))
        while True:
            node = self.stack[-1]
            if node.enabled:
                r = self.strategy.pick(self, node)
                if r is not None:
                    index = sum(len(n.step) for n in self.stack[:-1]) + 1
                    state = self._step(node, r, index)
                    self._new_node(state, node.budget - node.delay)
                    continue
            if not node.enabled and not node.explored:
                # Terminal state of a fresh path: one complete schedule.
                node.explored.add(-1)
                entries = tuple(self.prefix())
                sched = Schedule(entries, self.clients)
                count += 1
                depths.append(len(entries))
                history = schedule_to_history(sched, self.harness)
                if not history.complete:
                    incomplete += 1
                acc.add(history, count, self.clock() - start)
                if schedules is not None:
                    schedules.append(sched)
                if self.observer is not None:
                    self.observer(node.state, sched)
                if count >= self.cutoff:
                    break
            if not self._backtrack():
                exhausted = True
                break
        return ExplorationReport(
            scheduler=getattr(self.strategy, "name", type(self.strategy).__name__),
            seed=getattr(self.strategy, "seed", 0),
            cutoff=self.cutoff,
            schedule_count=count,
            exhausted=exhausted,
            incomplete=incomplete,
            unique=acc.unique(),
            depths=depths,
            receive_count=self.receive_count,
            receive_time=self.receive_time,
            elapsed=self.clock() - start,
            max_backtracking=self.max_backtracking,
            schedules=schedules,
        )

    def _backtrack(self) -> bool:
        if self.strategy.restart:
            del self.stack[1:]
            root = self.stack[0]
            root.explored.clear()
            root.started = False
            return bool(root.enabled)
        return backtrack(self) is not None


def backtrack(engine: Engine) -> ExplorationNode | None:
    """Pop finished nodes; return the node exploration resumes from, or None.

    A node is finished once its scheduler has nothing left to pick there
    (the DFS base: every enabled receive explored; the partial-order family:
    its backtracking queue is empty).  The pick itself happens on the next
    iteration of the main loop, which also clears the freeze flag.
    """
    stack = engine.stack
    stack.pop()
    while stack:
        node = stack[-1]
        if engine.strategy.has_more(engine, node):
            return node
        stack.pop()
    return None


def schedule_to_history(schedule: Schedule, harness: HarnessConfig) -> History:
    """Client-visible events of ``schedule``.

    An invocation sits where an ADT agent first receives the client's
    request; a response sits where the client receives its answer.  All other
    traffic is dropped.
    """
    clients = schedule.clients
    events: list[HistoryEvent] = []
    for e in schedule.entries:
        if e.receiver in clients:
            cat = classify(e.name, True, harness)
            rec = clients[e.receiver]
            ret = e.payload.value
            if cat.value == "write-response" and harness.adt == "MAP":
                ret = None
            events.append(HistoryEvent(RES, rec["index"], rec["op"], rec["key"], rec["value"], ret, e.receiver))
        elif e.sender in clients:
            rec = clients[e.sender]
            events.append(HistoryEvent(INV, rec["index"], rec["op"], rec["key"], rec["value"], None, e.sender))
    return History(tuple(events))


def replay(initial: SystemState, behavior: BehaviorTable, entries: Iterable[ScheduleEntry]) -> SystemState:
    """Re-execute recorded entries from ``initial``; raises if one is not pending."""
    state = initial
    for e in entries:
        msg = state.pending.get(e.message.seq)
        if msg != e.message:
            raise ExplorationError(f"entry {e} is not executable", [])
        state = execute_receive(state, e.receive, behavior).new_state
    return state


def explore(
    initial: SystemState,
    harness: HarnessConfig,
    scheduler: Any,
    cutoff: int = DEFAULT_CUTOFF,
    seed: int | None = None,
    behavior: BehaviorTable | None = None,
    keep_schedules: bool = False,
    observer: Callable[[SystemState, Schedule], None] | None = None,
) -> ExplorationReport:
    """Run one exploration.  ``scheduler`` is a :class:`SchedulerPolicy` or a kind name.

    ``observer`` sees the final state and schedule of every complete run.
    """
    from .schedulers import SchedulerPolicy, make_strategy

    if behavior is None:
        raise ValueError("a behavior table is required")
    policy = scheduler if isinstance(scheduler, SchedulerPolicy) else SchedulerPolicy(str(scheduler))
    if seed is not None:
        policy = policy.with_seed(seed)
    strategy = make_strategy(policy, harness)
    return Engine(initial, behavior, harness, strategy, cutoff, keep_schedules, observer=observer).explore()


__all__ = [
    "DEFAULT_CUTOFF",
    "Engine",
    "ExplorationError",
    "ExplorationNode",
    "ExplorationReport",
    "HistoryAccumulator",
    "Schedule",
    "ScheduleEntry",
    "UniqueHistory",
    "backtrack",
    "dedupe_histories",
    "explore",
    "replay",
    "schedule_to_history",
    "stateless_time_estimate",
]
