"""Executable actor model.

Agents own a private local state (a plain dict) and react to one message at a
time.  An action sees only its own agent's state and the consumed message; it
may mutate that state, send messages and create agents.  Everything else about
the system lives in :class:`SystemState`.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

AgentId = int

CLIENT_KIND = "client"


class ActorError(Exception):
    """Malformed benchmark or violated engine invariant."""


@dataclass(frozen=True)
class Payload:
    """Message body.

    A closed record shared by every bundled benchmark.  Unused fields stay
    ``None``; ``params`` carries tracker bookkeeping (e.g. an operation tag).
    """

    key: Any = None
    value: Any = None
    client: AgentId | None = None
    pid: Any = None
    slot: int | None = None
    params: Any = None

    def __deepcopy__(self, memo: dict) -> Payload:
        return self


EMPTY = Payload()


@dataclass(frozen=True)
class Message:
    seq: int
    sender: AgentId
    receiver: AgentId
    name: str
    payload: Payload = EMPTY

    def __deepcopy__(self, memo: dict) -> Message:
        return self

    def __str__(self) -> str:
        return f"{self.sender} -{self.name}#{self.seq}-> {self.receiver}"


@dataclass(frozen=True)
class Receive:
    """A pending message paired with the agent that will consume it."""

    message: Message

    @property
    def destination(self) -> AgentId:
        return self.message.receiver

    @property
    def seq(self) -> int:
        return self.message.seq

    def sort_key(self) -> tuple[int, int]:
        return (self.message.receiver, self.message.seq)

    def __deepcopy__(self, memo: dict) -> Receive:
        return self


@dataclass
class SystemState:
    agents: dict[AgentId, dict[str, Any]]
    kinds: dict[AgentId, str]
    pending: dict[int, Message] = field(default_factory=dict)
    next_seq: int = 1

    def copy(self) -> SystemState:
        return SystemState(
            agents=copy.deepcopy(self.agents),
            kinds=dict(self.kinds),
            pending=dict(self.pending),
            next_seq=self.next_seq,
        )

    def post(self, sender: AgentId, receiver: AgentId, name: str, payload: Payload = EMPTY) -> Message:
        """Place a new message in ``pending`` (used by harness injection)."""
        msg = Message(self.next_seq, sender, receiver, name, payload)
        self.pending[msg.seq] = msg
        self.next_seq += 1
        return msg

    def is_client(self, agent: AgentId) -> bool:
        return self.kinds.get(agent) == CLIENT_KIND


@dataclass
class TransitionResult:
    new_state: SystemState
    emitted: list[Message]
    created: list[tuple[AgentId, dict[str, Any]]]


class Context:
    """Handle given to an action; the only way it can affect the outside world."""

    __slots__ = ("self_id", "_outbox", "_created", "_next_seq")

    def __init__(self, self_id: AgentId, next_seq: int) -> None:
        self.self_id = self_id
        self._outbox: list[Message] = []
        self._created: list[tuple[AgentId, str, dict[str, Any]]] = []
        self._next_seq = next_seq

    def send(self, receiver: AgentId, name: str, payload: Payload = EMPTY) -> None:
        self._outbox.append(Message(self._next_seq, self.self_id, receiver, name, payload))
        self._next_seq += 1

    def create(self, agent: AgentId, kind: str, local: dict[str, Any]) -> None:
        self._created.append((agent, kind, local))


Action = Callable[[dict, Message, Context], None]


class BehaviorTable:
    """Maps (agent kind, message name) to an action.

    Client agents are passive: any message they receive is absorbed without
    effect.
    """

    def __init__(self, actions: Mapping[str, Mapping[str, Action]]) -> None:
        self._actions = {kind: dict(table) for kind, table in actions.items()}

    def lookup(self, kind: str, name: str) -> Action | None:
        if kind == CLIENT_KIND:
            return _absorb
        return self._actions.get(kind, {}).get(name)

    def message_names(self) -> set[str]:
        return {name for table in self._actions.values() for name in table}


def _absorb(local: dict, msg: Message, ctx: Context) -> None:
    pass


def enabled_receives(state: SystemState) -> list[Receive]:
    """One receive per pending message, in (destination, seq) order.

    There is no per-channel FIFO: every pending message is deliverable.
    """
    return sorted((Receive(m) for m in state.pending.values()), key=Receive.sort_key)


def execute_receive(state: SystemState, r: Receive, behavior: BehaviorTable) -> TransitionResult:
    """Run the action for ``r`` atomically and return the successor state.

    ``state`` is left untouched.  Only the destination's local state is
    copied; other agents' states are shared with ``state`` and must never be
    mutated in place.
    """
    msg = r.message
    if state.pending.get(msg.seq) != msg:
        raise ActorError(f"receive {msg} is not pending")
    dest = msg.receiver
    kind = state.kinds.get(dest)
    if kind is None:
        raise ActorError(f"unknown destination agent {dest}")
    action = behavior.lookup(kind, msg.name)
    if action is None:
        raise ActorError(f"agent kind {kind!r} has no action for {msg.name!r}")

    local = copy.deepcopy(state.agents[dest])
    ctx = Context(dest, state.next_seq)
    action(local, msg, ctx)

    agents = dict(state.agents)
    agents[dest] = local
    kinds = state.kinds
    created: list[tuple[AgentId, dict[str, Any]]] = []
    if ctx._created:
        kinds = dict(kinds)
        for agent, new_kind, new_local in ctx._created:
            if agent in agents:
                raise ActorError(f"agent {agent} already exists")
            agents[agent] = new_local
            kinds[agent] = new_kind
            created.append((agent, new_local))

    pending = dict(state.pending)
    del pending[msg.seq]
    for out in ctx._outbox:
        if out.receiver not in agents:
            raise ActorError(f"{out} targets an unknown agent")
        pending[out.seq] = out
    new_state = SystemState(agents, kinds, pending, ctx._next_seq)
    return TransitionResult(new_state, list(ctx._outbox), created)


@dataclass(frozen=True)
class Snapshot:
    """Immutable capture of a system state plus node bookkeeping."""

    state: SystemState
    bookkeeping: Any = None


def snapshot(state: SystemState, node: Any = None) -> Snapshot:
    book = None
    if node is not None:
        book = {
            "enabled": tuple(node.enabled),
            "explored": frozenset(node.explored),
            "backtracking": frozenset(node.backtracking),
            "freeze": node.freeze,
        }
    return Snapshot(state.copy(), book)


def restore(snap: Snapshot) -> tuple[SystemState, Any]:
    return snap.state.copy(), snap.bookkeeping


def make_state(locals_: Iterable[tuple[AgentId, str, dict[str, Any]]]) -> SystemState:
    agents: dict[AgentId, dict[str, Any]] = {}
    kinds: dict[AgentId, str] = {}
    for agent, kind, local in locals_:
        if agent <= 0:
            raise ActorError("agent ids must be positive")
        agents[agent] = local
        kinds[agent] = kind
    return SystemState(agents, kinds)
