"""The seven scheduling policies.

All of them drive the same DFS engine.  EX, DB and SR only decide which
enabled receive to run next.  DP, TD, IR and LV additionally grow the
backtracking queues of earlier nodes whenever a new state is entered: the
latest earlier step that is dependent with an enabled receive (and not
already ordered before it) gets one or more alternatives queued.

Dependence is "same destination agent" for DP/TD/IR.  LV narrows it to
receives that touch the same key, are not excluded by the harness and are
not causally ordered.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Any, Sequence

from .actors import AgentId, Receive
from .harness import WILDCARD, Category, HarnessConfig, key_of

if TYPE_CHECKING:
    from .exploration import Engine, ExplorationNode


class Kind(str, enum.Enum):
    EX = "EX"
    SR = "SR"
    DB = "DB"
    DP = "DP"
    TD = "TD"
    IR = "IR"
    LV = "LV"


ALL_KINDS = tuple(k.value for k in Kind)
FROZEN_KINDS = frozenset({Kind.TD, Kind.IR, Kind.LV})


@dataclass(frozen=True)
class SchedulerPolicy:
    kind: Kind | str
    delay_budget: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "kind", Kind(str(getattr(self.kind, "value", self.kind)).upper()))
        except ValueError:
            raise ValueError(f"unknown scheduler {self.kind!r}; expected one of {ALL_KINDS}") from None
        if self.delay_budget < 0:
            raise ValueError("delay budget must be non-negative")

    def with_seed(self, seed: int) -> SchedulerPolicy:
        return replace(self, seed=seed)


def _kind(policy: SchedulerPolicy | Kind | str) -> Kind:
    if isinstance(policy, SchedulerPolicy):
        return policy.kind  # type: ignore[return-value]
    return Kind(str(getattr(policy, "value", policy)).upper())


def keys_conflict(a: Any, b: Any) -> bool:
    return a == WILDCARD or b == WILDCARD or a == b


def are_dependent(
    r1: Receive,
    r2: Receive,
    policy: SchedulerPolicy | Kind | str,
    harness: HarnessConfig | None = None,
    ordered: bool = False,
) -> bool:
    """Whether swapping ``r1`` and ``r2`` may change the outcome.

    ``ordered`` tells LV that the two are already causally ordered in the
    current schedule; the other policies ignore it (the happens-before guard
    is applied separately).
    """
    if r1.destination != r2.destination:
        return False
    if _kind(policy) is not Kind.LV:
        return True
    if ordered:
        return False
    m1, m2 = r1.message, r2.message
    if harness is None:
        return True
    if harness.excluded(m1.name) or harness.excluded(m2.name):
        return False
    if harness.key_info(m1.name).rw == "read" and harness.key_info(m2.name).rw == "read":
        return False
    return keys_conflict(key_of(m1.payload, m1.name, harness), key_of(m2.payload, m2.name, harness))


def did_enable(earlier: Any, later: Any) -> bool:
    """Causal-chain link: ``later`` was sent by the agent that received ``earlier``."""
    return _message(later).sender == _message(earlier).receiver


def _message(x: Any):
    return getattr(x, "message", x)


def ired_root_enabler(
    path: Sequence[Receive],
    i: int,
    current: Receive,
    enabled_at_i: frozenset[int] | set[int],
) -> Receive | None:
    """Walk the schedule backwards from ``current`` to just after step ``i``.

    Each step whose receiver sent the receive under the cursor becomes the
    new cursor.  The final cursor is the root enabler; it is returned only
    if it moved at all and was enabled when step ``i`` ran.
    """
    cursor = current
    moved = False
    for k in range(len(path) - 1, i, -1):
        if did_enable(path[k], cursor):
            cursor = path[k]
            moved = True
    if not moved or cursor.seq not in enabled_at_i:
        return None
    return cursor


def choose_exhaustive(node: ExplorationNode, seed: int) -> Receive | None:
    """Seeded pick among the unexplored receives of ``node``.

    The draw is keyed on the node's path from the root, so every scheduler
    makes the same choice at the same node whatever it did elsewhere.
    """
    cands = node.unexplored()
    if not cands:
        return None
    if len(cands) == 1:
        return cands[0]
    return node_rng(node, seed).choice(cands)


def node_rng(node: ExplorationNode, seed: int) -> random.Random:
    return random.Random(f"{seed}|{node.path}|{sorted(node.explored)}")


def choose_delay_bounded(
    candidates: Sequence[Receive],
    cursor: AgentId,
    remaining: int,
    rng: random.Random,
    d: int | None = None,
) -> tuple[Receive, int]:
    """Pick from ``candidates`` after skipping ``d`` agents round-robin from ``cursor``.

    ``d`` is drawn uniformly from ``0..remaining`` unless given.  The agent
    at ``cursor`` (or the first one after it holding a candidate) is the
    undelayed choice.
    """
    if not candidates:
        raise ValueError("no candidates")
    if d is None:
        d = rng.randint(0, remaining) if remaining > 0 else 0
    if d > remaining:
        raise ValueError("delay exceeds the remaining budget")
    agents = sorted({r.destination for r in candidates})
    pos = next((k for k, a in enumerate(agents) if a >= cursor), 0)
    target = agents[(pos + d) % len(agents)]
    pick = min((r for r in candidates if r.destination == target), key=lambda r: r.seq)
    return pick, d


class _Strategy:
    restart = False
    delay_budget = 0
    observable_dependence = False

    def __init__(self, policy: SchedulerPolicy, harness: HarnessConfig) -> None:
        self.policy = policy
        self.harness = harness
        self.name = _kind(policy).value
        self.seed = policy.seed
        self.rng = random.Random(policy.seed)
        self.clients: frozenset[AgentId] = frozenset()

    def attach(self, engine: Engine) -> None:
        self.clients = frozenset(engine.clients)

    def observable(self, r: Receive) -> bool:
        """Receipt of a client request, or an ack that may complete an operation."""
        cat = self.harness.patterns.get(r.message.name)
        if cat is None:
            return False
        return cat is Category.ACK or (cat.is_invocation and r.message.sender in self.clients)

    def dependent(self, engine: Engine, a: Receive, b: Receive) -> bool:
        if a.destination == b.destination:
            return True
        # Two history events at different agents commute as states but not as
        # histories; ordering them both ways keeps every history reachable.
        return self.observable_dependence and self.observable(a) and self.observable(b)

    def on_node(self, engine: Engine, node: ExplorationNode) -> None:
        pass

    def pick(self, engine: Engine, node: ExplorationNode) -> Receive | None:
        return choose_exhaustive(node, self.seed)

    def has_more(self, engine: Engine, node: ExplorationNode) -> bool:
        return len(node.explored) < len(node.enabled)


class Exhaustive(_Strategy):
    pass


class DelayBounded(_Strategy):
    def __init__(self, policy: SchedulerPolicy, harness: HarnessConfig) -> None:
        super().__init__(policy, harness)
        self.delay_budget = policy.delay_budget

    def pick(self, engine: Engine, node: ExplorationNode) -> Receive | None:
        base = choose_exhaustive(node, self.seed)
        if base is None:
            return None
        rng = node_rng(node, self.seed + 1)
        r, node.delay = choose_delay_bounded(node.unexplored(), base.destination, node.budget, rng)
        return r


class SystematicRandom(_Strategy):
    restart = True

    def pick(self, engine: Engine, node: ExplorationNode) -> Receive | None:
        return self.rng.choice(node.enabled) if node.enabled else None


class Dpor(_Strategy):
    """Classic DPOR: queue every alternative that can reach the dependent step."""

    frozen = False
    observable_dependence = True

    def has_more(self, engine: Engine, node: ExplorationNode) -> bool:
        return bool(node.backtracking)

    def pick(self, engine: Engine, node: ExplorationNode) -> Receive | None:
        if not node.started:
            node.started = True
            return choose_exhaustive(node, self.seed)
        if node.backtracking:
            node.freeze = False
            return next(iter(node.backtracking.values()))
        return None

    def current_dependent(self, engine: Engine, depth: int, m: Receive, emitter: int | None) -> bool:
        return self.dependent(engine, engine.transition(depth), m)

    def latest_dependent(self, engine: Engine, m: Receive) -> int | None:
        """max i such that step i is dependent with ``m`` and not ordered before it."""
        emitter = engine.emitted_at(m.seq)
        before = engine.stack[emitter].hb if emitter is not None else 0
        for i in range(len(engine.stack) - 2, -1, -1):
            if before >> i & 1:
                continue
            if self.current_dependent(engine, i, m, emitter):
                return i
        return None

    def on_node(self, engine: Engine, node: ExplorationNode) -> None:
        for m in node.enabled:
            self.update(engine, m)

    def update(self, engine: Engine, m: Receive) -> None:
        dpor_update(engine, m, self.latest_dependent(engine, m))


def _queue(node: ExplorationNode, r: Receive) -> bool:
    if r.seq in node.explored or r.seq in node.backtracking:
        return False
    node.backtracking[r.seq] = r
    return True


def dpor_update(engine: Engine, current: Receive, i: int | None) -> list[Receive]:
    """Queue ``current`` at node ``i`` if it was co-enabled there, else every
    later step that was enabled there.  Returns what was added."""
    if i is None:
        return []
    node_i = engine.stack[i]
    if current.seq in node_i.enabled_seqs:
        return [current] if _queue(node_i, current) else []
    added = []
    for j in range(i + 1, len(engine.stack) - 1):
        t = engine.transition(j)
        if t.seq in node_i.enabled_seqs and _queue(node_i, t):
            added.append(t)
    return added


def transdpor_candidate(engine: Engine, i: int, current: Receive) -> Receive | None:
    """The step right after ``i``, taken as the root enabler of ``current``.

    Useless (and dropped) when that step was not enabled at node ``i``.
    """
    if i + 1 >= len(engine.stack) - 1:
        return None
    t = engine.transition(i + 1)
    return t if t.seq in engine.stack[i].enabled_seqs else None


def transdpor_update(engine: Engine, current: Receive, i: int | None, fallback=transdpor_candidate) -> Receive | None:
    """Queue at most one receive at node ``i`` and freeze it.

    A frozen node takes nothing.  The co-enabled ``current`` wins over the
    fallback candidate.
    """
    if i is None:
        return None
    node_i = engine.stack[i]
    if node_i.freeze:
        return None
    cand = current if current.seq in node_i.enabled_seqs else fallback(engine, i, current)
    if cand is None:
        return None
    # Freezing on an already explored candidate would lock the node for good.
    if not _queue(node_i, cand):
        return None
    node_i.freeze = True
    return cand


def _root_enabler(engine: Engine, i: int, current: Receive) -> Receive | None:
    path = [engine.transition(k) for k in range(len(engine.stack) - 1)]
    return ired_root_enabler(path, i, current, engine.stack[i].enabled_seqs)


class TransDpor(Dpor):
    frozen = True

    def update(self, engine: Engine, m: Receive) -> None:
        transdpor_update(engine, m, self.latest_dependent(engine, m))


class IRed(Dpor):
    frozen = True

    def update(self, engine: Engine, m: Receive) -> None:
        transdpor_update(engine, m, self.latest_dependent(engine, m), _root_enabler)


class LiViola(IRed):
    observable_dependence = False

    def current_dependent(self, engine: Engine, depth: int, m: Receive, emitter: int | None) -> bool:
        ordered = emitter is not None and bool(engine.stack[emitter].causal >> depth & 1)
        return are_dependent(engine.transition(depth), m, Kind.LV, self.harness, ordered)

    def update(self, engine: Engine, m: Receive) -> None:
        if self.harness.excluded(m.message.name):
            return
        liviola_update(engine, m, self.latest_dependent(engine, m), self.harness)


def liviola_update(engine: Engine, current: Receive, i: int | None, harness: HarnessConfig) -> Receive | None:
    """IRed's update; excluded messages are never queued."""

    def fallback(engine: Engine, i: int, current: Receive) -> Receive | None:
        cand = _root_enabler(engine, i, current)
        if cand is not None and harness.excluded(cand.message.name):
            return None
        return cand

    if harness.excluded(current.message.name):
        return None
    return transdpor_update(engine, current, i, fallback)


_STRATEGIES = {
    Kind.EX: Exhaustive,
    Kind.SR: SystematicRandom,
    Kind.DB: DelayBounded,
    Kind.DP: Dpor,
    Kind.TD: TransDpor,
    Kind.IR: IRed,
    Kind.LV: LiViola,
}


def make_strategy(policy: SchedulerPolicy, harness: HarnessConfig) -> _Strategy:
    return _STRATEGIES[_kind(policy)](policy, harness)


def run_systematic_random(initial, harness: HarnessConfig, behavior, cutoff: int, seed: int = 0, keep_schedules: bool = False):
    """``cutoff`` independent random schedules, each from the initial state."""
    from .exploration import explore

    return explore(initial, harness, SchedulerPolicy(Kind.SR, seed=seed), cutoff, behavior=behavior, keep_schedules=keep_schedules)
