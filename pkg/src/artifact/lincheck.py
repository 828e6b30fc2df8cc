"""Linearizability checking of complete histories.

:func:`wgl_check` is the Wing-Gong search with Lowe's state cache: walk the
event list, lift a call (and its return) whenever the sequential reference
reproduces its recorded result, and undo the most recent lift when a return
is reached first.  :func:`brute_force_check` enumerates real-time-respecting
orders directly and exists to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable

from .history import INV, History

BRUTE_FORCE_LIMIT = 8


class LinCheckError(ValueError):
    """Malformed history or unsupported operation."""


class SequentialSpec:
    """Sequential reference for a MAP (register = one-key map) or a SET.

    States are hashable so that the checker can cache them.
    """

    def __init__(self, adt: str = "MAP", default: Any = 0, initial: dict | None = None) -> None:
        self.adt = adt.upper()
        if self.adt not in ("MAP", "SET"):
            raise LinCheckError(f"unknown ADT {adt!r}")
        self.default = default
        self.initial = dict(initial or {})

    def initial_state(self) -> Hashable:
        if self.adt == "MAP":
            return tuple(sorted(self.initial.items(), key=repr))
        return frozenset(k for k, v in self.initial.items() if v)

    def apply(self, state: Hashable, op: str, key: Any = None, arg: Any = None) -> tuple[Hashable, Any]:
        if self.adt == "MAP":
            if op == "read":
                for k, v in state:  # type: ignore[union-attr]
                    if k == key:
                        return state, v
                return state, self.default
            if op == "write":
                items = dict(state)  # type: ignore[arg-type]
                items[key] = arg
                return tuple(sorted(items.items(), key=repr)), None
        else:
            present = key in state  # type: ignore[operator]
            if op == "contains":
                return state, present
            if op == "add":
                return state | {key}, not present  # type: ignore[operator]
            if op == "remove":
                return state - {key}, present  # type: ignore[operator]
        raise LinCheckError(f"unknown op {op!r} for {self.adt}")

    def __repr__(self) -> str:
        return f"SequentialSpec({self.adt!r}, default={self.default!r})"


def spec_apply(spec: SequentialSpec, state: Hashable, op: str, key: Any = None, arg: Any = None) -> tuple[Hashable, Any]:
    return spec.apply(state, op, key, arg)


@dataclass(frozen=True)
class Operation:
    index: int
    op: str
    key: Any
    arg: Any
    ret: Any
    call: int
    ret_pos: int


@dataclass(frozen=True)
class WglOutcome:
    linearizable: bool
    witness: tuple[int, ...] | None
    iterations: int


def operations(history: History) -> list[Operation]:
    """Pair every invocation with its response; the history must be complete."""
    calls: dict[int, int] = {}
    done: dict[int, Operation] = {}
    for pos, ev in enumerate(history.events):
        if ev.kind == INV:
            if ev.op_index in calls or ev.op_index in done:
                raise LinCheckError(f"operation {ev.op_index} invoked twice")
            calls[ev.op_index] = pos
        else:
            if ev.op_index not in calls:
                raise LinCheckError(f"response for operation {ev.op_index} without a pending invocation")
            cpos = calls.pop(ev.op_index)
            call = history.events[cpos]
            done[ev.op_index] = Operation(ev.op_index, call.op, call.key, call.arg, ev.ret, cpos, pos)
    if calls:
        raise LinCheckError(f"incomplete history: operations {sorted(calls)} never returned")
    return sorted(done.values(), key=lambda o: o.call)


def wgl_check(history: History, spec: SequentialSpec, per_key: bool = False) -> WglOutcome:
    if per_key and spec.adt == "MAP":
        return _per_key(history, spec)
    ops = operations(history)
    n = len(ops)
    # Doubly linked list over event slots 1..2n; slot 0 is the head sentinel.
    slot_op: list[int] = [0] * (2 * n + 1)
    slot_is_call = [False] * (2 * n + 1)
    ret_slot = [0] * n
    order = sorted([(o.call, k, True) for k, o in enumerate(ops)] + [(o.ret_pos, k, False) for k, o in enumerate(ops)])
    for slot, (_, k, is_call) in enumerate(order, start=1):
        slot_op[slot] = k
        slot_is_call[slot] = is_call
        if not is_call:
            ret_slot[k] = slot
    nxt = list(range(1, 2 * n + 2))
    nxt[2 * n] = -1
    prv = list(range(-1, 2 * n))

    def unlink(s: int) -> None:
        p, q = prv[s], nxt[s]
        nxt[p] = q
        if q != -1:
            prv[q] = p

    def relink(s: int) -> None:
        p, q = prv[s], nxt[s]
        nxt[p] = s
        if q != -1:
            prv[q] = s

    state = spec.initial_state()
    linearized = 0
    cache: set[tuple[int, Hashable]] = set()
    stack: list[tuple[int, Hashable]] = []
    entry = nxt[0]
    iterations = 0
    while nxt[0] != -1:
        iterations += 1
        k = slot_op[entry]
        if slot_is_call[entry]:
            o = ops[k]
            new_state, ret = spec.apply(state, o.op, o.key, o.arg)
            if ret == o.ret:
                mark = (linearized | (1 << k), new_state)
                if mark not in cache:
                    cache.add(mark)
                    stack.append((entry, state))
                    state = new_state
                    linearized |= 1 << k
                    unlink(entry)
                    unlink(ret_slot[k])
                    entry = nxt[0]
                    continue
            entry = nxt[entry]
        else:
            if not stack:
                return WglOutcome(False, None, iterations)
            entry, state = stack.pop()
            k = slot_op[entry]
            linearized &= ~(1 << k)
            relink(ret_slot[k])
            relink(entry)
            entry = nxt[entry]
    witness = tuple(ops[slot_op[s]].index for s, _ in stack)
    return WglOutcome(True, witness, iterations)


def _per_key(history: History, spec: SequentialSpec) -> WglOutcome:
    keys: list[Any] = []
    for ev in history.events:
        if ev.key not in keys:
            keys.append(ev.key)
    witness: list[int] = []
    iterations = 0
    for key in keys:
        sub = History(tuple(ev for ev in history.events if ev.key == key))
        out = wgl_check(sub, spec)
        iterations += out.iterations
        if not out.linearizable:
            return WglOutcome(False, None, iterations)
        witness.extend(out.witness or ())
    return WglOutcome(True, tuple(witness), iterations)


def brute_force_check(history: History, spec: SequentialSpec) -> bool:
    """Try every total order that respects real-time precedence.

    An order is abandoned at the first operation whose recorded result the
    sequential reference does not reproduce, which is equivalent to replaying
    the whole order.
    """
    ops = operations(history)
    n = len(ops)
    if n > BRUTE_FORCE_LIMIT:
        raise LinCheckError(f"brute force is limited to {BRUTE_FORCE_LIMIT} operations, got {n}")
    preds = [0] * n
    for a in range(n):
        for b in range(n):
            if ops[a].ret_pos < ops[b].call:
                preds[b] |= 1 << a
    full = (1 << n) - 1

    def extend(placed: int, state: Hashable) -> bool:
        if placed == full:
            return True
        for k in range(n):
            bit = 1 << k
            if placed & bit or preds[k] & ~placed:
                continue
            o = ops[k]
            new_state, ret = spec.apply(state, o.op, o.key, o.arg)
            if ret == o.ret and extend(placed | bit, new_state):
                return True
        return False

    return extend(0, spec.initial_state())
