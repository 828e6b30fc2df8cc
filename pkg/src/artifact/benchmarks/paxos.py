"""Multi-Paxos replicated map.

Every agent is an acceptor and a learner; whichever agent receives a
``Write`` proposes it, and agent 1 (the leader) proposes every ``Read``.
Each operation is proposed into the lowest log slot its proposer has not
seen decided, using proposal ids ``(round, agent)``.  The proposer counts
itself towards every quorum.  A rejection (``Nack``) makes it start over with
a higher round; losing a slot to another operation makes it move on to the
next slot.  Both cost one attempt out of ``retries + 1``.

A write is acknowledged once its operation is decided; a read is answered
from the decided log prefix below its own slot.  Operations appearing twice
in the log only count at their first slot.
"""

from __future__ import annotations

from typing import Any

from ..actors import BehaviorTable, Context, Message, Payload, SystemState, make_state

KIND = "paxos"
NO_PID = (0, 0)


def _peers(local: dict) -> list[int]:
    return [a for a in local["agents"] if a != local["id"]]


def _next_free(local: dict) -> int:
    slot = 0
    while slot in local["log"]:
        slot += 1
    return slot


def _start(local: dict, op: dict, ctx: Context) -> None:
    slot = _next_free(local)
    promised = local["promised"].get(slot, NO_PID)
    local["round"] = max(local["round"], promised[0]) + 1
    pid = (local["round"], local["id"])
    local["promised"][slot] = pid
    op.update(slot=slot, pid=pid, stage="prepare", promises=1, accepts=0, best=local["accepted"].get(slot))
    for peer in _peers(local):
        ctx.send(peer, "Prepare", Payload(key=op["record"][1], client=op["record"][3], pid=pid, slot=slot))


def _find(local: dict, slot: int, pid: Any, stage: str) -> dict | None:
    for op in local["ops"].values():
        if op["slot"] == slot and op["pid"] == pid and op["stage"] == stage:
            return op
    return None


def _retry(local: dict, op: dict, ctx: Context) -> None:
    op["attempts"] += 1
    if op["attempts"] > local["retries"]:
        del local["ops"][op["record"][3]]
        return
    _start(local, op, ctx)


def read_value(log: dict[int, tuple], key: Any, below: int) -> Any:
    seen: set[int] = set()
    value: Any = 0
    for slot in range(below):
        rec = log.get(slot)
        if rec is None or rec[3] in seen:
            continue
        seen.add(rec[3])
        if rec[0] == "w" and rec[1] == key:
            value = rec[2]
    return value


def _first_slot(log: dict[int, tuple], record: tuple) -> int:
    return min(s for s, r in log.items() if r == record)


def _respond(local: dict, record: tuple, ctx: Context) -> None:
    kind, key, _, client = record
    if kind == "w":
        ctx.send(client, "WriteAck", Payload(key=key, client=client))
    else:
        value = read_value(local["log"], key, _first_slot(local["log"], record))
        ctx.send(client, "ReadAck", Payload(key=key, value=value, client=client))


def _learn(local: dict, slot: int, record: tuple, ctx: Context) -> None:
    old = local["log"].get(slot)
    if old is not None and old != record:
        local["conflict"] = True
    local["log"][slot] = record
    op = local["ops"].get(record[3])
    if op is not None and op["record"] == record:
        del local["ops"][record[3]]
        _respond(local, record, ctx)


def _propose(local: dict, msg: Message, ctx: Context, kind: str) -> None:
    p = msg.payload
    record = (kind, p.key, p.value, p.client)
    op = {"record": record, "attempts": 0}
    local["ops"][p.client] = op
    _start(local, op, ctx)


def on_write(local: dict, msg: Message, ctx: Context) -> None:
    _propose(local, msg, ctx, "w")


def on_read(local: dict, msg: Message, ctx: Context) -> None:
    if local["id"] != local["leader"]:
        ctx.send(local["leader"], "Read", msg.payload)
        return
    _propose(local, msg, ctx, "r")


def on_prepare(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    promised = local["promised"].get(p.slot, NO_PID)
    if p.pid > promised:
        local["promised"][p.slot] = p.pid
        ctx.send(msg.sender, "Promise", Payload(key=p.key, client=p.client, pid=p.pid, slot=p.slot, params=local["accepted"].get(p.slot)))
    else:
        ctx.send(msg.sender, "Nack", Payload(key=p.key, client=p.client, pid=p.pid, slot=p.slot, params=promised))


def on_promise(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    op = _find(local, p.slot, p.pid, "prepare")
    if op is None:
        return
    op["promises"] += 1
    if p.params is not None and (op["best"] is None or p.params[0] > op["best"][0]):
        op["best"] = p.params
    if op["promises"] < local["quorum"]:
        return
    value = op["best"][1] if op["best"] is not None else op["record"]
    op.update(stage="accept", value=value, accepts=0)
    if p.pid >= local["promised"].get(p.slot, NO_PID):
        local["accepted"][p.slot] = (p.pid, value)
        op["accepts"] = 1
    for peer in _peers(local):
        ctx.send(peer, "Accept", Payload(key=p.key, client=p.client, pid=p.pid, slot=p.slot, params=value))


def on_accept(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    promised = local["promised"].get(p.slot, NO_PID)
    if p.pid >= promised:
        local["promised"][p.slot] = p.pid
        local["accepted"][p.slot] = (p.pid, p.params)
        ctx.send(msg.sender, "Accepted", Payload(key=p.key, client=p.client, pid=p.pid, slot=p.slot))
    else:
        ctx.send(msg.sender, "Nack", Payload(key=p.key, client=p.client, pid=p.pid, slot=p.slot, params=promised))


def on_accepted(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    op = _find(local, p.slot, p.pid, "accept")
    if op is None:
        return
    op["accepts"] += 1
    if op["accepts"] < local["quorum"]:
        return
    value = op["value"]
    op["stage"] = "decided"
    for peer in _peers(local):
        ctx.send(peer, "Commit", Payload(key=p.key, client=p.client, pid=p.pid, slot=p.slot, params=value))
    _learn(local, p.slot, value, ctx)
    if local["ops"].get(op["record"][3]) is op:
        _retry(local, op, ctx)


def on_nack(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    op = _find(local, p.slot, p.pid, "prepare") or _find(local, p.slot, p.pid, "accept")
    if op is None:
        return
    local["round"] = max(local["round"], p.params[0])
    _retry(local, op, ctx)


def on_commit(local: dict, msg: Message, ctx: Context) -> None:
    _learn(local, msg.payload.slot, msg.payload.params, ctx)


ACTIONS = {
    "Write": on_write,
    "Read": on_read,
    "Prepare": on_prepare,
    "Promise": on_promise,
    "Accept": on_accept,
    "Accepted": on_accepted,
    "Nack": on_nack,
    "Commit": on_commit,
}


def build_paxos_map(n: int = 3, key_count: int = 2, retries: int = 2) -> tuple[SystemState, BehaviorTable]:
    if n < 3 or n % 2 == 0:
        raise ValueError("the Paxos map needs an odd number of agents, at least 3")
    agents = list(range(1, n + 1))
    locals_ = [
        (
            a,
            KIND,
            {
                "id": a,
                "agents": agents,
                "leader": 1,
                "quorum": n // 2 + 1,
                "retries": retries,
                "keys": [f"k{i}" for i in range(key_count)],
                "round": 0,
                "promised": {},
                "accepted": {},
                "log": {},
                "ops": {},
                "conflict": False,
            },
        )
        for a in agents
    ]
    return make_state(locals_), BehaviorTable({KIND: ACTIONS})


def agreement_holds(state: SystemState) -> bool:
    """No agent saw two decisions for one slot, and all logs agree slot by slot."""
    decided: dict[int, tuple] = {}
    for agent, kind in state.kinds.items():
        if kind != KIND:
            continue
        local = state.agents[agent]
        if local["conflict"]:
            return False
        for slot, rec in local["log"].items():
            if decided.setdefault(slot, rec) != rec:
                return False
    return True
