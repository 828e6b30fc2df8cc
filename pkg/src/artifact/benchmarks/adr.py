"""All-leader register: every agent coordinates the requests it receives.

Writes carry a tag ``(counter, agent)``.  A replica that holds, or is itself
coordinating, a write with a higher tag refuses a competing one with a
``WriteNack``; the loser bumps its counter past what it has seen and tries
again, at most ``retries`` times, after which the client is never answered.
Reads ask every peer and return the value with the highest tag among a
quorum.
"""

from __future__ import annotations

from ..actors import BehaviorTable, Context, Message, Payload, SystemState, make_state

KIND = "adr"


def _peers(local: dict) -> list[int]:
    return [a for a in local["agents"] if a != local["id"]]


def _start_round(local: dict, op: dict, ctx: Context) -> None:
    local["counter"] += 1
    op["tag"] = (local["counter"], local["id"])
    op["acks"] = 1
    op["nacks"] = 0
    if op["tag"] > local["tag"]:
        local["tag"] = op["tag"]
        local["reg"] = op["value"]
    for peer in _peers(local):
        ctx.send(peer, "WriteReplica", Payload(key=op["key"], value=op["value"], client=op["client"], params=op["tag"]))


def on_write(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    op = {"client": p.client, "key": p.key, "value": p.value, "attempts": 0}
    local["active"][p.client] = op
    _start_round(local, op, ctx)


def on_write_replica(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    tag = tuple(p.params)
    competing = [op["tag"] for op in local["active"].values() if op["tag"] > tag]
    if local["tag"] > tag:
        competing.append(local["tag"])
    if competing:
        ctx.send(msg.sender, "WriteNack", Payload(key=p.key, client=p.client, params=(tag, max(competing))))
        return
    if tag > local["tag"]:
        local["tag"] = tag
        local["reg"] = p.value
    ctx.send(msg.sender, "WriteReplicaAck", Payload(key=p.key, client=p.client, params=tag))


def on_write_replica_ack(local: dict, msg: Message, ctx: Context) -> None:
    op = local["active"].get(msg.payload.client)
    if op is None or op["tag"] != tuple(msg.payload.params):
        return
    op["acks"] += 1
    if op["acks"] == local["quorum"]:
        del local["active"][msg.payload.client]
        ctx.send(op["client"], "WriteAck", Payload(key=op["key"], client=op["client"]))


def on_write_nack(local: dict, msg: Message, ctx: Context) -> None:
    op = local["active"].get(msg.payload.client)
    tag, winner = msg.payload.params
    if op is None or op["tag"] != tuple(tag):
        return
    local["counter"] = max(local["counter"], winner[0])
    op["attempts"] += 1
    if op["attempts"] > local["retries"]:
        del local["active"][msg.payload.client]
        return
    _start_round(local, op, ctx)


def on_read(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    local["reads"][p.client] = {"acks": 1, "best": (local["tag"], local["reg"])}
    for peer in _peers(local):
        ctx.send(peer, "ReadReplica", Payload(key=p.key, client=p.client))


def on_read_replica(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    ctx.send(msg.sender, "ReadReplicaAck", Payload(key=p.key, value=local["reg"], client=p.client, params=local["tag"]))


def on_read_replica_ack(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    tracker = local["reads"].get(p.client)
    if tracker is None:
        return
    tracker["acks"] += 1
    tracker["best"] = max(tracker["best"], (tuple(p.params), p.value))
    if tracker["acks"] == local["quorum"]:
        del local["reads"][p.client]
        ctx.send(p.client, "ReadAck", Payload(key=p.key, value=tracker["best"][1], client=p.client))


ACTIONS = {
    "Write": on_write,
    "Read": on_read,
    "WriteReplica": on_write_replica,
    "WriteReplicaAck": on_write_replica_ack,
    "WriteNack": on_write_nack,
    "ReadReplica": on_read_replica,
    "ReadReplicaAck": on_read_replica_ack,
}


def build_adr(n: int = 2, retries: int = 3, qrm: int | None = None) -> tuple[SystemState, BehaviorTable]:
    if n < 2:
        raise ValueError("ADR needs at least 2 agents")
    quorum = qrm if qrm is not None else n // 2 + 1
    agents = list(range(1, n + 1))
    locals_ = [
        (
            a,
            KIND,
            {
                "id": a,
                "agents": agents,
                "quorum": quorum,
                "retries": retries,
                "reg": 0,
                "tag": (0, 0),
                "counter": 0,
                "active": {},
                "reads": {},
            },
        )
        for a in agents
    ]
    return make_state(locals_), BehaviorTable({KIND: ACTIONS})
