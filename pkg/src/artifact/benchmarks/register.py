"""Primary/backup distributed register.

Agent 1 leads.  Backups forward client requests to it; the leader
replicates each request to its peers and answers the client once a quorum
of acknowledgements (its own included) has come in.
"""

from __future__ import annotations

from typing import Any

from ..actors import BehaviorTable, Context, Message, Payload, SystemState, make_state

KIND = "register"
KEY = "x"


def _peers(local: dict) -> list[int]:
    return [a for a in local["agents"] if a != local["id"]]


def on_i_am_leader(local: dict, msg: Message, ctx: Context) -> None:
    local["leader"] = msg.sender


def on_write(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    if local["leader"] != local["id"]:
        ctx.send(local["leader"], "Write", p)
        return
    tag = p.client
    local["writes"][tag] = {"acks": 1, "client": p.client}
    local["reg"] = p.value
    for peer in _peers(local):
        ctx.send(peer, "WriteReplica", Payload(key=p.key, value=local["reg"], client=p.client, params=tag))


def on_read(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    if local["leader"] != local["id"]:
        ctx.send(local["leader"], "Read", p)
        return
    tag = p.client
    local["reads"][tag] = {"acks": 1, "client": p.client, "value": local["reg"]}
    for peer in _peers(local):
        ctx.send(peer, "ReadReplica", Payload(key=p.key, client=p.client, params=tag))


def on_write_replica(local: dict, msg: Message, ctx: Context) -> None:
    local["reg"] = msg.payload.value
    ctx.send(msg.sender, "WriteReplicaAck", Payload(key=msg.payload.key, client=msg.payload.client, params=msg.payload.params))


def on_read_replica(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    ctx.send(msg.sender, "ReadReplicaAck", Payload(key=p.key, value=local["reg"], client=p.client, params=p.params))


def on_write_replica_ack(local: dict, msg: Message, ctx: Context) -> None:
    tracker = local["writes"].get(msg.payload.params)
    if tracker is None:
        return
    tracker["acks"] += 1
    if tracker["acks"] == local["quorum"]:
        del local["writes"][msg.payload.params]
        ctx.send(tracker["client"], "WriteAck", Payload(key=msg.payload.key, client=tracker["client"]))


def on_read_replica_ack(local: dict, msg: Message, ctx: Context) -> None:
    tracker = local["reads"].get(msg.payload.params)
    if tracker is None:
        return
    tracker["acks"] += 1
    if tracker["acks"] == local["quorum"]:
        del local["reads"][msg.payload.params]
        ctx.send(tracker["client"], "ReadAck", Payload(key=msg.payload.key, value=local["reg"], client=tracker["client"]))


ACTIONS = {
    "IAmLeader": on_i_am_leader,
    "Write": on_write,
    "Read": on_read,
    "WriteReplica": on_write_replica,
    "ReadReplica": on_read_replica,
    "WriteReplicaAck": on_write_replica_ack,
    "ReadReplicaAck": on_read_replica_ack,
}


def register_local(agent: int, agents: list[int], quorum: int, leader: int = 1, initial: Any = 0) -> dict:
    return {
        "id": agent,
        "agents": list(agents),
        "leader": leader,
        "quorum": quorum,
        "reg": initial,
        "writes": {},
        "reads": {},
    }


def build_correct_register(n: int = 2, qrm: int = 2) -> tuple[SystemState, BehaviorTable]:
    if n < 2:
        raise ValueError("the register needs at least 2 agents")
    if not 1 <= qrm <= n:
        raise ValueError("quorum must be between 1 and the agent count")
    agents = list(range(1, n + 1))
    state = make_state((a, KIND, register_local(a, agents, qrm)) for a in agents)
    return state, BehaviorTable({KIND: ACTIONS})
