"""Register variant that acknowledges writes before replicating them.

Two defects: the leader answers ``WriteAck`` as soon as it has stored the
value, and reads return whatever the first replica to answer holds.  A
third, rarer path answers a read with a value nobody wrote; it is seeded so
that every replay of a schedule gives the same answer.
"""

from __future__ import annotations

import random
import zlib

from ..actors import BehaviorTable, Context, Message, Payload, SystemState, make_state
from . import register

KIND = "buggy-register"
THIN_AIR_RATE = 0.05


def on_write(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    if local["leader"] != local["id"]:
        ctx.send(local["leader"], "Write", p)
        return
    local["reg"] = p.value
    ctx.send(p.client, "WriteAck", Payload(key=p.key, client=p.client))
    for peer in register._peers(local):
        ctx.send(peer, "WriteReplica", Payload(key=p.key, value=p.value, client=p.client, params=p.client))


def on_write_replica_ack(local: dict, msg: Message, ctx: Context) -> None:
    pass


def on_read_replica_ack(local: dict, msg: Message, ctx: Context) -> None:
    tag = msg.payload.params
    tracker = local["reads"].get(tag)
    if tracker is None:
        return
    tracker["acks"] += 1
    if tracker["acks"] < local["quorum"]:
        return
    del local["reads"][tag]
    value = msg.payload.value
    # Keyed on the order this agent saw its messages: replays agree, interleavings differ.
    rng = random.Random(f"{local['seed']}/{tag}/{local['trace']}")
    if rng.random() < THIN_AIR_RATE:
        value = rng.randint(100, 999)
    ctx.send(tracker["client"], "ReadAck", Payload(key=msg.payload.key, value=value, client=tracker["client"]))


def _counting(action):
    def counted(local: dict, msg: Message, ctx: Context) -> None:
        local["trace"] = zlib.crc32(f"{local['trace']}:{msg.seq}".encode())
        action(local, msg, ctx)

    counted.__name__ = action.__name__
    return counted


_ACTIONS = dict(register.ACTIONS)
_ACTIONS.update(
    {
        "Write": on_write,
        "WriteReplicaAck": on_write_replica_ack,
        "ReadReplicaAck": on_read_replica_ack,
    }
)
ACTIONS = {name: _counting(action) for name, action in _ACTIONS.items()}


def build_buggy_register(n: int = 3, qrm: int = 2, seed: int = 0) -> tuple[SystemState, BehaviorTable]:
    if n != 3:
        raise ValueError("the buggy register is defined for 3 agents")
    agents = list(range(1, n + 1))
    locals_ = []
    for a in agents:
        local = register.register_local(a, agents, qrm)
        local["seed"] = seed
        local["trace"] = 0
        locals_.append((a, KIND, local))
    return make_state(locals_), BehaviorTable({KIND: ACTIONS})
