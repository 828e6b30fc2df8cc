"""Two-node Chord ring with a join in flight.

Node ids and key hashes share a ring of ``RING_SIZE`` positions; the hash is
the identity on the key's trailing number (``"k1"`` hashes to 1).  A node
owns the keys in ``(pred, id]``.  A joining node believes it is its own
successor, hence owns every key, until both ``SuccFound`` and ``UpdatePred``
have reached it.  Until then it answers reads from its own, empty, store:
that is the defect this benchmark exists to expose.
"""

from __future__ import annotations

import re
from typing import Any

from ..actors import BehaviorTable, Context, Message, Payload, SystemState, make_state

KIND = "chord"
RING_SIZE = 16


def key_hash(key: Any) -> int:
    if isinstance(key, int):
        return key % RING_SIZE
    m = re.search(r"(\d+)$", str(key))
    if m is None:
        raise ValueError(f"cannot hash key {key!r}")
    return int(m.group(1)) % RING_SIZE


def in_interval(x: int, lo: int, hi: int) -> bool:
    """x in the ring interval (lo, hi]."""
    if lo < hi:
        return lo < x <= hi
    return x > lo or x <= hi


def owns(local: dict, h: int) -> bool:
    if local["succ"] == local["id"] or not local["joined"]:
        return True
    return in_interval(h, local["pred"], local["id"])


def _handle_locally(local: dict, p: Payload, write: bool, reply_to: int, ctx: Context) -> None:
    if write:
        local["store"][p.key] = p.value
        ctx.send(reply_to, "IntWriteResp", Payload(key=p.key, client=p.client))
    else:
        ctx.send(reply_to, "IntReadResp", Payload(key=p.key, value=local["store"].get(p.key, 0), client=p.client))


def _entry(write: bool):
    def action(local: dict, msg: Message, ctx: Context) -> None:
        p = msg.payload
        if owns(local, key_hash(p.key)):
            _handle_locally(local, p, write, local["id"], ctx)
        else:
            ctx.send(local["succ"], "IntWrite" if write else "IntRead", Payload(key=p.key, value=p.value, client=p.client, params=local["id"]))

    return action


def _internal(write: bool):
    def action(local: dict, msg: Message, ctx: Context) -> None:
        p = msg.payload
        if owns(local, key_hash(p.key)):
            _handle_locally(local, p, write, p.params, ctx)
        else:
            ctx.send(local["succ"], msg.name, p)

    return action


def on_int_read_resp(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    ctx.send(p.client, "ReadResp", Payload(key=p.key, value=p.value, client=p.client))


def on_int_write_resp(local: dict, msg: Message, ctx: Context) -> None:
    p = msg.payload
    ctx.send(p.client, "WriteResp", Payload(key=p.key, client=p.client))


def on_find_succ(local: dict, msg: Message, ctx: Context) -> None:
    joining = msg.payload.key
    if local["succ"] != local["id"] and not in_interval(joining, local["id"], local["succ"]):
        ctx.send(local["succ"], "FindSucc", msg.payload)
        return
    old_succ = local["succ"]
    pred_of_new = local["id"]
    moved = tuple(sorted((k, v) for k, v in local["store"].items() if in_interval(key_hash(k), pred_of_new, joining)))
    for k, _ in moved:
        del local["store"][k]
    local["succ"] = joining
    if local["pred"] is None or local["pred"] == local["id"]:
        local["pred"] = joining
    ctx.send(joining, "SuccFound", Payload(key=joining, value=old_succ, params=moved))
    ctx.send(joining, "UpdatePred", Payload(key=joining, value=pred_of_new))


def _maybe_joined(local: dict) -> None:
    local["joined"] = local["succ"] != local["id"] and local["pred"] is not None


def on_succ_found(local: dict, msg: Message, ctx: Context) -> None:
    local["succ"] = msg.payload.value
    for k, v in msg.payload.params or ():
        local["store"][k] = v
    _maybe_joined(local)


def on_update_pred(local: dict, msg: Message, ctx: Context) -> None:
    local["pred"] = msg.payload.value
    _maybe_joined(local)


ACTIONS = {
    "Read": _entry(False),
    "Write": _entry(True),
    "IntRead": _internal(False),
    "IntWrite": _internal(True),
    "IntReadResp": on_int_read_resp,
    "IntWriteResp": on_int_write_resp,
    "FindSucc": on_find_succ,
    "SuccFound": on_succ_found,
    "UpdatePred": on_update_pred,
}


def build_chord(joined: int = 1, joining: int = 2) -> tuple[SystemState, BehaviorTable]:
    if joined == joining:
        raise ValueError("the joining node needs its own id")
    state = make_state(
        [
            (joined, KIND, {"id": joined, "succ": joined, "pred": joined, "joined": True, "store": {}}),
            (joining, KIND, {"id": joining, "succ": joining, "pred": None, "joined": False, "store": {}}),
        ]
    )
    return state, BehaviorTable({KIND: ACTIONS})


def join_messages(joining: int = 2, via: int = 1) -> list[tuple[int, int, str, Payload]]:
    return [(joining, via, "FindSucc", Payload(key=joining))]
