"""Client-visible histories: invocation/response events and their JSON form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Any, Iterable

INV = "inv"
RES = "res"


@dataclass(frozen=True)
class HistoryEvent:
    kind: str
    op_index: int
    op: str
    key: Any = None
    arg: Any = None
    ret: Any = None
    client: int | None = None

    def key_tuple(self) -> tuple:
        return (self.kind, self.op, self.key, self.arg, self.ret, self.client)

    def __str__(self) -> str:
        if self.kind == INV:
            args = ", ".join(str(a) for a in (self.op, self.key, self.arg) if a is not None)
            return f"inv{self.op_index}({args})"
        return f"res{self.op_index}({'' if self.ret is None else self.ret})"


@dataclass(frozen=True)
class History:
    events: tuple[HistoryEvent, ...]

    @property
    def complete(self) -> bool:
        open_ops: set[int] = set()
        for ev in self.events:
            if ev.kind == INV:
                open_ops.add(ev.op_index)
            else:
                open_ops.discard(ev.op_index)
        return not open_ops

    def key(self) -> tuple:
        return tuple(ev.key_tuple() for ev in self.events)

    def __len__(self) -> int:
        return len(self.events)

    def __str__(self) -> str:
        return "; ".join(str(ev) for ev in self.events)

    @classmethod
    def from_ops(cls, events: Iterable[tuple]) -> History:
        """Build from compact tuples: ``("inv", i, op, key, arg)`` / ``("res", i, ret)``.

        The op, key and argument of a response are copied from its invocation.
        """
        out: list[HistoryEvent] = []
        calls: dict[int, HistoryEvent] = {}
        for raw in events:
            if raw[0] == INV:
                _, i, op, *rest = raw
                key = rest[0] if rest else None
                arg = rest[1] if len(rest) > 1 else None
                ev = HistoryEvent(INV, i, op, key, arg, None, i)
                calls[i] = ev
            else:
                _, i, *rest = raw
                call = calls[i]
                ev = HistoryEvent(RES, i, call.op, call.key, call.arg, rest[0] if rest else None, call.client)
            out.append(ev)
        return cls(tuple(out))


def dump_history(history: History, adt: str = "MAP", default: Any = 0) -> str:
    return json.dumps({"adt": adt, "default": default, "events": [asdict(e) for e in history.events]}, indent=2)


def load_history(text: str) -> tuple[History, str, Any]:
    """Parse the JSON form; returns (history, adt kind, default value)."""
    doc = json.loads(text)
    events = tuple(HistoryEvent(**e) for e in doc["events"])
    return History(events), doc.get("adt", "MAP"), doc.get("default", 0)
