"""Test harnesses: what to invoke, where, and how to read the resulting traffic.

A harness file is TOML with six tables, in this order:

``[spec]``
    ADT kind (``MAP`` or ``SET``) and the initial state of the sequential
    reference (``default`` value for unknown keys, optional ``initial``).
``[targets]``
    ``agents``: ids of the agents implementing the ADT.
``[init]``
    Agent start-up directives (``leader``, ``ring``, ``join``) and the
    ``clients`` list, one request per synthetic client.
``[requests]``
    Client-facing message names bound to ``read-invocation``,
    ``write-invocation``, ``read-response`` or ``write-response``.
``[internal]``
    Agent-to-agent message names bound to ``replication`` or ``ack``.
``[liviola]``
    Per-message key location (a payload field such as ``"key"`` or
    ``"payload.key"``, or ``-1`` for "unknown until runtime") and read/write
    class, plus an ``exclude`` list.  Optional.

Example::

    [spec]
    kind = "MAP"
    default = 0

    [targets]
    agents = [1, 2]

    [init]
    leader = 1
    clients = [
      { op = "read", key = "x" },
      { op = "write", key = "x", value = 1 },
    ]

    [requests]
    Read = "read-invocation"
    ReadAck = "read-response"

    [internal]
    ReadReplica = "replication"

    [liviola]
    exclude = []
    Read = { key = "key", class = "read" }
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import tomli

from .actors import CLIENT_KIND, AgentId, Payload, SystemState

WILDCARD = -1

SECTIONS = ("spec", "targets", "init", "requests", "internal", "liviola")
_PAYLOAD_FIELDS = {f.name for f in dataclasses.fields(Payload)}


class HarnessError(ValueError):
    pass


class Category(str, enum.Enum):
    READ_INVOCATION = "read-invocation"
    WRITE_INVOCATION = "write-invocation"
    READ_RESPONSE = "read-response"
    WRITE_RESPONSE = "write-response"
    REPLICATION = "replication"
    ACK = "ack"

    @property
    def is_invocation(self) -> bool:
        return self in (Category.READ_INVOCATION, Category.WRITE_INVOCATION)

    @property
    def is_response(self) -> bool:
        return self in (Category.READ_RESPONSE, Category.WRITE_RESPONSE)


_REQUEST_CATEGORIES = {c for c in Category if c.is_invocation or c.is_response}
_INTERNAL_CATEGORIES = {Category.REPLICATION, Category.ACK}

READ_OPS = {"read", "contains"}
WRITE_OPS = {"write", "add", "remove"}


@dataclass(frozen=True)
class ClientSpec:
    op: str
    key: Any = None
    value: Any = None
    message: str | None = None


@dataclass(frozen=True)
class KeyInfo:
    path: str | int = WILDCARD
    rw: str = "both"

    @property
    def wildcard(self) -> bool:
        return self.path == WILDCARD


@dataclass(frozen=True)
class HarnessConfig:
    adt: str
    default: Any
    initial: dict[Any, Any]
    targets: tuple[AgentId, ...]
    init: dict[str, Any]
    clients: tuple[ClientSpec, ...]
    patterns: dict[str, Category]
    keys: dict[str, KeyInfo] = field(default_factory=dict)
    exclusions: frozenset[str] = frozenset()

    def request_name(self, spec: ClientSpec) -> str:
        if spec.message is not None:
            return spec.message
        wanted = Category.READ_INVOCATION if spec.op in READ_OPS else Category.WRITE_INVOCATION
        for name, cat in self.patterns.items():
            if cat is wanted:
                return name
        raise HarnessError(f"no message bound to {wanted.value} for op {spec.op!r}")

    def key_info(self, name: str) -> KeyInfo:
        return self.keys.get(name, KeyInfo())

    def excluded(self, name: str) -> bool:
        return name in self.exclusions

    def without_exclusions(self) -> HarnessConfig:
        return dataclasses.replace(self, exclusions=frozenset())


def _require(table: dict, key: str, section: str) -> Any:
    if key not in table:
        raise HarnessError(f"[{section}] is missing {key!r}")
    return table[key]


def _parse_key_path(name: str, raw: Any) -> str | int:
    if raw == WILDCARD:
        return WILDCARD
    if not isinstance(raw, str) or not raw:
        raise HarnessError(f"malformed key path for {name}: {raw!r}")
    parts = raw.split(".")
    if parts[0] == "payload":
        parts = parts[1:]
    if len(parts) != 1 or parts[0] not in _PAYLOAD_FIELDS:
        raise HarnessError(f"malformed key path for {name}: {raw!r}")
    return raw


def parse_harness(text: str) -> HarnessConfig:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise HarnessError(f"unreadable harness: {exc}") from exc
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise HarnessError(f"unknown sections: {sorted(unknown)}")
    for section in SECTIONS[:5]:
        if section not in doc:
            raise HarnessError(f"missing section [{section}]")

    spec = doc["spec"]
    adt = str(_require(spec, "kind", "spec")).upper()
    if adt not in ("MAP", "SET"):
        raise HarnessError(f"unknown ADT kind {adt!r}")
    default = spec.get("default", 0 if adt == "MAP" else False)
    initial = dict(spec.get("initial", {}))

    targets = tuple(int(a) for a in _require(doc["targets"], "agents", "targets"))

    init = dict(doc["init"])
    clients = []
    for raw in init.pop("clients", []):
        op = str(_require(raw, "op", "init"))
        if op not in READ_OPS | WRITE_OPS:
            raise HarnessError(f"unknown client op {op!r}")
        clients.append(ClientSpec(op, raw.get("key"), raw.get("value"), raw.get("message")))

    patterns: dict[str, Category] = {}
    for section, allowed in (("requests", _REQUEST_CATEGORIES), ("internal", _INTERNAL_CATEGORIES)):
        for name, raw in doc[section].items():
            try:
                cat = Category(raw)
            except ValueError:
                raise HarnessError(f"unknown category {raw!r} for {name}") from None
            if cat not in allowed:
                raise HarnessError(f"{cat.value} is not allowed in [{section}]")
            if name in patterns:
                raise HarnessError(f"duplicate binding for {name}")
            patterns[name] = cat

    keys: dict[str, KeyInfo] = {}
    exclusions: frozenset[str] = frozenset()
    liv = dict(doc.get("liviola", {}))
    if liv:
        exclusions = frozenset(liv.pop("exclude", []))
        for name, raw in liv.items():
            if not isinstance(raw, dict):
                raise HarnessError(f"[liviola] entry for {name} must be a table")
            rw = raw.get("class", "both")
            if rw not in ("read", "write", "both"):
                raise HarnessError(f"unknown class {rw!r} for {name}")
            keys[name] = KeyInfo(_parse_key_path(name, raw.get("key", WILDCARD)), rw)

    return HarnessConfig(adt, default, initial, targets, init, tuple(clients), patterns, keys, exclusions)


def load_harness(path: str | Path) -> HarnessConfig:
    return parse_harness(Path(path).read_text())


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{ " + ", ".join(f"{k} = {_toml_value(v)}" for k, v in value.items()) + " }"
    raise HarnessError(f"cannot render {value!r}")


def render_harness(config: HarnessConfig) -> str:
    """Serialize ``config`` back to harness text (normalized form)."""
    lines = ["[spec]", f'kind = "{config.adt}"', f"default = {_toml_value(config.default)}"]
    if config.initial:
        lines.append(f"initial = {_toml_value(config.initial)}")
    lines += ["", "[targets]", f"agents = {_toml_value(list(config.targets))}", "", "[init]"]
    for key, value in config.init.items():
        lines.append(f"{key} = {_toml_value(value)}")
    lines.append("clients = [")
    for c in config.clients:
        entry = {"op": c.op}
        if c.key is not None:
            entry["key"] = c.key
        if c.value is not None:
            entry["value"] = c.value
        if c.message is not None:
            entry["message"] = c.message
        lines.append(f"  {_toml_value(entry)},")
    lines.append("]")
    for section, allowed in (("requests", _REQUEST_CATEGORIES), ("internal", _INTERNAL_CATEGORIES)):
        lines += ["", f"[{section}]"]
        lines += [f'{n} = "{c.value}"' for n, c in config.patterns.items() if c in allowed]
    lines += ["", "[liviola]", f"exclude = {_toml_value(sorted(config.exclusions))}"]
    for name, info in config.keys.items():
        lines.append(f"{name} = {_toml_value({'key': info.path, 'class': info.rw})}")
    return "\n".join(lines) + "\n"


def client_records(state: SystemState) -> dict[AgentId, dict[str, Any]]:
    """Local state of every synthetic client, keyed by client id."""
    return {a: state.agents[a] for a, kind in state.kinds.items() if kind == CLIENT_KIND}


def inject_invocations(
    state: SystemState,
    config: HarnessConfig,
    startup: Iterable[tuple[AgentId, AgentId, str, Payload]] = (),
) -> SystemState:
    """Add one synthetic client per request and post every request message.

    Requests go round-robin over ``config.targets``.  ``startup`` messages
    (sender, receiver, name, payload) are posted after the requests so that
    protocol start-up interleaves with client traffic.
    """
    startup = list(startup)
    if not config.clients and not startup:
        return state
    if config.clients and not config.targets:
        raise HarnessError("harness has no target agents")
    for agent in config.targets:
        if agent not in state.agents:
            raise HarnessError(f"target agent {agent} does not exist")
    out = state.copy()
    first = max(out.agents, default=0) + 1
    for i, spec in enumerate(config.clients):
        client = first + i
        out.agents[client] = {"index": i, "op": spec.op, "key": spec.key, "value": spec.value}
        out.kinds[client] = CLIENT_KIND
    for i, spec in enumerate(config.clients):
        client = first + i
        target = config.targets[i % len(config.targets)]
        out.post(client, target, config.request_name(spec), Payload(key=spec.key, value=spec.value, client=client))
    for sender, receiver, name, payload in startup:
        out.post(sender, receiver, name, payload)
    return out


def classify(name: str, receiver_is_client: bool, config: HarnessConfig) -> Category | None:
    """Category bound to a message name; ``None`` for unbound internal traffic."""
    cat = config.patterns.get(name)
    if receiver_is_client and (cat is None or not cat.is_response):
        raise HarnessError(f"client-bound message {name!r} is not bound to a response category")
    return cat


def key_of(payload: Payload, name: str, config: HarnessConfig) -> Any:
    """Key a message targets, or :data:`WILDCARD` when it cannot be told."""
    info = config.key_info(name)
    if info.wildcard:
        return WILDCARD
    attr = str(info.path).split(".")[-1]
    key = getattr(payload, attr, None)
    return WILDCARD if key is None else key
