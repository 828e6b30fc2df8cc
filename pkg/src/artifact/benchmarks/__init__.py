"""Bundled actor systems, looked up by name."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable

from ..actors import BehaviorTable, Payload, SystemState
from ..harness import HarnessConfig, inject_invocations, load_harness, parse_harness
from .adr import build_adr
from .buggy_register import build_buggy_register
from .chord import build_chord, join_messages
from .paxos import agreement_holds, build_paxos_map
from .register import build_correct_register

Startup = list[tuple[int, int, str, Payload]]


@dataclass(frozen=True)
class Benchmark:
    name: str
    build: Callable[..., tuple[SystemState, BehaviorTable]]
    harnesses: dict[str, str]
    default_harness: str
    startup: Callable[[HarnessConfig], Startup] = field(default=lambda config: [])
    invariant: Callable[[SystemState], bool] | None = None


def _chord_startup(config: HarnessConfig) -> Startup:
    join = config.init.get("join")
    if not join:
        return []
    return join_messages(int(join["node"]), int(join["via"]))


BENCHMARKS: dict[str, Benchmark] = {
    "register-correct": Benchmark(
        "register-correct",
        build_correct_register,
        {"2r1w": "register-2r1w.toml", "2r2w": "register-2r2w.toml"},
        "2r1w",
    ),
    "register-buggy": Benchmark("register-buggy", build_buggy_register, {"2r1w": "buggy-2r1w.toml"}, "2r1w"),
    "register-adr": Benchmark("register-adr", build_adr, {"2r2w": "adr-2r2w.toml"}, "2r2w"),
    "openchord": Benchmark("openchord", build_chord, {"chord-join": "chord-join.toml"}, "chord-join", _chord_startup),
    "paxos-map": Benchmark(
        "paxos-map", build_paxos_map, {"paxos-2r1w": "paxos-2r1w.toml"}, "paxos-2r1w", invariant=agreement_holds
    ),
}


def bundled_harness_text(filename: str) -> str:
    return resources.files("artifact").joinpath("harnesses", filename).read_text()


def resolve_harness(benchmark: Benchmark, harness: str | None) -> HarnessConfig:
    """A bundled harness by short name or file name, else a path on disk."""
    if harness is None:
        harness = benchmark.default_harness
    if harness in benchmark.harnesses:
        return parse_harness(bundled_harness_text(benchmark.harnesses[harness]))
    if harness in benchmark.harnesses.values():
        return parse_harness(bundled_harness_text(harness))
    return load_harness(harness)


def get_benchmark(name: str) -> Benchmark:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}; expected one of {sorted(BENCHMARKS)}") from None


def prepare(name: str, harness: str | HarnessConfig | None = None, **params: Any) -> tuple[SystemState, BehaviorTable, HarnessConfig]:
    """Build ``name``, load its harness and inject the client requests."""
    bench = get_benchmark(name)
    config = harness if isinstance(harness, HarnessConfig) else resolve_harness(bench, harness)
    state, behavior = bench.build(**params)
    return inject_invocations(state, config, bench.startup(config)), behavior, config


__all__ = [
    "BENCHMARKS",
    "Benchmark",
    "build_adr",
    "build_buggy_register",
    "build_chord",
    "build_correct_register",
    "build_paxos_map",
    "get_benchmark",
    "prepare",
    "resolve_harness",
]
