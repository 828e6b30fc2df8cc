"""Run configurations and tabulate their metrics.

A configuration is one benchmark, one harness and one scheduler.  Each run
explores, then checks every unique complete history with WGL in the order
the histories were first produced.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable

from .benchmarks import prepare
from .exploration import DEFAULT_CUTOFF, ExplorationReport, explore, stateless_time_estimate
from .harness import HarnessConfig
from .lincheck import SequentialSpec, wgl_check
from .schedulers import Kind, SchedulerPolicy

ROWS = ("#S", "#IH", "#UH", "#NL", "NL/UH", "UH/S", "NL/S", "TS", "ST", "TC", "TT", "#HF", "TF")
DURATION_ROWS = ("TS", "ST", "TC", "TT", "TF")


@dataclass
class ConfigMetrics:
    benchmark: str
    harness: str
    scheduler: str
    S: float
    IH: float
    UH: float
    NL: float
    TS: float
    ST: float
    TC: float
    HF: float | None = None
    TF: float | None = None
    exhausted: bool = False
    reps: int = 1

    @property
    def TT(self) -> float:
        return self.TS + self.TC

    @property
    def quality(self) -> float:
        return self.NL / self.UH if self.UH else 0.0

    @property
    def progression(self) -> float:
        return self.UH / self.S if self.S else 0.0

    @property
    def precision(self) -> float:
        return self.NL / self.S if self.S else 0.0

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.update(TT=self.TT, quality=self.quality, progression=self.progression, precision=self.precision)
        return d


@dataclass(frozen=True)
class RunConfig:
    benchmark: str
    harness: str | None = None
    scheduler: str = "EX"
    cutoff: int = DEFAULT_CUTOFF
    seed: int = 0
    reps: int = 3
    delay_budget: int = 2
    sr_budget: int | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def budget(self) -> int:
        """Schedules to explore; random search gets twice the cutoff unless told otherwise."""
        if Kind(self.scheduler.upper()) is Kind.SR:
            return self.sr_budget if self.sr_budget is not None else 2 * self.cutoff
        return self.cutoff


@dataclass
class CheckResult:
    nl_indices: list[int]
    check_time: float
    first_bad_index: int | None
    first_bad_time: float | None


def check_histories(report: ExplorationReport, harness: HarnessConfig, per_key: bool = False) -> CheckResult:
    spec = SequentialSpec(harness.adt, harness.default, harness.initial)
    t0 = time.perf_counter()
    bad: list[int] = []
    first_index = first_time = None
    for pos, u in enumerate(report.unique):
        if not u.history.complete:
            continue
        if not wgl_check(u.history, spec, per_key=per_key).linearizable:
            bad.append(pos)
            if first_index is None or u.first_index < first_index:
                first_index, first_time = u.first_index, u.first_time
    return CheckResult(bad, time.perf_counter() - t0, first_index, first_time)


def derive_seed(seed: int, rep: int) -> int:
    return seed if rep == 0 else seed * 1_000_003 + rep


def run_once(config: RunConfig, seed: int | None = None, keep_schedules: bool = False) -> tuple[ConfigMetrics, ExplorationReport]:
    initial, behavior, harness = prepare(config.benchmark, config.harness, **config.params)
    policy = SchedulerPolicy(config.scheduler, config.delay_budget, config.seed if seed is None else seed)
    rep = explore(initial, harness, policy, config.budget(), behavior=behavior, keep_schedules=keep_schedules)
    checked = check_histories(rep, harness)
    complete = len(rep.complete_histories())
    metrics = ConfigMetrics(
        benchmark=config.benchmark,
        harness=config.harness or "default",
        scheduler=policy.kind.value,  # type: ignore[union-attr]
        S=rep.schedule_count,
        IH=rep.incomplete,
        UH=complete,
        NL=len(checked.nl_indices),
        TS=rep.elapsed,
        ST=stateless_time_estimate(rep),
        TC=checked.check_time,
        HF=None if checked.first_bad_index is None else checked.first_bad_index - 1,
        TF=checked.first_bad_time,
        exhausted=rep.exhausted,
    )
    return metrics, rep


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def run(config: RunConfig) -> ConfigMetrics:
    """Average ``config.reps`` runs with derived seeds."""
    if config.reps < 1:
        raise ValueError("reps must be at least 1")
    runs = [run_once(config, derive_seed(config.seed, r))[0] for r in range(config.reps)]
    hfs = [m.HF for m in runs if m.HF is not None]
    tfs = [m.TF for m in runs if m.TF is not None]
    return ConfigMetrics(
        benchmark=runs[0].benchmark,
        harness=runs[0].harness,
        scheduler=runs[0].scheduler,
        S=_mean([m.S for m in runs]),
        IH=_mean([m.IH for m in runs]),
        UH=_mean([m.UH for m in runs]),
        NL=_mean([m.NL for m in runs]),
        TS=_mean([m.TS for m in runs]),
        ST=_mean([m.ST for m in runs]),
        TC=_mean([m.TC for m in runs]),
        HF=_mean(hfs) if hfs else None,
        TF=_mean(tfs) if tfs else None,
        exhausted=all(m.exhausted for m in runs),
        reps=config.reps,
    )


def mmss(seconds: float | None) -> str:
    if seconds is None:
        return "-"
    whole = int(round(seconds))
    return f"{whole // 60}:{whole % 60:02d}"


def _count(value: float | None) -> str:
    if value is None:
        return "-"
    return str(int(value)) if float(value).is_integer() else f"{value:.1f}"


def _cell(m: ConfigMetrics, row: str) -> str:
    values = {
        "#S": _count(m.S),
        "#IH": _count(m.IH),
        "#UH": _count(m.UH),
        "#NL": _count(m.NL),
        "NL/UH": f"{100 * m.quality:.2f}%",
        "UH/S": f"{100 * m.progression:.2f}%",
        "NL/S": f"{100 * m.precision:.2f}%",
        "TS": mmss(m.TS),
        "ST": mmss(m.ST),
        "TC": mmss(m.TC),
        "TT": mmss(m.TT),
        "#HF": _count(m.HF),
        "TF": mmss(m.TF),
    }
    return values[row]


def _ms(value: float | None) -> float | None:
    return None if value is None else round(value * 1000, 3)


def table(metrics: Iterable[ConfigMetrics]) -> tuple[list[str], list[list[str]]]:
    """Rows are metrics, one column per configuration; durations also in ms."""
    metrics = list(metrics)
    header = ["metric"] + [m.scheduler for m in metrics]
    rows = [[row] + [_cell(m, row) for m in metrics] for row in ROWS]
    for row in DURATION_ROWS:
        rows.append([f"{row}_ms"] + [("-" if _ms(getattr(m, row)) is None else str(_ms(getattr(m, row)))) for m in metrics])
    return header, rows


def emit_report(metrics: Iterable[ConfigMetrics], fmt: str = "csv", path: str | None = None) -> str:
    metrics = list(metrics)
    if fmt == "csv":
        header, rows = table(metrics)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    elif fmt == "json":
        header, rows = table(metrics)
        text = json.dumps(
            {
                "columns": header[1:],
                "rows": {r[0]: r[1:] for r in rows},
                "configs": [m.to_dict() for m in metrics],
            },
            indent=2,
        )
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def parse_report(text: str, fmt: str = "json") -> list[ConfigMetrics]:
    """Read back the configurations of an emitted JSON report."""
    if fmt != "json":
        raise ValueError("only JSON reports carry the full metrics")
    doc = json.loads(text)
    out = []
    for cfg in doc["configs"]:
        fields = {k: v for k, v in cfg.items() if k not in ("TT", "quality", "progression", "precision")}
        out.append(ConfigMetrics(**fields))
    return out
