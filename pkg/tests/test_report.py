import csv
import io

import pytest

from artifact.report import ROWS, ConfigMetrics, RunConfig, derive_seed, emit_report, mmss, parse_report, run, run_once


def metrics(**kw):
    base = dict(benchmark="b", harness="h", scheduler="EX", S=200, IH=0, UH=20, NL=5, TS=65.4, ST=130.2, TC=1.0, HF=17, TF=2.5)
    base.update(kw)
    return ConfigMetrics(**base)


def test_ratios():
    m = metrics()
    assert m.quality == 0.25 and m.progression == 0.1 and m.precision == 0.025
    assert m.TT == pytest.approx(66.4)
    assert metrics(S=0, UH=0).quality == 0.0


def test_mmss():
    assert mmss(65.4) == "1:05" and mmss(0.2) == "0:00" and mmss(None) == "-"


def test_csv_layout():
    text = emit_report([metrics(), metrics(scheduler="LV", HF=None, TF=None)], "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["metric", "EX", "LV"]
    assert [r[0] for r in rows[1 : len(ROWS) + 1]] == list(ROWS)
    table = {r[0]: r[1:] for r in rows[1:]}
    assert table["#S"] == ["200", "200"]
    assert table["NL/UH"] == ["25.00%", "25.00%"]
    assert table["TS"] == ["1:05", "1:05"]
    assert table["TS_ms"] == ["65400.0", "65400.0"]
    assert table["#HF"] == ["17", "-"]


def test_json_round_trip(tmp_path):
    ms = [metrics(), metrics(scheduler="SR", S=400.5, HF=None, TF=None)]
    path = tmp_path / "r.json"
    text = emit_report(ms, "json", str(path))
    assert path.read_text() == text
    assert parse_report(text) == ms
    with pytest.raises(ValueError):
        emit_report(ms, "xml")


def test_random_search_gets_twice_the_cutoff():
    assert RunConfig("register-correct", scheduler="SR", cutoff=10).budget() == 20
    assert RunConfig("register-correct", scheduler="SR", cutoff=10, sr_budget=7).budget() == 7
    assert RunConfig("register-correct", scheduler="LV", cutoff=10).budget() == 10


def test_derived_seeds_differ():
    assert derive_seed(3, 0) == 3
    assert len({derive_seed(3, r) for r in range(5)}) == 5


def test_run_once_on_buggy_register():
    m, rep = run_once(RunConfig("register-buggy", scheduler="LV", cutoff=2000))
    assert m.S == rep.schedule_count == 2000
    assert m.NL >= 1 and m.HF is not None and m.HF < m.S
    assert m.UH <= m.S


def test_run_averages_reps():
    m = run(RunConfig("register-correct", scheduler="SR", cutoff=50, reps=2))
    assert m.reps == 2 and m.S == 100 and m.NL == 0
    with pytest.raises(ValueError):
        run(RunConfig("register-correct", reps=0))
