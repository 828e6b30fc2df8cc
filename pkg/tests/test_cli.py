import json

from artifact.cli import main
from artifact.history import History, dump_history


def test_check_correct_register(capsys):
    assert main(["check", "--benchmark", "register-correct", "--scheduler", "LV,IR", "--cutoff", "100", "--reps", "1"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "metric,LV,IR"


def test_check_finds_violations(tmp_path, capsys):
    dump = tmp_path / "s.json"
    code = main(
        [
            "check",
            "--benchmark",
            "register-buggy",
            "--scheduler",
            "LV",
            "--cutoff",
            "1000",
            "--reps",
            "1",
            "--emit",
            "json",
            "--dump-schedules",
            str(dump),
        ]
    )
    assert code == 3
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"] == ["LV"] and doc["configs"][0]["NL"] >= 1
    [run] = json.loads(dump.read_text())
    assert len(run["schedule_list"]) == 1000


def test_check_bad_input(capsys):
    assert main(["check", "--benchmark", "register-correct", "--harness", "/no/such.toml", "--cutoff", "5", "--reps", "1"]) == 2
    assert main(["check", "--benchmark", "register-correct", "--cutoff", "0"]) == 2


def test_lincheck_exit_codes(tmp_path, capsys):
    ok = History.from_ops([("inv", 0, "write", "x", 1), ("res", 0), ("inv", 1, "read", "x"), ("res", 1, 1)])
    bad = History.from_ops([("inv", 0, "write", "x", 1), ("res", 0), ("inv", 1, "read", "x"), ("res", 1, 0)])
    (tmp_path / "ok.json").write_text(dump_history(ok))
    (tmp_path / "bad.json").write_text(dump_history(bad))
    (tmp_path / "junk.json").write_text("{")
    assert main(["lincheck", str(tmp_path / "ok.json")]) == 0
    assert "linearizable: 0 1" in capsys.readouterr().out
    assert main(["lincheck", str(tmp_path / "bad.json"), "--spec", "MAP"]) == 1
    assert main(["lincheck", str(tmp_path / "bad.json"), "--default", "1"]) == 1
    assert main(["lincheck", str(tmp_path / "junk.json")]) == 2
    assert main(["lincheck", str(tmp_path / "missing.json")]) == 2
