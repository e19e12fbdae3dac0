import json
import subprocess
import sys
from pathlib import Path

import pytest

from mapfx.cli import main

DATA = Path(__file__).parent.parent / "src" / "mapfx" / "data"


def run(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_writes_plan(tmp_path, capsys):
    out_path = tmp_path / "plan.json"
    code, out, _ = run(capsys, "solve", str(DATA / "scenario1.json"),
                       "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert {a["id"] for a in doc["agents"]} == {1, 2}


def test_solve_infeasible_exit_code(capsys):
    code, _, _ = run(capsys, "solve", str(DATA / "scenario6.json"))
    assert code == 10


def test_solve_missing_file(capsys):
    code, _, err = run(capsys, "solve", "no-such-instance.json")
    assert code == 2
    assert "error" in err


def test_validate_roundtrip(capsys):
    code, out, _ = run(capsys, "validate", str(DATA / "scenario1.json"),
                       str(DATA / "scenario1_plan1.json"))
    assert code == 0
    assert json.loads(out)["is_solution"] is True


def test_explain_session_flow(tmp_path, capsys):
    sess_path = tmp_path / "session.json"
    code, out, _ = run(
        capsys, "--format", "json",
        "explain", str(DATA / "scenario1.json"),
        str(DATA / "scenario1_plan1.json"),
        '{"kind":"QW1","agent":2,"x":8}', "--session", str(sess_path),
    )
    assert code == 0
    assert json.loads(out)["kind"] == "alternative"
    code, out, _ = run(
        capsys, "--format", "json",
        "explain", str(DATA / "scenario1.json"),
        str(DATA / "scenario1_plan1.json"),
        '{"kind":"QW1","agent":1,"x":11}', "--session", str(sess_path),
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "counterfactual"
    atoms = [(a["kind"], tuple(a["args"])) for a in doc["violations_current"]]
    assert atoms == [("collision", (1, 2, 1, 7)), ("collision", (1, 2, 2, 6))]


def test_explain_premise_exit_code(capsys):
    code, out, _ = run(
        capsys, "explain", str(DATA / "scenario1.json"),
        str(DATA / "scenario1_plan1.json"), '{"kind":"QW1","agent":1,"x":7}',
    )
    assert code == 3
    assert "premise_not_observed" in out


def test_explain_qu_without_plan(capsys):
    code, out, _ = run(
        capsys, "--format", "json",
        "explain", str(DATA / "scenario6.json"), "-", '{"kind":"QU"}',
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["suggestion"] == {"remove_obstacles": [2]}


def test_bench_table_and_csv(tmp_path, capsys):
    csv_path = tmp_path / "bench.csv"
    code, out, _ = run(
        capsys, "bench", str(DATA / "scenario1.json"),
        str(DATA / "scenario1_plan1.json"),
        "--kinds", "QW1,QW2,QP1", "--csv", str(csv_path),
    )
    assert code == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "kind,instances,calls,models,avg_time_s"
    rows = {ln.split(",")[0]: ln.split(",") for ln in lines[1:]}
    # table and CSV agree
    for kind, row in rows.items():
        assert kind in out
        assert row[1] in out
    # scenario 1 plan: one QW1 instance (SAT: 1 call), one QW2 (SAT),
    # two QP1 instances (one SAT, one UNSAT -> 1 + 2 calls)
    assert rows["QW1"][1:3] == ["1", "1"]
    assert rows["QP1"][1] == "2" and rows["QP1"][2] == "3"


def test_bench_deterministic(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path in (a, b):
        code, _, _ = run(
            capsys, "bench", str(DATA / "scenario1.json"),
            str(DATA / "scenario1_plan1.json"), "--kinds", "QW1,QP1,QP2",
            "--csv", str(path),
        )
        assert code == 0

    def strip_times(text):
        return [ln.rsplit(",", 1)[0] for ln in text.strip().splitlines()]

    assert strip_times(a.read_text()) == strip_times(b.read_text())


def test_bench_list_prints_query_array(capsys):
    code, out, _ = run(
        capsys, "bench", str(DATA / "scenario1.json"),
        str(DATA / "scenario1_plan1.json"), "--kinds", "QW1,QP1", "--list",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc[0] == {"kind": "QW1", "agent": 2, "x": 8}
    assert {"kind": "QP1", "agent": 1, "l": 3} in doc


def test_examples_lists_fixtures(capsys):
    code, out, _ = run(capsys, "examples")
    assert code == 0
    assert "scenario1" in out and "m1" in out


def test_module_entrypoint_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "mapfx.cli", "examples"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "scenario1" in proc.stdout
