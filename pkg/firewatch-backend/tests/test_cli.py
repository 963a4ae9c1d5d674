import csv
import json

import pytest

from firewatch_cli import EXIT_INVALID, EXIT_OK, main


@pytest.fixture
def quick_scenario(tmp_path, reference_path):
    """Reference scenario cut down to a few cheap steps."""
    document = json.loads(reference_path.read_text())
    document["sim"].update({"steps": 3, "n_particles": 120})
    document["planner"]["rollout_particles"] = 20
    path = tmp_path / "quick.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_validate_reference_scenario(reference_path):
    assert main(["--quiet", "validate", "--scenario", str(reference_path)]) == EXIT_OK


def test_validate_rejects_bad_scenario(tmp_path, reference_path):
    document = json.loads(reference_path.read_text())
    document["sim"]["dt"] = -1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    assert main(["--quiet", "validate", "--scenario", str(path)]) == EXIT_INVALID



def test_validate_rejects_non_utf8_file(tmp_path):
    path = tmp_path / "binary.json"
    path.write_bytes(b"\xff\xfe\x00bad")
    assert main(["--quiet", "validate", "--scenario", str(path)]) == EXIT_INVALID

def test_unknown_controller(tmp_path, quick_scenario):
    argv = ["--quiet", "run", "--scenario", str(quick_scenario), "--controller", "greedy",
            "--out", str(tmp_path / "out")]
    assert main(argv) == EXIT_INVALID


def test_run_is_byte_for_byte_repeatable(tmp_path, quick_scenario):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        argv = ["--quiet", "run", "--scenario", str(quick_scenario), "--controller", "lcb:1",
                "--seed", "17", "--out", str(out)]
        assert main(argv) == EXIT_OK
        outputs.append((out / "trace.jsonl").read_bytes())
    assert outputs[0] == outputs[1]

    records = [json.loads(line) for line in outputs[0].decode("utf-8").splitlines()]
    assert [r["step"] for r in records] == [1, 2, 3]
    assert all(r["controller"] == "lcb:1" and r["seed"] == 17 for r in records)

    fronts = json.loads((tmp_path / "a" / "fronts.json").read_text())
    assert len(fronts["episodes"]) == 1
    assert len(fronts["episodes"][0]["steps"]) == 3


def test_run_writes_planner_diagnostics(tmp_path, quick_scenario):
    debug = tmp_path / "planner.jsonl"
    argv = ["--quiet", "run", "--scenario", str(quick_scenario), "--controller", "myopic",
            "--out", str(tmp_path / "out"), "--planner-debug", str(debug)]
    assert main(argv) == EXIT_OK
    entries = [json.loads(line) for line in debug.read_text().splitlines()]
    # default budget is 4 x 8 policies per step
    assert len(entries) == 3 * 32
    assert {e["step"] for e in entries} == {1, 2, 3}


def test_montecarlo_report(tmp_path, quick_scenario):
    out = tmp_path / "mc"
    argv = ["--quiet", "montecarlo", "--scenario", str(quick_scenario), "--controllers", "static,random",
            "--trials", "2", "--steps", "2", "--particles", "60", "--out", str(out), "--save-traces"]
    assert main(argv) == EXIT_OK

    with (out / "report.csv").open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert [(r["controller"], r["step"]) for r in rows] == [
        ("static", "1"), ("static", "2"), ("random", "1"), ("random", "2"),
    ]
    assert all(r["trials"] == "2" for r in rows)

    fronts = json.loads((out / "fronts.json").read_text())
    assert len(fronts["episodes"]) == 4


def test_montecarlo_rejects_zero_trials(tmp_path, quick_scenario):
    argv = ["--quiet", "montecarlo", "--scenario", str(quick_scenario), "--trials", "0",
            "--out", str(tmp_path / "mc")]
    assert main(argv) == EXIT_INVALID
