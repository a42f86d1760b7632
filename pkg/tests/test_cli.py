import json

import numpy as np
import pytest

from conecert.cli import main
from conecert.errors import ProblemFormatError
from conecert.problems import load_problem, run_problem, verify_document

CONE = {"K": [[1.0, 0.0], [2.0, 1.0]]}


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _linear_problem(f1, f2, check="positivity"):
    return {
        "kind": "linear",
        "A": [[0.0, 1.0], [f1 - 1.0, f2]],
        "cone": CONE,
        "check": check,
    }


def _spring_dissipativity_problem():
    return {
        "kind": "envelope",
        "vertices": [[[0.0, 1.0], [-5.0, -6.0]], [[0.0, 1.0], [-7.0, -6.0]]],
        "B": [[0.0], [1.0]],
        "C": [[1.0, 0.0]],
        "cone": CONE,
        "check": "dissipativity",
        "supply": {"r": [1.0], "q": [1.0]},
        "options": {"v0": [3.0, 1.0]},
    }


def test_certify_exit_zero_and_document(tmp_path, capsys):
    problem = _write(tmp_path, "p.json", _linear_problem(-6.0, -6.0))
    code = main(["certify", "--problem", problem, "--out", str(tmp_path / "out")])
    assert code == 0
    doc = json.loads((tmp_path / "out" / "certificate.json").read_text())
    assert doc["verdict"] == "Certified"
    assert doc["problem"]["kind"] == "linear"
    assert "Certified" in capsys.readouterr().out


def test_certify_failure_reports_binding_margin(tmp_path, capsys):
    problem = _write(tmp_path, "p.json", _linear_problem(0.0, 0.0))
    code = main(["certify", "--problem", problem])
    assert code == 1
    out = capsys.readouterr().out
    assert "offdiagonal" in out and "-5" in out


def test_certify_dissipativity_rate(tmp_path):
    problem = _write(tmp_path, "p.json", _spring_dissipativity_problem())
    code = main(["certify", "--problem", problem, "--out", str(tmp_path / "out")])
    assert code == 0
    doc = json.loads((tmp_path / "out" / "certificate.json").read_text())
    assert doc["result"]["certificate"]["rate"] >= 0.66


def test_check_only_round_trip(tmp_path):
    problem = _write(tmp_path, "p.json", _spring_dissipativity_problem())
    assert main(["certify", "--problem", problem, "--out", str(tmp_path / "out")]) == 0
    doc_path = tmp_path / "out" / "certificate.json"
    assert main(["certify", "--check-only", "--problem", str(doc_path)]) == 0


def test_check_only_detects_tampering(tmp_path):
    problem = _write(tmp_path, "p.json", _spring_dissipativity_problem())
    main(["certify", "--problem", problem, "--out", str(tmp_path / "out")])
    doc_path = tmp_path / "out" / "certificate.json"
    doc = json.loads(doc_path.read_text())
    doc["result"]["certificate"]["P"][0][0][1] = -2.0
    doc_path.write_text(json.dumps(doc))
    assert main(["certify", "--check-only", "--problem", str(doc_path)]) == 1


def test_wrong_kind_for_command(tmp_path, capsys):
    problem = _write(tmp_path, "p.json", {"kind": "network", "random": {"N": 2, "seed": 1}})
    assert main(["certify", "--problem", problem]) == 2
    assert "network" in capsys.readouterr().err


def test_malformed_json_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["certify", "--problem", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_missing_file_exit_two(tmp_path):
    assert main(["certify", "--problem", str(tmp_path / "nope.json")]) == 2


def test_network_random_certified(tmp_path):
    problem = _write(tmp_path, "p.json", {"kind": "network", "random": {"N": 20, "seed": 3}})
    code = main(["network", "--problem", problem, "--out", str(tmp_path / "out")])
    assert code == 0
    doc = json.loads((tmp_path / "out" / "certificate.json").read_text())
    assert doc["verdict"] == "Certified"
    ok, margins, _ = verify_document(doc)
    assert ok and margins["supply_balance"] >= 0


def test_network_explicit_unknown(tmp_path, capsys):
    sub = _spring_dissipativity_problem()
    sub.pop("kind")
    sub.pop("check")
    problem = _write(tmp_path, "p.json", {
        "kind": "network",
        "subsystems": [sub, sub],
        "weights": [[0.0, 1.2], [0.3, 0.0]],
    })
    assert main(["network", "--problem", problem]) == 1
    assert "supply_balance" in capsys.readouterr().out


def test_codesign_command(tmp_path):
    problem = _write(tmp_path, "p.json", {
        "kind": "codesign",
        "vertices": [[[0.0, 1.0], [-1.0, 0.0]]],
        "B": [[0.0], [1.0]],
        "C": [[1.0, 0.0]],
        "K0": [[1.0, 0.0], [2.0, 1.0]],
        "v0": [3.0, 1.0],
        "supply": {"r": [1.0], "q": [1.0]},
    })
    code = main(["codesign", "--problem", problem, "--out", str(tmp_path / "out"),
                 "--max-iters", "50"])
    assert code == 0
    log = (tmp_path / "out" / "iteration_log.csv").read_text().splitlines()
    assert log[0].startswith("iteration,c,")
    doc_path = tmp_path / "out" / "certificate.json"
    doc = json.loads(doc_path.read_text())
    assert doc["verdict"] == "Success"
    assert main(["certify", "--check-only", "--problem", str(doc_path)]) == 0


def test_simulate_command(tmp_path):
    problem = _write(tmp_path, "p.json", {
        "kind": "simulate",
        "field": {"type": "mass-spring"},
        "x0": [1.0, 0.0],
        "t_end": 2.0,
        "stride": 50,
    })
    code = main(["simulate", "--problem", problem, "--out", str(tmp_path / "out")])
    assert code == 0
    lines = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,x_1,x_2"
    assert len(lines) == 1 + 2001 // 50 + 1


@pytest.mark.filterwarnings("ignore:overflow")
def test_simulate_blowup_exit_one(tmp_path, capsys):
    problem = _write(tmp_path, "p.json", {
        "kind": "simulate",
        "field": {"type": "mass-spring", "slope": -8.0, "gains": [0.0, 0.0]},
        "x0": [1.0, 0.0],
        "t_end": 300.0,
        "dt": 0.5,
    })
    assert main(["simulate", "--problem", problem]) == 1
    assert "finite" in capsys.readouterr().out


def test_repro_writes_bundle(tmp_path):
    code = main(["repro", "ms-linear", "--out", str(tmp_path / "out")])
    assert code == 0
    files = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert files == ["ms-linear_feasibility.csv"]


def test_repro_unknown_exit_two(capsys):
    assert main(["repro", "never-heard-of-it"]) == 2
    assert "repro id" in capsys.readouterr().err


def test_load_problem_requires_kind(tmp_path):
    path = _write(tmp_path, "p.json", {"A": [[0.0]]})
    with pytest.raises(ProblemFormatError):
        load_problem(path)


def test_run_problem_validates_fields():
    with pytest.raises(ProblemFormatError):
        run_problem({"kind": "linear", "cone": CONE})
    with pytest.raises(ProblemFormatError):
        run_problem({"kind": "linear", "A": [[0.0, 1.0], [0.0, 0.0]],
                     "cone": CONE, "check": "dissipativity"})
    with pytest.raises(ProblemFormatError):
        run_problem({"kind": "envelope", "vertices": [],
                     "cone": CONE})


def test_document_rejects_uncertified_recheck(tmp_path):
    problem = _linear_problem(0.0, 0.0)
    result = run_problem(problem)
    assert result.exit_code == 1
    with pytest.raises(ProblemFormatError):
        verify_document(result.document)
