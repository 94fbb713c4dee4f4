import json
import subprocess
import sys

import pytest

from mmi import cli
from mmi.core import validate_space
from mmi.diameters import partial_diameter
from mmi.harness import SuiteReport

TWO = {"labels": ["a", "b"], "dist": [[0, 1], [1, 0]], "weights": ["0.6", "0.4"]}
EQ = {"labels": ["a", "b"], "dist": [[0, 1], [1, 0]], "weights": ["0.5", "0.5"]}
ONE = {"labels": ["o"], "dist": [[0]], "weights": ["1"]}


@pytest.fixture
def doc(tmp_path):
    def write(obj, name="in.json"):
        p = tmp_path / name
        p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
        return str(p)
    return write


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_examples(capsys, doc):
    assert run(capsys, "compute", "--input", doc(TWO), "--invariant", "partial-diameter", "--alpha", "0.7")[:2] == (0, "1\n")
    assert run(capsys, "compute", "--input", doc(ONE), "--invariant", "obsdiam", "--alpha", "0.5")[:2] == (0, "0\n")
    assert run(capsys, "compute", "--input", doc("{nope"), "--invariant", "obsdiam", "--alpha", "0.5")[0] == 2


def test_compute_multivariable_and_pairs(capsys, doc):
    assert run(capsys, "compute", "--input", doc(EQ), "--invariant", "underline-diam", "--abar", "0.5,0.5")[1] == "0\n"
    other = doc({**EQ, "weights": ["0.6", "0.4"]}, "o.json")
    code, out, _ = run(capsys, "compute", "--input", doc(EQ), "--invariant", "prokhorov", "--other", other)
    assert code == 0 and float(out) == pytest.approx(0.1)
    code, out, _ = run(capsys, "compute", "--input", doc(EQ), "--invariant", "box", "--other", other)
    assert code == 0 and float(out) == pytest.approx(0.1)
    assert run(capsys, "compute", "--input", doc(EQ), "--invariant", "obsdiam-aggregate")[1] == "0.5\n"


def test_validation_errors(capsys, doc):
    bad = {"labels": ["a", "b", "c"], "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]], "weights": ["0.2", "0.3", "0.5"]}
    code, _, err = run(capsys, "compute", "--input", doc(bad), "--invariant", "obsdiam", "--alpha", "0.5")
    assert code == 2 and "TriangleViolation" in err
    floats = {**TWO, "weights": [0.6, 0.4]}
    assert run(capsys, "compute", "--input", doc(floats), "--invariant", "obsdiam", "--alpha", "0.5",
               "--mode", "rational")[0] == 2
    assert run(capsys, "compute", "--input", doc(TWO), "--invariant", "obsdiam")[0] == 2
    assert run(capsys, "compute", "--input", doc(TWO), "--invariant", "obsdiam", "--alpha", "1.5")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_cap_exceeded_and_heuristic(capsys, doc):
    gen = doc({"generator": {"kind": "random_discrete", "N": 12, "seed": 1}})
    assert run(capsys, "compute", "--input", gen, "--invariant", "obsdiam", "--alpha", "0.5")[0] == 3
    code, out, _ = run(capsys, "compute", "--input", gen, "--invariant", "obsdiam", "--alpha", "0.5",
                       "--mode", "heuristic")
    assert code == 0 and float(out) >= 0


def test_cap_override_marks_uncertified(capsys, doc, monkeypatch, tmp_path):
    monkeypatch.setenv("MMI_CAP_OVERRIDE", "2")
    out = tmp_path / "r.json"
    gen = doc({"generator": {"kind": "random_discrete", "N": 9, "seed": 1}})
    assert run(capsys, "compute", "--input", gen, "--invariant", "partial-diameter", "--alpha", "0.5",
               "--out", str(out))[0] == 0
    assert json.loads(out.read_text())["manifest"]["certified"] is False


def test_sweep(capsys, doc, tmp_path):
    code, out, _ = run(capsys, "sweep", "--input", doc(EQ), "--invariant", "obsdiam", "--grid", "0.1:1:0.1",
                       "--mode", "rational")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "alpha,value,mode" and lines[-1].startswith("# manifest: ")
    vals = {row.split(",")[0]: row.split(",")[1] for row in lines[1:-1]}
    assert vals["0.5"] == "0" and vals["0.6"] == "1" and len(vals) == 10
    out = run(capsys, "sweep", "--input", doc(ONE), "--invariant", "partial-diameter", "--grid", "0.25:1:0.25")[1]
    assert [r.split(",")[1] for r in out.splitlines()[1:-1]] == ["0"] * 4
    three = {"labels": list("abc"), "dist": [[0, 1, 1], [1, 0, 1], [1, 1, 0]], "weights": ["0.2", "0.5", "0.3"]}
    out = run(capsys, "sweep", "--input", doc(three), "--invariant", "partial-diameter", "--mode", "rational")[1]
    assert [r.split(",")[0] for r in out.splitlines()[1:-1]] == ["0.5", "0.8", "1"]


def test_sweep_monotonicity_violation(capsys, doc, monkeypatch):
    vals = iter([1.0, 0.0])
    monkeypatch.setattr(cli, "evaluate", lambda *a, **k: (next(vals), "exact", None))
    assert run(capsys, "sweep", "--input", doc(EQ), "--invariant", "obsdiam", "--grid", "0.5:0.6:0.1")[0] == 4


def test_verify_exit_codes(capsys, tmp_path, monkeypatch):
    out = tmp_path / "rep.json"
    assert run(capsys, "verify", "--suite", "mt1", "--count", "5", "--seed", "7", "--out", str(out))[0] == 0
    assert json.loads(out.read_text())["inconsistencies"] == 0
    fake = SuiteReport("mt1", 1, 0, 1, [{"index": 0, "check": "mt1"}])
    monkeypatch.setattr(cli, "run_suite", lambda *a: fake)
    code, _, err = run(capsys, "verify", "--suite", "mt1", "--count", "1")
    assert code == 1 and '"index": 0' in err


def test_levy_and_generate(capsys, tmp_path):
    code, out, _ = run(capsys, "levy", "--ns", "2,3", "--samples", "50")
    assert code == 0 and out.splitlines()[0] == "n,obsdiam_lower,partial_estimate" and len(out.splitlines()) == 4
    path = tmp_path / "g.json"
    assert run(capsys, "generate", "--kind", "random_discrete", "--N", "5", "--seed", "3", "--out", str(path))[0] == 0
    doc = json.loads(path.read_text())
    X = validate_space(doc)
    from mmi.spaces import random_discrete

    assert X.weights == random_discrete(5, 3).weights
    code, out, _ = run(capsys, "compute", "--input", str(path), "--invariant", "partial-diameter", "--alpha", "0.5")
    assert float(out) == partial_diameter(random_discrete(5, 3), "0.5")


def test_module_entry_point(tmp_path):
    p = tmp_path / "one.json"
    p.write_text(json.dumps(ONE))
    r = subprocess.run([sys.executable, "-m", "mmi", "compute", "--input", str(p), "--invariant", "diameter"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "0\n"
