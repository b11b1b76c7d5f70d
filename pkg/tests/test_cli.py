import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qfdiv.cli import parse_args, run
from qfdiv.matrix_io import save_matrix


@pytest.fixture
def mats(tmp_path):
    paths = {}
    for name, M in {
        "a": np.diag([2.0, 1.0]),
        "i": np.eye(2),
        "p": np.diag([1.0, 0.0]),
        "c": np.array([[1.0, 0.5j], [-0.5j, 1.0]]),
    }.items():
        paths[name] = str(tmp_path / f"{name}.json")
        save_matrix(paths[name], M)
    (tmp_path / "nh.json").write_text(json.dumps({"dim": 2, "re": [[1, 0.5], [0, 1]]}))
    (tmp_path / "broken.json").write_text("{")
    paths["nh"] = str(tmp_path / "nh.json")
    paths["broken"] = str(tmp_path / "broken.json")
    paths["missing"] = str(tmp_path / "missing.json")
    return paths


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(parse_args(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def invoke_json(argv):
    code, out, err = invoke(argv + ["--format", "json"])
    return code, (json.loads(out) if out else None), err


def test_parse_compute():
    cfg = parse_args(["compute", "--f", "entropy", "--a", "a.json", "--b", "b.json"])
    assert cfg.command == "compute" and cfg.generator.name == "entropy"
    assert cfg.seed == 1234567891011 and cfg.route == "spectral"
    assert parse_args(["compute", "--f", "tsallis:0.5", "--a", "x", "--b", "y"]).generator.params["q"] == 0.5


@pytest.mark.parametrize("argv", [
    ["compute", "--f", "tsallis:1", "--a", "x", "--b", "y"],
    ["compute", "--f", "nonsense", "--a", "x", "--b", "y"],
    ["compute", "--f", "entropy", "--a", "x"],
    ["compute", "--f", "entropy", "--a", "x", "--b", "y", "--route", "limit", "--breakdown"],
    ["verify", "--f", "entropy", "--transform", "rotate", "--dim", "2"],
    ["verify", "--f", "entropy", "--transform", "pinching", "--dim", "0"],
    ["verify", "--f", "entropy", "--transform", "pinching", "--dim", "2", "--trials", "0"],
    ["falsify", "--f", "entropy", "--transform", "pinching", "--dim", "2", "--threshold", "-1"],
    ["recover", "--phi", "pinching", "--dim", "2", "--seed", "-3"],
    ["recover", "--phi", "pinching", "--dim", "2", "--seed", str(2**64)],
    ["launch"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code == 2


def test_unknown_generator_lists_known(capsys):
    with pytest.raises(SystemExit):
        parse_args(["compute", "--f", "nonsense", "--a", "x", "--b", "y"])
    assert "sqrt-dev" in capsys.readouterr().err


def test_compute_entropy(mats):
    code, out, _ = invoke(["compute", "--f", "entropy", "--a", mats["a"], "--b", mats["i"]])
    assert code == 0
    assert abs(float(out.splitlines()[0]) - 2 * math.log(2)) <= 1e-6


def test_compute_infinite(mats):
    code, rep, _ = invoke_json(["compute", "--f", "entropy", "--a", mats["i"], "--b", mats["p"]])
    assert code == 0 and rep["value"] == "inf" and rep["support_violated"] is True
    code, out, _ = invoke(["compute", "--f", "entropy", "--a", mats["i"], "--b", mats["p"]])
    assert out.splitlines()[0] == "inf"


@pytest.mark.parametrize("route", ["spectral", "superop", "limit"])
def test_compute_routes_agree(mats, route):
    code, rep, _ = invoke_json(["compute", "--f", "sqrt-dev", "--a", mats["c"], "--b", mats["a"], "--route", route])
    assert code == 0
    ref = invoke_json(["compute", "--f", "sqrt-dev", "--a", mats["c"], "--b", mats["a"]])[1]["value"]
    assert abs(rep["value"] - ref) <= 1e-6


def test_compute_limit_reports_sequence(mats):
    _, rep, _ = invoke_json(["compute", "--f", "entropy", "--a", mats["i"], "--b", mats["p"], "--route", "limit"])
    assert rep["value"] == "inf" and rep["limit"]["verdict"] == "inf"
    assert len(rep["limit"]["values"]) == 8


def test_superop_support_violation_is_input_error(mats):
    code, out, err = invoke(["compute", "--f", "entropy", "--a", mats["i"], "--b", mats["p"], "--route", "superop"])
    assert code == 2 and out == "" and "supp" in err


def test_breakdown_csv(mats):
    code, out, _ = invoke(["compute", "--f", "tsallis:2", "--a", mats["c"], "--b", mats["a"], "--breakdown"])
    assert code == 0
    lines = out.splitlines()
    i = lines.index("a,b,weight,contribution")
    rows = [list(map(float, r.split(","))) for r in lines[i + 1:]]
    assert len(rows) == 4
    assert abs(sum(r[3] for r in rows) - float(lines[0])) <= 1e-10


@pytest.mark.parametrize("key,needle", [("missing", "not found"), ("broken", "invalid JSON"), ("nh", "Hermitian")])
def test_bad_input_files(mats, key, needle):
    code, out, err = invoke(["compute", "--f", "entropy", "--a", mats[key], "--b", mats["i"]])
    assert code == 2 and needle in err and out == ""


def test_verify_unitary(mats):
    code, rep, _ = invoke_json(["verify", "--f", "sqrt-dev", "--transform", "unitary:5", "--dim", "3", "--trials", "100"])
    assert code == 0 and rep["deviation"] <= 1e-9 and rep["preserved"]
    assert rep["seed"] == 1234567891011 and rep["generator"] == {"name": "sqrt-dev"}


def test_verify_pinching_reports_distortion():
    code, rep, _ = invoke_json(["verify", "--f", "entropy", "--transform", "pinching", "--dim", "2", "--trials", "20"])
    assert not rep["preserved"] and code == 0


def test_falsify():
    code, rep, _ = invoke_json(["falsify", "--f", "tsallis:2", "--transform", "pinching", "--dim", "3"])
    assert code == 0 and rep["witness"]["deviation"] > 1e-3
    assert rep["generator"] == {"name": "tsallis:2", "q": 2.0}
    code, rep, _ = invoke_json(["falsify", "--f", "entropy", "--transform", "unitary:2", "--dim", "2", "--budget", "30"])
    assert code == 0 and rep["witness"] is None
    code, rep, _ = invoke_json(["falsify", "--f", "entropy", "--transform", "transpose", "--dim", "2", "--budget", "30"])
    assert code == 0 and rep["witness"] is None


def test_recover():
    code, rep, _ = invoke_json(["recover", "--phi", "antiunitary:9", "--dim", "4"])
    assert code == 0 and rep["kind"] == "antiunitary"
    assert rep["residuals"]["action"] <= 1e-8
    code, rep, _ = invoke_json(["recover", "--phi", "transpose", "--dim", "3"])
    assert code == 0 and rep["kind"] == "antiunitary"
    code, rep, _ = invoke_json(["recover", "--phi", "pinching", "--dim", "3"])
    assert code == 0 and "not rank-one" in rep["error"]


def test_text_reports_render():
    for argv in (["recover", "--phi", "unitary:1", "--dim", "2"],
                 ["falsify", "--f", "sqrt-dev", "--transform", "averaging", "--dim", "2"],
                 ["verify", "--f", "sqrt-dev", "--transform", "transpose", "--dim", "2", "--trials", "5"]):
        code, out, _ = invoke(argv)
        assert code == 0 and "seed" in out


def test_json_is_byte_identical_across_processes(mats):
    argv = [sys.executable, "-m", "qfdiv", "falsify", "--f", "sqrt-dev", "--transform", "averaging",
            "--dim", "3", "--seed", "42", "--format", "json"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["seed"] == 42


def test_console_exit_codes(mats):
    ok = subprocess.run([sys.executable, "-m", "qfdiv", "compute", "--f", "entropy",
                         "--a", mats["a"], "--b", mats["i"]], capture_output=True)
    assert ok.returncode == 0
    bad = subprocess.run([sys.executable, "-m", "qfdiv", "compute", "--f", "tsallis:1",
                          "--a", mats["a"], "--b", mats["i"]], capture_output=True)
    assert bad.returncode == 2
