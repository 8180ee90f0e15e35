import json

import pytest

from osculate.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_qlm(capsys):
    code, out, _ = run(capsys, "qlm", "--L", "4")
    assert code == 0 and out.strip() == "70,29,1"


def test_qlm_json(capsys):
    code, out, _ = run(capsys, "qlm", "--L", "4", "--format", "json")
    data = json.loads(out)
    assert data["rows"][0]["P"] == ["7/10", "29/100", "1/100"]
    assert data["config"]["L"] == 4


def test_stationary_json(capsys):
    code, out, _ = run(capsys, "stationary", "--L", "4", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert len(data["entries"]) == 6
    assert data["min"] == "1/10"
    assert data["config"]["max_states"] == 2000
    assert all(isinstance(e["p"], str) and isinstance(e["decimal"], float) for e in data["entries"])


def test_stationary_csv(capsys):
    code, out, _ = run(capsys, "stationary", "--L", "3", "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0] == "pattern,p,decimal,ratio" and len(lines) == 4


def test_resource_guard(capsys):
    code, _, err = run(capsys, "stationary", "--L", "14")
    assert code == 2 and "allow-large" in err


def test_usage_errors(capsys):
    assert run(capsys, "stationary")[0] == 2
    assert run(capsys, "nope")[0] == 2
    assert run(capsys, "fit", "--digits", "20")[0] == 2
    assert run(capsys, "stationary", "--L", "4", "--max-states", "0")[0] == 2
    assert run(capsys, "qlm", "--L", "5")[0] == 2
    assert run(capsys, "mc", "--L", "3", "--observable", "winding")[0] == 2


def test_verify_normalization(capsys):
    code, out, _ = run(capsys, "verify", "--identity", "normalization", "--L-max", "40")
    assert code == 0
    rep = json.loads(out)["reports"][0]
    assert rep["ok"] and rep["L_range"] == [2, 40]


def test_verify_cspp(capsys):
    code, out, _ = run(capsys, "verify", "--identity", "cspp", "--format", "pretty")
    assert code == 0 and "cspp: ok" in out


def test_glue_policies(capsys):
    code, out, _ = run(capsys, "glue-observables", "--L", "4")
    data = json.loads(out)
    assert code == 0
    assert data["observables"]["surround"]["value"] == ["7/10", "29/100", "1/100"]
    assert data["observables"]["winding"]["value"] == "21/50"
    code, out, _ = run(capsys, "glue-observables", "--L", "4", "--policy", "contractible-plus-winding")
    assert code == 1
    code, out, _ = run(capsys, "glue-observables", "--L", "3", "--format", "csv")
    assert code == 0 and "spanning,,7/9" in out


def test_det(capsys):
    code, out, _ = run(capsys, "det", "--L", "2", "--shift", "omega", "--format", "json")
    data = json.loads(out)
    assert data["det"] == "4w" and data["ring"] == "Z[w]"
    code, out, _ = run(capsys, "det", "--L", "4", "--format", "csv")
    assert out.splitlines()[1:] == ["0,1", "1,29", "2,72", "3,29", "4,1"]
    assert run(capsys, "det", "--L", "2", "--shift", "x")[0] == 2


def test_fit_csv(capsys):
    code, out, _ = run(capsys, "fit", "--L-min", "2", "--L-max", "6", "--format", "csv")
    assert code == 0 and out.splitlines()[1].startswith("2,3/4,")


def test_mc_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for f in (a, b):
        assert main(["mc", "--L", "4", "--samples", "2000", "--seed", "9", "--observable", "neighbor", "-o", str(f)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data["config"]["seed"] == 9
    assert data["estimates"][0]["expected"] == "3/4"


def test_mc_strip(capsys):
    code, out, _ = run(capsys, "mc", "--L", "3", "--samples", "500", "--observable", "spanning")
    data = json.loads(out)
    assert code == 0 and data["estimates"][0]["height"] == 150


def test_exact_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["stationary", "--L", "6", "-o", str(a)])
    main(["stationary", "--L", "6", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()
