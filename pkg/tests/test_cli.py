import json

import pytest

from jetgroupoid import serialize as ser
from jetgroupoid.cli import main
from jetgroupoid.multijet import TruncatedJet
from jetgroupoid.rational import q

SQ = json.dumps({"n": 1, "m": 1, "k": 2, "base": ["0"], "value": ["0"], "coeffs": {"1": ["1"], "2": ["1"]}})


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_jet_compose(capsys):
    code, out, _ = run(capsys, "jet", "compose", SQ, SQ)
    assert code == 0
    got = ser.jet_from_json(json.loads(out))
    assert got == TruncatedJet.from_coeffs([0], [0], 2, {"1": [1], "2": [2]})


def test_jet_invert_from_file(tmp_path, capsys):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"n": 1, "m": 1, "k": 2, "base": ["0"], "value": ["0"],
                                "coeffs": {"1": ["2"], "2": ["1"]}}))
    out_path = tmp_path / "out.json"
    assert run(capsys, "jet", "invert", str(path), "--out", str(out_path))[0] == 0
    got = ser.jet_from_json(json.loads(out_path.read_text()))
    assert got.coefficient((1,)) == (q("1/2"),) and got.coefficient((2,)) == (q("-1/8"),)


def test_jet_identity_and_project(capsys):
    code, out, _ = run(capsys, "jet", "identity", "--point", "1/2,3", "--k", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["base"] == ["1/2", "3/1"]
    assert run(capsys, "jet", "identity", "--point", "1,2", "--k", "1", "--dim", "3")[0] == 2
    code, out, _ = run(capsys, "jet", "project", SQ, "--k", "1")
    assert code == 0 and json.loads(out)["coeffs"] == {"1": ["1/1"]}


def test_malformed_and_domain_errors(capsys):
    assert run(capsys, "jet", "compose", "{not json", SQ)[0] == 2
    assert run(capsys, "jet", "compose", "/no/such/file.json", SQ)[0] == 2
    singular = json.dumps({"n": 1, "m": 1, "k": 2, "base": ["0"], "value": ["0"], "coeffs": {"2": ["1"]}})
    code, _, err = run(capsys, "jet", "invert", singular)
    assert code == 1 and "singular" in err.lower()
    shifted = json.dumps({"n": 1, "m": 1, "k": 2, "base": ["5"], "value": ["0"], "coeffs": {"1": ["1"]}})
    code, _, err = run(capsys, "jet", "compose", shifted, shifted)
    assert code == 1 and "non-composable" in err


def test_groupoid_actions(capsys):
    pair = json.dumps({"pair": [0, 1]})
    code, out, _ = run(capsys, "groupoid", "check", pair)
    assert code == 0 and json.loads(out) == {"ok": True, "violations": []}
    z4 = json.dumps({"trivial": {"points": [0, 1], "elements": ["0", "1", "2", "3"],
                                 "cayley": [[str((i + j) % 4) for j in range(4)] for i in range(4)]}})
    sub = json.dumps({"points": [0, 1], "subgroup": ["0", "2"]})
    code, out, _ = run(capsys, "groupoid", "cosets", z4, sub)
    assert code == 0 and len(json.loads(out)["blocks"]) == 8
    code, out, _ = run(capsys, "groupoid", "quotient", z4, sub)
    assert code == 0 and len(json.loads(out)["arrows"]) == 8


def test_groupoid_quotient_non_normal(capsys):
    cayley = [["123", "132", "213", "231", "312", "321"],
              ["132", "123", "231", "213", "321", "312"],
              ["213", "312", "123", "321", "132", "231"],
              ["231", "321", "132", "312", "123", "213"],
              ["312", "213", "321", "123", "231", "132"],
              ["321", "231", "312", "132", "213", "123"]]
    s3 = json.dumps({"trivial": {"points": [0], "elements": cayley[0], "cayley": cayley}})
    sub = json.dumps({"points": [0], "subgroup": ["123", "213"]})
    code, _, err = run(capsys, "groupoid", "quotient", s3, sub)
    assert code == 1 and "witness" in err


def test_linop_apply(capsys):
    op = json.dumps({"kind": "linear_operator", "n": 1, "m": 1, "theta": [{"0": "1"}],
                     "h": {"1": [["1"]]}})
    s = json.dumps({"kind": "vector_section", "n": 1, "components": [{"2": "1"}]})
    code, out, _ = run(capsys, "linop", "apply", op, s)
    assert code == 0
    assert json.loads(out)["components"] == [{"1": "2/1", "3": "-1/1"}]


def test_flow_exp_csv_and_blowup(capsys):
    sec = json.dumps({"kind": "trivial_section", "n": 1, "m": 1, "theta": [{"1": "1"}], "h": {"0": [["0"]]}})
    code, out, _ = run(capsys, "flow", "exp", sec, "--point", "1", "--t", "1", "--samples", "2",
                       "--format", "csv")
    assert code == 0
    last = out.strip().splitlines()[-1].split(",")
    assert abs(float(last[1]) - 2.718281828459045) < 1e-8
    sq = json.dumps({"kind": "vector_field", "n": 1, "components": [{"2": "1"}]})
    code, _, err = run(capsys, "flow", "field", sq, "--point", "1", "--t", "1.5")
    assert code == 1 and "blow-up" in err


def test_algebroid_bracket(capsys):
    a = json.dumps({"kind": "trivial_section", "n": 1, "m": 1, "theta": [{"0": "1"}], "h": {"1": [["1"]]}})
    b = json.dumps({"kind": "trivial_section", "n": 1, "m": 1, "theta": [{"1": "1"}], "h": {}})
    code, out, _ = run(capsys, "algebroid", "bracket", a, b)
    assert code == 0
    doc = json.loads(out)
    assert doc["theta"] == [{"0": "1/1"}]
    assert doc["h"] == {"1": [["-1/1"]]}


def test_verify_is_deterministic(capsys):
    code1, out1, _ = run(capsys, "verify", "groupoid", "--seed", "3")
    code2, out2, _ = run(capsys, "verify", "groupoid", "--seed", "3")
    assert code1 == code2 == 0 and out1 == out2
    assert any(line.split()[:1] == ["2"] and "PASS" in line for line in out1.splitlines())
    assert run(capsys, "verify", "nonsense")[0] == 2


def test_unknown_verb_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["dance", "x"])
    assert exc.value.code == 2
