import json
import subprocess
import sys

import pytest

from boomerang.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    (tmp_path / "id3.txt").write_text("1 0 0\n0 1 0\n0 0 1\n")
    (tmp_path / "bad.txt").write_text("1 0\n0 q\n")
    (tmp_path / "sq.json").write_text(json.dumps({"variant": "free", "rank": 2, "generators": ["aa", "bb"]}))
    (tmp_path / "gamma3.json").write_text(json.dumps({"variant": "congruence", "n": 3, "m": 3}))
    (tmp_path / "gamma2.json").write_text(json.dumps({"variant": "congruence", "n": 3, "m": 2}))
    (tmp_path / "diag.txt").write_text("2 0 0\n0 1 0\n0 0 1/2\n")
    (tmp_path / "e21.txt").write_text("1 0\n1 1\n")
    (tmp_path / "e12.txt").write_text("1 1\n0 1\n")
    (tmp_path / "g.txt").write_text("1 1 0\n0 1 0\n0 0 1\n")
    (tmp_path / "pair.txt").write_text("1 2 0\n0 1 0\n0 0 1\n\n1 0 0\n0 1 3\n0 0 1\n")
    return tmp_path


def test_bruhat_identity(files, capsys):
    code, out, _ = run(["--json", "bruhat", "--matrix", str(files / "id3.txt")], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["result"]["bruhat"]["sigma"] == [1, 2, 3]
    assert doc["config"]["matrix"].startswith("1 0 0")


def test_parse_error_location(files, capsys):
    code, _, err = run(["bruhat", "--matrix", str(files / "bad.txt")], capsys)
    e = json.loads(err)
    assert code == 1 and e["error"] == "parse" and e["line"] == 2 and e["column"] == 3


def test_missing_file(files, capsys):
    code, _, err = run(["bruhat", "--matrix", str(files / "nope.txt")], capsys)
    assert code == 1 and json.loads(err)["error"] == "precondition"


def test_comm(files, capsys):
    code, out, _ = run(["--json", "comm", "--n", "3", "--elementary", "1,2,2", "2,3,3"], capsys)
    assert code == 0 and json.loads(out)["result"]["commutator"] == [1, 3, "6"]
    code, out, _ = run(["--json", "comm", "--matrices", str(files / "pair.txt")], capsys)
    assert json.loads(out)["result"]["matrix"][0][2] == "6"


def test_roots(capsys):
    code, out, _ = run(["--json", "roots", "G2"], capsys)
    doc = json.loads(out)["result"]
    assert code == 0 and doc["count"] == 12 and doc["highest_root"] == [3, 2]
    code, _, _ = run(["roots", "A2", "--path-word", "x"], capsys)
    assert code == 1


def test_chevalley_telescoping(capsys):
    code, out, _ = run(["--json", "chevalley", "verify", "--type", "G2", "--identity", "telescoping",
                        "--k", "2,2,2,2,2,2", "--l", "1"], capsys)
    assert code == 0 and json.loads(out)["result"]["exponent"] == "-4032"


def test_chevalley_bad_arguments(capsys):
    code, _, _ = run(["chevalley", "verify", "--type", "B2", "--identity", "telescoping", "--k", "1", "--l", "1"],
                     capsys)
    assert code == 1


def test_probe_no_witness_is_a_verdict(files, capsys):
    code, out, _ = run(["probe", "--subgroup", str(files / "sq.json"), "--direction", "ab",
                        "--max-exponent", "50"], capsys)
    assert code == 0 and "no_witness_up_to_bound" in out


def test_probe_matrix_direction(files, capsys):
    code, out, _ = run(["--json", "probe", "--subgroup", str(files / "gamma2.json"), "--direction",
                        str(files / "g.txt")], capsys)
    assert code == 0 and json.loads(out)["result"]["verdict"] == {"kind": "normalizing_power", "n": 1}


def test_derive_and_replay(files, capsys):
    report = files / "derive.json"
    code, out, _ = run(["--output", str(report), "derive", "--subgroup", str(files / "gamma3.json")], capsys)
    assert code == 0 and "tits_certificate: True" in out
    code, out, _ = run(["--json", "replay", str(report)], capsys)
    assert code == 0 and json.loads(out)["result"]["identical"] is True
    code, _, _ = run(["derive", "--replay", str(report)], capsys)
    assert code == 0


def test_replay_detects_tampering(files, capsys):
    report = files / "derive.json"
    run(["--output", str(report), "derive", "--subgroup", str(files / "gamma2.json")], capsys)
    doc = json.loads(report.read_text())
    doc["result"]["outcome"]["found"]["1,2"] = 1
    report.write_text(json.dumps(doc))
    code, _, err = run(["replay", str(report)], capsys)
    assert code == 1 and json.loads(err)["error"] == "certificate"


def test_derive_budget_exit_code(files, capsys):
    code, _, err = run(["derive", "--subgroup", str(files / "gamma3.json"), "--search-budget", "2"], capsys)
    assert code == 2 and json.loads(err)["error"] == "budget"


def test_proximal(files, capsys):
    code, out, _ = run(["--json", "proximal", "--matrix", str(files / "diag.txt")], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and res["proximal"] and abs(res["data"]["gap"] - 0.5) < 1e-9


def test_proximal_obstruction_replay(files, capsys):
    report = files / "prox.json"
    code, _, _ = run(["--output", str(report), "proximal", "--matrix", str(files / "e21.txt"),
                      "--fix-gens", str(files / "e12.txt"), "--point", "1,0"], capsys)
    assert code == 0
    assert json.loads(report.read_text())["result"]["obstruction"]["n0"] >= 1
    code, _, _ = run(["replay", str(report)], capsys)
    assert code == 0


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "boomerang", "roots", "A3"], capture_output=True, text=True)
    assert proc.returncode == 0 and '"count": 12' in proc.stdout
