import json

import pytest

from betagrowth.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_count(capsys):
    code, out, _ = run_cli(capsys, "count", "--beta", "golden", "--m", "2",
                           "--x", "1", "--n", "2")
    assert code == 0
    assert out.splitlines()[-1] == "2,1/1,3"


def test_count_json_rationals(capsys):
    code, out, _ = run_cli(capsys, "count", "--beta", "golden", "--m", "2",
                           "--x", "2/5", "--n", "3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["rows"][0]["x"] == "2/5"
    assert doc["rows"][0]["count"] == "2"  # brute-force verified
    assert doc["config"]["beta"] == "golden"


def test_kappa(capsys):
    code, out, _ = run_cli(capsys, "kappa", "--beta", "1.5", "--m", "2")
    assert code == 0
    assert "1/8" in out


def test_gamma_integer(capsys):
    code, out, _ = run_cli(capsys, "gamma", "--beta", "int:2", "--m", "4",
                           "--method", "integer", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["rows"][0]["gamma_over_log2"] == "1.0"


def test_exit_code_bad_input(capsys):
    code, _out, err = run_cli(capsys, "count", "--beta", "nonsense", "--m", "2",
                              "--x", "1", "--n", "2")
    assert code == 2
    assert "error:" in err


def test_exit_code_cap(capsys):
    code, _out, err = run_cli(capsys, "automaton", "--beta", "poly:-3,0,1",
                              "--m", "2", "--state-cap", "200")
    assert code == 3


def test_exit_code_hypothesis(capsys):
    code, _out, err = run_cli(capsys, "kappa", "--beta", "golden", "--m", "2")
    assert code == 4
    code, _out, err = run_cli(capsys, "gamma", "--beta", "int:2", "--m", "3",
                              "--method", "integer")
    assert code == 4


def test_tree(capsys):
    code, out, _ = run_cli(capsys, "tree", "--beta", "1.5", "--m", "2",
                           "--x", "1", "--depth", "6")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[0] == "depth,nodes"
    assert len(lines) == 8


def test_bound(capsys):
    code, out, _ = run_cli(capsys, "bound", "--beta", "1.4", "--m", "2",
                           "--x", "1", "--n-max", "12")
    assert code == 0
    assert '"passed": true' in out or "True" in out


def test_sums(capsys):
    code, out, _ = run_cli(capsys, "sums", "--beta", "golden", "--m", "2",
                           "--n-max", "6")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert rows[2].startswith("3,7,")  # n=3 has 7 distinct sums


def test_sparse(capsys):
    code, out, _ = run_cli(capsys, "sparse", "--beta", "golden", "--m", "2",
                           "--m-seq", "1,2,3")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert [r.split(",")[1] for r in rows] == ["1", "2", "6"]


def test_simulate_deterministic(capsys):
    a = run_cli(capsys, "simulate", "--beta", "golden", "--m", "2",
                "--x", "2/5", "--n", "30", "--seed", "5")
    b = run_cli(capsys, "simulate", "--beta", "golden", "--m", "2",
                "--x", "2/5", "--n", "30", "--seed", "5")
    assert a == b and a[0] == 0


def test_automaton_json(capsys):
    code, out, _ = run_cli(capsys, "automaton", "--beta", "golden", "--m", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["size"] == 7
    assert doc["states"][0]["v"] == 1
    # exact rationals serialized as numerator/denominator strings
    assert all("/" in c for c in doc["states"][0]["length"]["coeffs"])


def test_automaton_dot(tmp_path, capsys):
    dot = tmp_path / "g.dot"
    code, _out, _ = run_cli(capsys, "automaton", "--beta", "golden", "--m", "2",
                            "--out", str(tmp_path / "a.json"), "--dot", str(dot))
    assert code == 0
    assert dot.read_text().startswith("digraph")


def test_dims(capsys):
    code, out, _ = run_cli(capsys, "dims", "--beta", "int:2", "--m", "2",
                           "--x", "1/3", "--levels", "6..14", "--margin", "8")
    assert code == 0
    assert '"slope"' in out or "slope" in out


def test_tau(capsys):
    code, out, _ = run_cli(capsys, "tau", "--beta", "int:2", "--m", "2",
                           "--q-list", "0,1", "--levels", "8..12", "--margin", "6")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert len(rows) == 2


def test_table1_deterministic(tmp_path, capsys):
    out1 = tmp_path / "t1.csv"
    out2 = tmp_path / "t2.csv"
    for target in (out1, out2):
        code, _o, _e = run_cli(capsys, "table1", "--n-range", "3..5",
                               "--k-exact", "12", "--seed", "9", "--out", str(target))
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_gamma_mc_deterministic(tmp_path, capsys):
    out1 = tmp_path / "g1.csv"
    out2 = tmp_path / "g2.csv"
    for target in (out1, out2):
        code, _o, _e = run_cli(capsys, "gamma", "--beta", "golden", "--m", "2",
                               "--method", "mc", "--paths", "2000", "--chains", "3",
                               "--seed", "13", "--out", str(target))
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_selftest(capsys):
    code, out, _ = run_cli(capsys, "selftest")
    assert code == 0
    assert "FAIL" not in out
