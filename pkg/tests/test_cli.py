import io
import json
import subprocess
import sys
from fractions import Fraction

from mstream.cli import main
from tests.conftest import PROGRAMS

FIB, WALK, URNS, SILENT = (str(PROGRAMS / f"{n}.mstr") for n in ("fib", "walk", "ehrenfest", "silent"))


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    return [json.loads(line) for line in text.splitlines()]


def test_run_fib():
    code, out, err = cli("run", FIB, "fib", "--steps", "10")
    assert code == 0 and err == ""
    assert [r["out"][0] for r in records(out)] == [0, 1, 1, 2, 3, 5, 8, 13, 21, 34]
    assert [r["t"] for r in records(out)] == list(range(10))


def test_run_via_example_path():
    code, out, _ = cli("run", "examples/fib.mstr", "fib", "--steps", "3")
    assert code == 0 and len(records(out)) == 3


def test_run_same_seed_same_bytes():
    a = cli("run", WALK, "walk", "--steps", "50", "--seed", "42")[1]
    b = cli("run", WALK, "walk", "--steps", "50", "--seed", "42")[1]
    c = cli("run", WALK, "walk", "--steps", "50", "--seed", "43")[1]
    assert a == b and a != c


def test_run_default_seed_is_fixed():
    assert cli("run", WALK, "walk")[1] == cli("run", WALK, "walk", "--seed", "0")[1]


def test_run_csv_sets():
    code, out, _ = cli("run", URNS, "urns", "--steps", "2", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "t,urns.0,urns.1"
    assert lines[1] == '0,"{1,2,3,4}",{}'


def test_run_json_sets_and_unit():
    _, out, _ = cli("run", URNS, "urns", "--steps", "1")
    assert records(out)[0]["out"] == [[1, 2, 3, 4], []]
    _, out, _ = cli("run", SILENT, "silent", "--steps", "2")
    assert records(out)[0]["out"] == []


def test_dist_joint_walk():
    code, out, _ = cli("dist", WALK, "walk", "--steps", "2", "--joint")
    assert code == 0
    (rec,) = records(out)
    hist = {tuple(v[0] for v in h["history"]): h["p"] for h in rec["joint"]}
    assert hist == {(0, -1, -2): "1/4", (0, -1, 0): "1/4", (0, 1, 0): "1/4", (0, 1, 2): "1/4"}


def test_dist_marginals_sum_to_one():
    _, out, _ = cli("dist", WALK, "walk", "--steps", "4")
    recs = records(out)
    assert [r["t"] for r in recs] == [0, 1, 2, 3, 4]
    for r in recs:
        assert sum(Fraction(e["p"]) for e in r["dist"]) == 1
    assert {e["value"][0]: e["p"] for e in recs[2]["dist"]} == {-2: "1/4", 0: "1/2", 2: "1/4"}


def test_dist_csv():
    _, out, _ = cli("dist", WALK, "walk", "--steps", "1", "--format", "csv")
    assert out.splitlines() == ["t,walk,p", "0,0,1/1", "1,-1,1/2", "1,1,1/2"]


def test_equiv_equal():
    code, out, _ = cli("equiv", SILENT, "silent", "nothing", "--depth", "5")
    assert code == 0
    assert records(out)[0]["verdict"] == "equal"


def test_equiv_differ(tmp_path):
    f = tmp_path / "d.mstr"
    f.write_text("stream a : Int = 0 fby unif(0, 1)\nstream b : Int = 0 fby unif(0, 2)\n")
    code, out, _ = cli("equiv", str(f), "a", "b", "--depth", "3")
    assert code == 4
    rec = records(out)[0]
    assert rec["verdict"] == "differ" and rec["step"] == 1
    assert rec["left"] != rec["right"]


def test_check():
    code, out, _ = cli("check", URNS)
    assert code == 0
    assert "urns : (Set * Set)" in out.splitlines()


def test_causality():
    code, out, _ = cli("causality", WALK, "walk", "--depth", "4")
    assert code == 0 and records(out)[0]["causal"] is True


def test_laws_small():
    code, out, _ = cli("laws", "--instances", "2", "--depth", "2", "--seed", "1")
    assert code == 0
    assert [r["suite"] for r in records(out)] == ["feedback-axioms", "category-laws"]
    assert all(r["passed"] for r in records(out))


def test_parse_error(tmp_path):
    f = tmp_path / "bad.mstr"
    f.write_text("stream x : Int = )")
    code, out, err = cli("check", str(f))
    assert code == 1 and out == ""
    assert "1:18" in err


def test_missing_file():
    code, out, err = cli("check", "/no/such/file.mstr")
    assert code == 1 and out == "" and "cannot read" in err


def test_type_error(tmp_path):
    f = tmp_path / "bad.mstr"
    f.write_text("stream bad : Int = wait(bad)")
    code, out, err = cli("check", str(f))
    assert code == 2 and out == ""
    assert "delay error" in err


def test_support_overflow(tmp_path, monkeypatch):
    f = tmp_path / "big.mstr"
    f.write_text("stream a : Int = unifrange(0, 99)")
    assert cli("--support-cap", "10", "dist", str(f), "a", "--steps", "0")[0] == 3
    monkeypatch.setenv("MSTREAM_SUPPORT_CAP", "10")
    code, out, err = cli("dist", str(f), "a", "--steps", "0")
    assert code == 3 and out == "" and "overflow" in err


def test_usage_errors(capsys):
    assert cli("frobnicate")[0] == 64
    assert cli("run", FIB)[0] == 64
    assert cli("run", FIB, "fib", "--bogus")[0] == 64
    assert cli("run", FIB, "fib", "--steps", "-1")[0] == 64
    assert cli()[0] == 64
    assert "usage" in capsys.readouterr().err


def test_unknown_stream_name():
    code, out, err = cli("run", FIB, "fob")
    assert code == 64 and "fob" in err and out == ""


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mstream", "run", FIB, "fib", "--steps", "3"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert [json.loads(l)["out"] for l in r.stdout.splitlines()] == [[0], [1], [1]]
    r = subprocess.run([sys.executable, "-m", "mstream", "nope"], capture_output=True, text=True)
    assert r.returncode == 64 and r.stdout == ""
