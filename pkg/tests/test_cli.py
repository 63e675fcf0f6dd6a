import json
import subprocess
import sys
from pathlib import Path

import pytest

from ppa.cli import run

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_count_gcd_example(capsys):
    code, out, _ = call(capsys, "count", DATA / "ex_b.ppa", "--set", "t1=4,t2=6",
                        "--free-box", "0..30", "--quant-box", "0..30")
    assert code == 0 and out == "3\n"


def test_missing_file_is_usage_error(capsys):
    code, _, err = call(capsys, "parse", "missing.ppa")
    assert code == 2 and "missing.ppa" in err


def test_parse_errors_and_bad_arguments(tmp_path, capsys):
    bad = tmp_path / "bad.ppa"
    bad.write_text("params t\nvars x\nformula: x >= \n")
    assert call(capsys, "parse", bad)[0] == 2
    assert call(capsys, "count", DATA / "ex_b.ppa", "--set", "t1=4", "--free-box", "0..3")[0] == 2
    assert call(capsys, "nonsense")[0] == 2
    assert call(capsys, "unordered", "count", DATA / "ex_b.ppa", "--set", "t1=4,t2=6")[0] == 2


def test_resource_limit_exit_code(tmp_path, capsys):
    f = tmp_path / "wide.ppa"
    f.write_text("vars x y\nformula: x + y >= 0 or x != y\n")
    code, _, err = call(capsys, "count", f, "--free-box", "0..300", "--budget", "100")
    assert code == 3 and "limit" in err


@pytest.mark.parametrize("pqm", [(7, 3, 5), (5, 2, 1)])
def test_gadget_golden_files(capsys, pqm):
    p, q, M = pqm
    for cmd in ("verify", "sail"):
        code, out, _ = call(capsys, "gadget", cmd, "--p", p, "--q", q, "--M", M)
        assert code == 0
        assert out == (GOLDEN / f"gadget_{cmd}_{p}_{q}_{M}.json").read_text()
    rep = json.loads((GOLDEN / f"gadget_verify_{p}_{q}_{M}.json").read_text())
    assert rep["pass"] and rep["phi_prime_set"] == rep["psi_set"] == rep["reference_set"]


def test_gadget_verify_jobs_do_not_change_output(capsys):
    one = call(capsys, "gadget", "verify", "--p", 7, "--q", 3, "--M", 5)[1]
    three = call(capsys, "gadget", "verify", "--p", 7, "--q", 3, "--M", 5, "--jobs", 3)[1]
    assert one == three


def test_gadget_formulas_reparse(capsys):
    from ppa.parser import parse

    for which in ("phi", "psi", "psi-prime"):
        code, out, _ = call(capsys, "gadget", which)
        assert code == 0 and parse(out).free == ("z",)


def test_parse_roundtrip(capsys):
    code, out, _ = call(capsys, "parse", DATA / "ex_b.ppa", "--alternation")
    assert code == 0
    assert out.splitlines()[2] == "formula: x1 >= 0 and x2 >= 0 and t1*x1 + t2*x2 = t1*t2"
    assert out.splitlines()[-1] == "# alternation: quantifier-free"


def test_decide_enumerate_qe(capsys):
    assert call(capsys, "decide", DATA / "ex_d.ppa", "--set", "t=8", "--box", "0..10")[1] == "true\n"
    assert call(capsys, "decide", DATA / "ex_d.ppa", "--set", "t=9", "--box", "0..10")[1] == "false\n"
    out = call(capsys, "enumerate", DATA / "ex_b.ppa", "--set", "t1=4,t2=6", "--free-box", "0..30")[1]
    assert out == "0 4\n3 2\n6 0\n"
    out = call(capsys, "qe", "cooper", DATA / "ex_d.ppa", "--set", "t=8")[1]
    assert out.endswith("formula: x >= 0 and x <= 3\n")
    code, out, _ = call(capsys, "qe", "growth", DATA / "ex_d.ppa", "--set", "t=8")
    assert code == 0 and json.loads(out)["bound_ok"] is True


def test_apcover(tmp_path, capsys):
    assert call(capsys, "apcover", "decide", DATA / "apcover_yes.json")[1] == "true\n"
    full = tmp_path / "full.json"
    full.write_text(json.dumps({"mu": 1, "nu": 5, "aps": [{"g": 1, "h": 4, "e": 1}]}))
    assert call(capsys, "apcover", "decide", full)[1] == "false\n"


def test_reduce_universal(capsys):
    code, out, _ = call(capsys, "reduce", "universal", DATA / "ex_d.ppa",
                        "--bounds", DATA / "ex_d_bounds.json", "--set", "t=8")
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and rep["S_count"] == rep["F_count"] == 4
    code, out, _ = call(capsys, "reduce", "universal", DATA / "ex_b.ppa", "--emit",
                        "--bounds", DATA / "ex_b_bounds.json", "--set", "t1=4,t2=6")
    assert code == 0 and "params s t" in out


def test_eqp_fit_and_verify(tmp_path, capsys):
    code, out, _ = call(capsys, "eqp", "fit", DATA / "ex_d.ppa", "--range", "0..40", "--radius", "2*t + 2")
    assert code == 0
    q = json.loads(out)
    assert q == {"period": 2, "threshold": 2, "constituents": [["0/1", "1/2"], ["0/1"]]}
    path = tmp_path / "q.json"
    path.write_text(out)
    args = ("eqp", "verify", DATA / "ex_d.ppa", "--range", "41..80", "--radius", "2*t + 2", "--eqp")
    assert call(capsys, *args, path)[0] == 0
    path.write_text(json.dumps({"period": 2, "threshold": 2, "constituents": [["1/1", "1/2"], ["0/1"]]}))
    assert call(capsys, *args, path)[0] == 1


def test_unordered_commands(capsys):
    base = DATA / "gcd_unordered.ppa"
    assert call(capsys, "unordered", "count", base, "--set", "t1=3,t2=5")[1] == "1\n"
    assert call(capsys, "unordered", "nonempty", base, "--set", "t1=4,t2=6")[1] == "false\n"
    assert call(capsys, "unordered", "finite", base, "--set", "t1=3,t2=5")[1] == "finite\n"


def test_sweep_is_seeded(capsys):
    a = call(capsys, "sweep", "cooper", "--count", 5, "--seed", 4)
    b = call(capsys, "sweep", "cooper", "--count", 5, "--seed", 4)
    assert a == b and a[0] == 0


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "ppa.cli", "parse", str(DATA / "ex_a.ppa")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "t1*x <= t2" in proc.stdout
