import io
import json
import subprocess
import sys

import pytest

from padic_shift.cli import SCHEMA, run


@pytest.fixture
def files(tmp_path, monkeypatch):
    (tmp_path / "binom2.mahler").write_text("2 1\n")
    (tmp_path / "binom3.mahler").write_text("# C(x,3)\n3 1\n")
    (tmp_path / "member3.mahler").write_text("3 1\n2 3\n")
    monkeypatch.chdir(tmp_path)
    return tmp_path


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv, "--json")
    doc = json.loads(out)
    assert doc["schema"] == SCHEMA
    return code, doc


def test_verify_theorem_json():
    code, doc = call_json("verify-theorem", "-p", "2", "-k", "1", "--nmax", "64", "--jmax", "5")
    assert code == 0 and doc["command"] == "verify-theorem"
    assert doc["prime"] == 2 and doc["k"] == 1 and doc["Nmax"] == 64
    assert len(doc["clauses"]) == 8 and all(c["passed"] for c in doc["clauses"])


def test_preimage_example(files):
    code, out, _ = call("preimage", "-p", "2", "--map", "mahler:./binom2.mahler", "--ball", "0/1")
    assert code == 0 and out.strip() == "0/2, 1/2"
    code, doc = call_json("preimage", "-p", "2", "--map", "mahler:./binom2.mahler", "--ball", "1/1")
    assert doc["balls"] == ["2/2", "3/2"]


def test_scaling_check_example(files):
    code, out, _ = call("scaling-check", "-p", "2", "--map", "mahler:./binom3.mahler", "-k", "1", "-M", "10")
    assert code == 1 and "(0, 2)" in out
    code, doc = call_json("scaling-check", "-p", "2", "--map", "mahler:./binom3.mahler",
                          "-k", "1", "-M", "10")
    assert code == 1 and not doc["passed"] and doc["witnesses"] == [[0, 2]]


def test_scaling_check_pass_and_lipschitz(files):
    code, doc = call_json("scaling-check", "-p", "2", "--map", "binom:2", "-M", "10")
    assert code == 0 and doc["passed"] and doc["witnesses"] == []
    code, doc = call_json("scaling-check", "-p", "2", "--map", "binom:2", "-M", "10", "--lipschitz")
    assert code == 0 and doc["exponent"] == 1


def test_scaling_check_perturbation(files):
    base = ["scaling-check", "-p", "2", "--map", "binom:4", "-k", "2", "-M", "12"]
    code, doc = call_json(*base, "--perturb", "binom:3", "--unit", "3", "--dexp", "1")
    assert code == 0 and doc["passed"]
    code, doc = call_json(*base, "--perturb", "binom:2", "--unit", "3", "--dexp", "0")
    assert code == 1 and "precondition_failed" in doc


def test_class_check(files):
    code, doc = call_json("class-check", "-p", "3", "--map", "mahler:./member3.mahler")
    assert code == 0 and doc["member"] and doc["k"] == 1
    code, doc = call_json("class-check", "-p", "2", "--map", "mahler:./binom3.mahler")
    assert code == 1 and doc["failed_clause"] == "maximizer is p^k with k > 0"


def test_mixing_and_conjugacy():
    code, doc = call_json("mixing", "-p", "2", "--map", "shift", "--U", "0/1", "--V", "1/1", "-n", "1")
    assert code == 0 and doc["measure"] == "1/2^2"
    code, out, _ = call("conjugacy", "-p", "2", "--map", "binom:2", "-M", "6", "--x", "3")
    assert code == 0 and "2adic:1,1,1,1,1,1" in out
    code, doc = call_json("conjugacy", "-p", "2", "--map", "binom:3", "-M", "6")
    assert code == 1


def test_hensel_and_eval():
    code, out, _ = call("hensel", "-p", "5", "--coeffs", "1,0,1", "--r0", "2", "-N", "2")
    assert code == 0 and "5adic:2,1" in out
    code, out, _ = call("eval", "-p", "2", "--op", "encode", "--x", "-1", "--digits", "5")
    assert out.strip() == "2adic:1,1,1,1,1"
    code, out, _ = call("eval", "-p", "3", "--map", "ws", "--x", "5", "--digits", "8")
    assert code == 0 and out.strip().startswith("3adic:1,1,1")  # 40 = 1 + 3 + 9 + 27


def test_shift_coeffs_methods_agree():
    _, a = call_json("shift-coeffs", "-p", "3", "-k", "1", "--nmax", "30", "-j", "4", "--method", "direct")
    _, b = call_json("shift-coeffs", "-p", "3", "-k", "1", "--nmax", "30", "-j", "4", "--method", "series")
    assert a["coefficients"] == b["coefficients"]


@pytest.mark.parametrize("argv,token", [
    (["eval", "-p", "2", "--op", "encode", "--x", "2adic:1,2"], "'2'"),
    (["preimage", "-p", "2", "--map", "shift", "--ball", "5/1"], "5/1"),
    (["preimage", "-p", "2", "--map", "nope", "--ball", "0/1"], "nope"),
    (["scaling-check", "-p", "4", "--map", "shift", "-M", "6"], "'4'"),
    (["eval", "-p", "2", "--x", "3", "--bogus"], "--bogus"),
])
def test_usage_errors_name_the_token(argv, token):
    code, out, err = call(*argv)
    assert code == 2 and token in err


def test_missing_file_is_usage_error(files):
    code, _, err = call("class-check", "-p", "2", "--map", "mahler:./absent.mahler")
    assert code == 2 and "absent.mahler" in err


def test_json_is_byte_identical_and_workers_invariant(files):
    argv = ["scaling-check", "-p", "2", "--map", "mahler:./binom2.mahler", "-M", "10", "--json"]
    first = call(*argv)
    assert call(*argv) == first
    assert call(*argv, "--workers", "4") == first


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "padic_shift", "hensel", "-p", "5",
                          "--coeffs", "1,0,1", "--r0", "2", "-N", "3"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "5adic:" in res.stdout
