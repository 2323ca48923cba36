#!/usr/bin/env python3
"""End-to-end checks of the cdyb command line. Usage: cli_test.py <cdyb binary> <case>"""
import cmath
import json
import os
import subprocess
import sys
import tempfile

BIN = sys.argv[1]
TMP = tempfile.mkdtemp(prefix="cdyb_cli_")


def run(*args, expect):
    p = subprocess.run([BIN, *args], capture_output=True, text=True)
    if p.returncode != expect:
        sys.exit(f"{' '.join(args)}: exit {p.returncode}, wanted {expect}\nstdout: {p.stdout[-2000:]}\nstderr: {p.stderr}")
    return p


def path(name):
    return os.path.join(TMP, name)


def load(name):
    with open(path(name)) as f:
        return json.load(f)


def cplx(z):
    return complex(z["re"], z["im"])


def case_algebra_info():
    d = json.loads(run("algebra", "info", "--algebra", "G2", expect=0).stdout)
    assert d["dim"] == 14 and d["rank"] == 2 and d["num_positive_roots"] == 6, d
    s = json.loads(run("algebra", "info", "--algebra", "A1", "--structure", expect=0).stdout)
    killing = {(a, b): v for a, b, v in s["killing"]}
    assert killing[(1, 2)] == "4", killing
    run("algebra", "info", "--algebra", "E8", expect=2)


def case_verify_all_subsets():
    run("verify", "--algebra", "A2", "--all-s", "--seed", "7", "--out", path("v.json"), expect=0)
    d = load("v.json")
    text = json.dumps(d)
    assert '"passed": false' not in text, text[:2000]


def case_verify_empty_subset():
    run("verify", "--algebra", "A1", "--s", "", "--seed", "2", expect=0)


def case_verify_perturbed_fails():
    p = run("verify", "--algebra", "A2", "--s", "1,2", "--perturb", "--seed", "7", expect=1)
    assert "cdybe" in p.stdout and "cdybe" in p.stderr, p.stderr


def case_verify_config_errors():
    run("verify", "--algebra", "A2", expect=2)
    run("verify", "--algebra", "A2", "--s", "3", expect=2)
    run("verify", "--algebra", "A2", "--s", "1", "--lambda0", "0.1", expect=2)
    run("verify", "--algebra", "E6", "--s", "1", expect=2)


def case_verify_deterministic():
    args = ["verify", "--algebra", "B2", "--all-s", "--seed", "11", "--samples", "3"]
    run(*args, "--out", path("a.json"), expect=0)
    run(*args, "--out", path("b.json"), expect=0)
    with open(path("a.json")) as fa, open(path("b.json")) as fb:
        assert fa.read() == fb.read(), "reports differ between identical runs"


def case_classify_subspace_roundtrip():
    run("export", "--algebra", "B2", "--what", "family", "--s", "2", "--seed", "5", "--out", path("f.json"), expect=0)
    run("export", "--algebra", "B2", "--what", "subspace", "--s", "2", "--seed", "5", "--out", path("w.json"), expect=0)
    run("classify", "--in", path("w.json"), "--out", path("c.json"), expect=0)
    fam, cl = load("f.json"), load("c.json")["classification"]
    assert cl["S"] == [2], cl
    l0 = [cplx(z) for z in fam["lambda0"]]
    # B2: simple root a2 has coordinates (0, 1), so <a2, lambda0> = lambda0_2
    (eig,) = cl["eigenvalues"]
    assert eig["root"] == [0, 1], eig
    assert abs(cplx(eig["value"]) - cmath.exp(2 * l0[1])) < 1e-9, (eig, l0)


def case_classify_r_samples():
    run("export", "--algebra", "A3", "--what", "r-samples", "--s", "1,3", "--seed", "8", "--out", path("r.json"), expect=0)
    cl = json.loads(run("classify", "--in", path("r.json"), expect=0).stdout)["classification"]
    assert cl["S"] == [1, 3], cl


def case_classify_diagonal_not_transverse():
    run("export", "--algebra", "A2", "--what", "diagonal", "--out", path("d.json"), expect=0)
    d = json.loads(run("classify", "--in", path("d.json"), expect=1).stdout)
    assert d["error"]["error"] == "NotTransverse", d
    assert d["lagrangian"]["dim_ok"], d


def case_classify_rejects_broken_input():
    run("export", "--algebra", "A2", "--what", "subspace", "--s", "1,2", "--seed", "3", "--out", path("w.json"), expect=0)
    w = load("w.json")
    w["basis"][-1]["Y"] = [{"re": 2 * z["re"], "im": 2 * z["im"]} for z in w["basis"][-1]["Y"]]
    with open(path("bad.json"), "w") as f:
        json.dump(w, f)
    d = json.loads(run("classify", "--in", path("bad.json"), expect=1).stdout)
    assert "error" in d, d
    with open(path("junk.json"), "w") as f:
        f.write("{not json")
    run("classify", "--in", path("junk.json"), expect=2)
    run("classify", "--in", path("missing.json"), expect=2)


def case_extend():
    run("export", "--algebra", "C2", "--what", "subspace", "--s", "1,2", "--seed", "4", "--out", path("w.json"), expect=0)
    fam0 = json.loads(run("export", "--algebra", "C2", "--what", "family", "--s", "1,2", "--seed", "4", expect=0).stdout)
    d = json.loads(run("extend", "--in", path("w.json"), "--mu", "0,0", expect=0).stdout)
    assert d["verification"]["passed"], d
    for a, b in zip(d["family"]["lambda0"], fam0["lambda0"]):
        assert abs(cplx(a) - cplx(b)) < 1e-9, (a, b)
    d = json.loads(run("extend", "--in", path("w.json"), "--mu", "0.3+0.1i,-0.2", expect=0).stdout)
    assert d["verification"]["fiber_angle"] <= 1e-9, d
    run("extend", "--in", path("w.json"), "--mu", "0.3", expect=2)
    run("export", "--algebra", "C2", "--what", "diagonal", "--out", path("d.json"), expect=0)
    run("extend", "--in", path("d.json"), expect=1)


CASES = {k[len("case_"):]: v for k, v in globals().items() if k.startswith("case_")}

if __name__ == "__main__":
    CASES[sys.argv[2]]()
