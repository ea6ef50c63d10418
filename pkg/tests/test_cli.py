import json
import os
from pathlib import Path

import pytest

from antcsp import cli
from antcsp.core import find_homomorphism, load_structure
from antcsp.formulas import load_formulas
from antcsp.reflection import implied_constraints
from antcsp.robustness import is_robust

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = Path(__file__).resolve().parent / "golden"
D = "tests/data/"

# name -> argv; the report (minus timing) is frozen under golden/NAME.json
CASES = {
    "solve_triangle": ["solve", "--template", D + "k3.json", "--instance", D + "triangle.json"],
    "solve_k4": ["solve", "--template", D + "k3.json", "--instance", D + "k4.json"],
    "homs_count": ["homs", "--template", "builtin:K3", "--instance", D + "triangle.json", "--count"],
    "robust_edges": ["robust", "--k", "2", "--formulas", D + "edge_formula.json",
                     "--template", D + "k3.json", "--instance", D + "triangle.json"],
    "robust_plain": ["robust", "--k", "2", "--template", D + "k3.json", "--instance", D + "triangle.json"],
    "robust_upto_brute": ["robust", "--k", "2", "--upto", "--brute", "--formulas", "fundamental",
                          "--template", "builtin:K3", "--instance", D + "triangle.json"],
    "qvar_k4": ["qvar", "--template", D + "k3.json", "--instance", D + "k4.json"],
    "frozen_c4": ["frozen", "--k", "2", "--template", "builtin:K2", "--instance", D + "c4.json"],
    "reflect_c4": ["reflect", "--full", "--k", "2", "--template", "builtin:K2", "--instance", D + "c4.json"],
    "gottlob": ["reduce", "gottlob", "--cnf", D + "two_clauses.cnf", "--k", "0"],
    "linear_chain": ["reduce", "linear-chain", "--system", D + "xyz1.json", "--solve"],
    "claw_count": ["claw", "--definitions", "builtin:sat3-1in3", "--k", "0", "--ell", "0"],
    "establish_c3": ["strategy", "establish", "--j", "2", "--template", "builtin:K2",
                     "--instance", D + "triangle.json"],
    "separator_c4": ["strategy", "separator", "--j", "1", "--k", "2", "--template", "builtin:K2",
                     "--instance", D + "c4.json"],
    "poly_majority": ["poly", "find", "--template", "builtin:K2", "--identity", "nu", "--arity", "3"],
    "poly_k3_wnu": ["poly", "find", "--template", "builtin:K3", "--identity", "wnu", "--arity", "3"],
    "core_c4": ["poly", "retract", "--template", D + "c4.json"],
    "dimacs_import": ["dimacs", "import", D + "two_clauses.cnf"],
}


@pytest.fixture(autouse=True)
def at_root(monkeypatch):
    monkeypatch.chdir(ROOT)


def _stable(report):
    return {k: v for k, v in report.items() if k != "timing"}


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    code, report, _ = cli.run(CASES[name])
    path = GOLDEN / f"{name}.json"
    got = {"exit": code, "report": _stable(report)}
    if os.environ.get("ANTCSP_REGEN_GOLDEN"):
        path.write_text(json.dumps(got, indent=1, sort_keys=True) + "\n")
    assert got == json.loads(path.read_text())


@pytest.mark.parametrize("name", ["robust_edges", "qvar_k4", "reflect_c4"])
def test_reports_repeat_byte_for_byte(name):
    a = json.dumps(_stable(cli.run(CASES[name])[1]), sort_keys=True)
    b = json.dumps(_stable(cli.run(CASES[name])[1]), sort_keys=True)
    assert a == b


def test_verdicts_match_library():
    k3, tri, k4 = (load_structure(D + f) for f in ("k3.json", "triangle.json", "k4.json"))
    E = load_formulas(D + "edge_formula.json")
    assert (cli.run(CASES["solve_triangle"])[0] == 0) == (find_homomorphism(tri, k3) is not None)
    assert (cli.run(CASES["solve_k4"])[0] == 0) == (find_homomorphism(k4, k3) is not None)
    assert (cli.run(CASES["robust_edges"])[0] == 0) == is_robust(tri, k3, 2, E).ok
    assert (cli.run(CASES["robust_plain"])[0] == 0) == is_robust(tri, k3, 2, []).ok
    assert (cli.run(CASES["qvar_k4"])[0] == 0) == (not implied_constraints(k4, k3))


def test_usage_errors():
    assert cli.run(["solve", "--template", D + "missing.json", "--instance", D + "k3.json"])[0] == 2
    assert cli.run(["nonsense"])[0] == 2
    assert cli.run(["reduce", "pp", "--instance", D + "k3.json"])[0] == 2
    code, rep, _ = cli.run(["solve", "--template", "builtin:K9", "--instance", D + "k3.json"])
    assert code == 2 and "unknown builtin" in rep["result"]["error"]


def test_malformed_json_reports_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"universe": 2,\n "relations": [}\n')
    code, rep, _ = cli.run(["solve", "--template", "builtin:K2", "--instance", str(bad)])
    assert code == 2 and "line 2" in rep["result"]["error"]


def test_budget_exceeded():
    code, rep, _ = cli.run(["homs", "--template", "builtin:K3", "--instance", D + "c4.json",
                            "--count", "--budget", "3"])
    assert code == 3 and rep["verdict"] == "BUDGET_EXCEEDED"


def test_main_prints_text(capsys):
    assert cli.main(CASES["solve_triangle"] + ["--text"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("solve: YES")


def test_out_file(tmp_path):
    target = tmp_path / "out.cnf"
    code, _, _ = cli.run(["reduce", "to3sat", "--cnf", D + "two_clauses.cnf", "--out", str(target)])
    # width-3 clauses are already short enough: rejected as a usage error
    assert code == 2 and not target.exists()
    code, _, _ = cli.run(["reduce", "gottlob", "--cnf", D + "two_clauses.cnf", "--k", "1", "--out", str(target)])
    # amplified clauses stay clauses, so they are written as DIMACS
    assert code == 0 and target.read_text().startswith("p cnf 9 54\n")
