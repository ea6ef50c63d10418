"""Command-line frontend.

Every subcommand is a thin adapter over one library call and emits a run
report: the command, hashed inputs, verdict, result payload, timing and the
search nodes charged to the budget.

Exit codes: 0 yes/accept/success, 1 no/reject, 2 usage or input error,
3 budget exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import budget as _budget
from . import templates as T
from .core import StructureError, count_homomorphisms, enumerate_homomorphisms, find_homomorphism, load_structure
from .formulas import (FormulaError, all_types, definitions_from_json, instantiate_Fk, kFq_theory,
                       load_formulas, type_of)

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

BUILTIN = {
    "K2": lambda: T.complete_graph(2),
    "K3": lambda: T.complete_graph(3),
    "1in3": T.one_in_three,
    "1in3-signed": T.one_in_three_signed,
    "2plus": T.two_plus,
    "sat3": lambda: T.sat_template(3),
    "Z2": lambda: T.linear_template(2, 1),
    "Z3": lambda: T.linear_template(3, 1),
}


class UsageError(Exception):
    pass


class Report:
    def __init__(self, command):
        self.command = command
        self.inputs = []
        self.verdict = None
        self.result = {}

    def _hash(self, path):
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise UsageError(f"{path}: {exc.strerror}") from None
        self.inputs.append({"path": path, "sha256": hashlib.sha256(data).hexdigest()})
        return data

    def structure(self, ref):
        if ref.startswith("builtin:"):
            name = ref.split(":", 1)[1]
            if name not in BUILTIN:
                raise UsageError(f"unknown builtin {name!r}; choose from {', '.join(sorted(BUILTIN))}")
            self.inputs.append({"builtin": name})
            return BUILTIN[name]()
        self._hash(ref)
        return load_structure(ref)

    def formulas(self, ref, signature=None):
        if ref is None:
            return []
        if ref == "fundamental":
            from .robustness import fundamental_relations
            if signature is None:
                raise UsageError("'fundamental' needs a structure to read the signature from")
            self.inputs.append({"builtin": "fundamental"})
            return fundamental_relations(signature)
        self._hash(ref)
        return load_formulas(ref)

    def json_file(self, path):
        data = self._hash(path)
        try:
            return json.loads(data)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None

    def text_file(self, path):
        return self._hash(path).decode()

    def definitions(self, ref):
        if ref == "builtin:sat3-1in3":
            from .reductions.pp import sat3_to_one_in_three
            self.inputs.append({"builtin": "sat3-1in3"})
            return sat3_to_one_in_three()[0]
        return definitions_from_json(self.json_file(ref))


def _mapping(h):
    return list(h.mapping) if hasattr(h, "mapping") else list(h)


def _yes(flag):
    return ("YES", EXIT_YES) if flag else ("NO", EXIT_NO)


# subcommands; each returns (verdict, exit code) and fills rep.result


def cmd_solve(a, rep):
    inst, tmpl = rep.structure(a.instance), rep.structure(a.template)
    h = find_homomorphism(inst, tmpl)
    if h is not None:
        rep.result["homomorphism"] = _mapping(h)
    return _yes(h is not None)


def cmd_homs(a, rep):
    inst, tmpl = rep.structure(a.instance), rep.structure(a.template)
    if a.count:
        n = count_homomorphisms(inst, tmpl, limit=a.limit)
        rep.result["count"] = n
        return f"{n}", EXIT_YES
    out = []
    for h in enumerate_homomorphisms(inst, tmpl):
        out.append(_mapping(h))
        if a.limit is not None and len(out) >= a.limit:
            break
    rep.result["homomorphisms"] = out
    rep.result["count"] = len(out)
    return f"{len(out)}", EXIT_YES


def cmd_robust(a, rep):
    from .robustness import brute_force_robust, is_robust, is_robust_upto
    inst, tmpl = rep.structure(a.instance), rep.structure(a.template)
    F = rep.formulas(a.formulas, tmpl.signature)
    fn = brute_force_robust if a.brute else is_robust
    v = is_robust_upto(inst, tmpl, a.k, F, fn) if a.upto else fn(inst, tmpl, a.k, F)
    rep.result.update(v.to_json())
    return v.outcome.upper(), EXIT_YES if v.ok else EXIT_NO


def cmd_frozen(a, rep):
    from .reflection import frozen_tuples
    inst, tmpl = rep.structure(a.instance), rep.structure(a.template)
    F = rep.formulas(a.formulas, tmpl.signature)
    r = frozen_tuples(inst, tmpl, a.k, F)
    rep.result.update(r.to_json())
    rep.result["count"] = r.count()
    return f"{r.count()}", EXIT_YES


def cmd_reflect(a, rep):
    from .reflection import full_reflection, one_step_reflection
    inst, tmpl = rep.structure(a.instance), rep.structure(a.template)
    F = rep.formulas(a.formulas, tmpl.signature)
    if a.full:
        r = full_reflection(inst, tmpl, a.k, F)
    elif a.steps == 1:
        r = one_step_reflection(inst, tmpl, a.k, F)
    else:
        r = full_reflection(inst, tmpl, a.k, F, max_steps=a.steps)
    rep.result.update(r.to_json())
    return "DONE", EXIT_YES


def cmd_qvar(a, rep):
    from .reflection import implied_constraints
    inst, tmpl = rep.structure(a.instance), rep.structure(a.template)
    imp = implied_constraints(inst, tmpl)
    rep.result["implied"] = [c.to_json() for c in imp]
    return _yes(not imp)


def _reduce_out(a, rep, out):
    payload = out.to_json()
    if a.out:
        with open(a.out, "w") as fh:
            json.dump(payload, fh, separators=(",", ":"))
        rep.result["written"] = a.out
        rep.result["size"] = out.structure.size
        rep.result["hyperedges"] = len(out.hyperedge_provenance)
    else:
        rep.result["output"] = payload
    return "DONE", EXIT_YES


def cmd_reduce(a, rep):
    from .reductions import con, linear, pp, sat
    if a.kind == "pp":
        out = pp.pp_reduce(rep.structure(a.instance), rep.definitions(a.definitions))
        return _reduce_out(a, rep, out)
    if a.kind in ("gottlob", "to3sat"):
        src = sat.dimacs_import(rep.text_file(a.cnf))
        if a.kind == "to3sat":
            if a.k:
                src = sat.gottlob_amplify(src, a.k)
            return _reduce_out(a, rep, sat.reduce_to_3sat(src))
        amp = sat.gottlob_amplify(src, a.k)
        text = sat.dimacs_export(amp)
        if a.out:
            with open(a.out, "w") as fh:
                fh.write(text)
            rep.result["written"] = a.out
        else:
            rep.result["dimacs"] = text
        rep.result["vars"], rep.result["clauses"] = amp.num_vars, len(amp.clauses)
        return "DONE", EXIT_YES
    if a.kind == "con":
        inst, tmpl = rep.structure(a.instance), rep.structure(a.template)
        F = rep.formulas(a.formulas, T.with_constants(tmpl).signature) if a.formulas else None
        return _reduce_out(a, rep, con.con_reduce(inst, tmpl, a.k, F))
    if a.kind == "linear-chain":
        sys0 = linear.LinearSystem.from_json(rep.json_file(a.system))
        chain = linear.linear_chain(sys0)
        rep.result["systems"] = [s.to_json() for s in chain]
        if a.solve:
            rep.result["solutions"] = [
                dict(zip(("satisfiable", "dimension", "count"), linear.linear_solution_space(s))) for s in chain]
        return "DONE", EXIT_YES
    raise UsageError(f"unknown reduction {a.kind!r}")


def cmd_claw(a, rep):
    from .claws import claw_formulas, is_claw
    defs = rep.definitions(a.definitions)
    F = rep.formulas(a.formulas, defs.source)
    if a.check:
        from .formulas import formula_from_json
        phi = formula_from_json(rep.json_file(a.check))
        ok = is_claw(phi, defs, F, a.k, a.ell)
        rep.result["claw"] = ok
        return _yes(ok)
    out = claw_formulas(defs, F, a.k, a.ell, cap=a.cap, projected=a.projected)
    rep.result["count"] = len(out)
    rep.result["formulas"] = [f.to_json() for f in out]
    return f"{len(out)}", EXIT_YES


def cmd_types(a, rep):
    st = rep.structure(a.structure) if a.structure else None
    F = rep.formulas(a.formulas, st.signature if st is not None else None)
    if a.tuple is not None:
        if st is None:
            raise UsageError("--tuple needs --structure")
        tau = type_of(st, tuple(int(x) for x in a.tuple.split(",")), F)
        rep.result["type"] = tau.to_json()
        return f"{len(tau)}", EXIT_YES
    Fk = instantiate_Fk(F, a.k)
    rep.result["Fk"] = [f.to_json() for f in Fk]
    if a.all:
        rep.result["types"] = [t.to_json() for t in all_types(F, a.k)]
    return f"{len(Fk)}", EXIT_YES


def cmd_strategy(a, rep):
    from . import consistency as C
    inst, tmpl = rep.structure(a.instance), rep.structure(a.template)
    if a.kind == "establish":
        s = C.establish_consistency(inst, tmpl, a.j)
        if s is not None:
            rep.result["strategy"] = s.to_json()
        return ("ACCEPT", EXIT_YES) if s is not None else ("REJECT", EXIT_NO)
    if a.kind == "check":
        s = C.Strategy.from_json(rep.json_file(a.family))
        chk = C.check_strategy(s, inst, tmpl)
        rep.result.update(chk.to_json())
        return ("ACCEPT", EXIT_YES) if chk else ("REJECT", EXIT_NO)
    if a.k is None:
        raise UsageError(f"strategy {a.kind} needs --k")
    F = rep.formulas(a.formulas, tmpl.signature)
    if a.kind == "candidate":
        s = C.candidate_family(inst, tmpl, a.k, F, a.j)
        rep.result["strategy"] = s.to_json()
        return f"{len(s)}", EXIT_YES
    verdict, chk = C.ant_separator(inst, tmpl, a.k, F, a.j)
    rep.result.update(chk.to_json())
    return verdict.upper(), EXIT_YES if verdict == C.ACCEPT else EXIT_NO


def _identities(a):
    from . import polymorphisms as P
    if a.identity == "bw":
        return P.bw_pair(a.quasi)
    if a.identity == "none":
        return P.no_identities(a.arity)
    return P.PRESETS[a.identity](a.arity, a.quasi)


def cmd_poly(a, rep):
    from . import polymorphisms as P
    tmpl = rep.structure(a.template)
    if a.kind == "find":
        spec = _identities(a)
        got = P.find_polymorphism(tmpl, spec)
        rep.result["identities"] = spec.to_json()
        if got is not None:
            rep.result["tables"] = {op: t.to_json() for op, t in sorted(got.items())}
        return ("FOUND", EXIT_YES) if got is not None else ("ABSENT", EXIT_NO)
    if a.kind == "check":
        table = P.OperationTable.from_json(rep.json_file(a.table))
        ok = P.check_preservation(table, tmpl)
        rep.result["preserves"] = ok
        if a.identity:
            a.arity = table.arity
            spec = _identities(a)
            op = next(iter(spec.arities))
            rep.result["identities"] = P.check_identities({op: table}, spec)
            ok = ok and rep.result["identities"]
        return _yes(ok)
    if a.kind == "core":
        ok = P.is_core(tmpl)
        rep.result["core"] = ok
        return _yes(ok)
    if a.kind == "retract":
        sub, kept, r = P.core_retract(tmpl, with_map=True)
        rep.result.update({"core": sub.to_json(), "kept": list(kept), "retraction": list(r)})
        return "DONE", EXIT_YES
    if a.kind == "bwpair":
        got = P.has_bw_pair(tmpl, a.quasi)
        if got is not None:
            rep.result["w3"], rep.result["w4"] = got[0].to_json(), got[1].to_json()
        return ("FOUND", EXIT_YES) if got is not None else ("ABSENT", EXIT_NO)
    raise UsageError(f"unknown poly action {a.kind!r}")


def cmd_theory(a, rep):
    tmpl = rep.structure(a.template)
    F = rep.formulas(a.formulas, tmpl.signature)
    th = kFq_theory(tmpl, a.k, F)
    rep.result["count"] = len(th)
    rep.result["quasi_equations"] = [str(q) for q in th]
    return f"{len(th)}", EXIT_YES


def cmd_dimacs(a, rep):
    from .reductions import sat
    if a.kind == "import":
        inst = sat.dimacs_import(rep.text_file(a.file))
        rep.result["clauses"] = inst.to_json()
        if inst.clauses:
            rep.result["structure"] = inst.to_structure().to_json()
        return "DONE", EXIT_YES
    st = rep.structure(a.file)
    rep.result["dimacs"] = sat.dimacs_export(sat.SignedClauseInstance.from_structure(st))
    return "DONE", EXIT_YES


# parser


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--budget", type=int, default=argparse.SUPPRESS,
                   help="search-node cap (<= 0 for none; default $ANTCSP_BUDGET)")
    p.add_argument("--seed-order", choices=["lex"], default=argparse.SUPPRESS,
                   help="search order; only lexicographic is implemented")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", dest="fmt", action="store_const", const="json", default=argparse.SUPPRESS)
    g.add_argument("--text", dest="fmt", action="store_const", const="text", default=argparse.SUPPRESS)
    return p


def build_parser():
    common = _common()
    p = argparse.ArgumentParser(prog="antcsp", parents=[common],
                                description="Robust satisfiability and related tools for finite-template CSPs.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    def pair(sp):
        sp.add_argument("--template", required=True, help="structure file or builtin:NAME")
        sp.add_argument("--instance", required=True)

    def kf(sp, need_k=True):
        sp.add_argument("--k", type=int, required=need_k)
        sp.add_argument("--formulas", help="formula-set JSON, or 'fundamental'")

    sp = add("solve", cmd_solve, "find one homomorphism")
    pair(sp)
    sp = add("homs", cmd_homs, "list or count homomorphisms")
    pair(sp)
    sp.add_argument("--limit", type=int)
    sp.add_argument("--count", action="store_true")
    sp = add("robust", cmd_robust, "(k,F)-robust satisfiability")
    pair(sp)
    kf(sp)
    sp.add_argument("--upto", action="store_true", help="check every level up to k")
    sp.add_argument("--brute", action="store_true", help="use the brute-force checker")
    sp = add("frozen", cmd_frozen, "frozen tuples and equalities")
    pair(sp)
    kf(sp)
    sp = add("reflect", cmd_reflect, "reflect frozen tuples into the instance")
    pair(sp)
    kf(sp)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--steps", type=int, default=1)
    g.add_argument("--full", action="store_true")
    sp = add("qvar", cmd_qvar, "implied constraints (quasivariety membership)")
    pair(sp)

    sp = add("reduce", cmd_reduce, "run a reduction")
    sp.add_argument("kind", choices=["pp", "gottlob", "to3sat", "con", "linear-chain"])
    sp.add_argument("--instance")
    sp.add_argument("--template")
    sp.add_argument("--definitions", help="definition-set JSON or builtin:sat3-1in3")
    sp.add_argument("--cnf", help="DIMACS file")
    sp.add_argument("--system", help="linear system JSON")
    sp.add_argument("--k", type=int)
    sp.add_argument("--formulas")
    sp.add_argument("--solve", action="store_true", help="linear-chain: also count solutions")
    sp.add_argument("--out", help="write the produced instance here")

    sp = add("claw", cmd_claw, "enumerate claw formulas or test membership")
    sp.add_argument("--definitions", required=True)
    sp.add_argument("--formulas")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--cap", type=int)
    sp.add_argument("--projected", action="store_true", help="wrists from projected types only")
    sp.add_argument("--check", help="formula JSON to test for membership")

    sp = add("types", cmd_types, "instances F_k, all types, or the type of a tuple")
    sp.add_argument("--formulas", required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--structure")
    sp.add_argument("--tuple", help="comma-separated elements")
    sp.add_argument("--all", action="store_true")

    sp = add("strategy", cmd_strategy, "strategies and the local-consistency separator")
    sp.add_argument("kind", choices=["candidate", "check", "establish", "separator"])
    pair(sp)
    sp.add_argument("--j", type=int, required=True)
    kf(sp, need_k=False)
    sp.add_argument("--family", help="strategy JSON for check")

    sp = add("poly", cmd_poly, "polymorphisms, cores and retracts")
    sp.add_argument("kind", choices=["find", "check", "core", "retract", "bwpair"])
    sp.add_argument("--template", required=True)
    sp.add_argument("--identity", choices=["wnu", "nu", "bw", "none"])
    sp.add_argument("--arity", type=int, default=3)
    sp.add_argument("--quasi", action="store_true")
    sp.add_argument("--table", help="operation table JSON for check")

    sp = add("theory", cmd_theory, "quasi-equations of the (k,F) theory")
    sp.add_argument("--template", required=True)
    kf(sp)

    sp = add("dimacs", cmd_dimacs, "DIMACS conversion")
    sp.add_argument("kind", choices=["import", "export"])
    sp.add_argument("file")
    return p


def _validate(a):
    need = {
        ("reduce", "pp"): ("instance", "definitions"),
        ("reduce", "gottlob"): ("cnf", "k"),
        ("reduce", "to3sat"): ("cnf",),
        ("reduce", "con"): ("instance", "template"),
        ("reduce", "linear-chain"): ("system",),
        ("strategy", "check"): ("family",),
        ("poly", "find"): ("identity",),
        ("poly", "check"): ("table",),
    }.get((a.command, getattr(a, "kind", None)), ())
    for field in need:
        if getattr(a, field, None) is None:
            raise UsageError(f"{a.command} {a.kind} needs --{field}")


def _text(rep_obj):
    lines = [f"{rep_obj['command']}: {rep_obj['verdict']}"]
    for key, val in rep_obj["result"].items():
        if isinstance(val, str) and "\n" in val:
            lines.append(f"{key}:")
            lines.append(val.rstrip("\n"))
        else:
            lines.append(f"{key}: {json.dumps(val, separators=(',', ':'))}")
    lines.append(f"time: {rep_obj['timing']['seconds']:.3f}s  nodes: {rep_obj['budget']['used']}")
    return "\n".join(lines)


def run(argv=None):
    """Parse, dispatch and return (exit code, report dict or None, output format)."""
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_YES if exc.code == 0 else EXIT_USAGE), None, "json"
    command = a.command + (f" {a.kind}" if getattr(a, "kind", None) else "")
    rep = Report(command)
    limit = getattr(a, "budget", None)
    t0 = time.perf_counter()
    with _budget.budget_scope(limit) as b:
        try:
            _validate(a)
            verdict, code = a.fn(a, rep)
        except _budget.BudgetExceeded as exc:
            verdict, code = "BUDGET_EXCEEDED", EXIT_BUDGET
            rep.result = {"error": str(exc)}
        except (UsageError, StructureError, FormulaError, ValueError, OSError) as exc:
            verdict, code = "ERROR", EXIT_USAGE
            rep.result = {"error": str(exc)}
    out = {
        "command": command,
        "inputs": rep.inputs,
        "verdict": verdict,
        "result": rep.result,
        "timing": {"seconds": round(time.perf_counter() - t0, 6)},
        "budget": {"limit": b.limit, "used": b.used},
    }
    return code, out, getattr(a, "fmt", "json")


def main(argv=None):
    code, out, fmt = run(argv)
    if out is not None:
        if fmt == "json":
            print(json.dumps(out, indent=1))
        else:
            print(_text(out))
        if out["verdict"] == "ERROR":
            print(f"antcsp: {out['result']['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
