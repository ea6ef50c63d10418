import itertools
import random

import pytest
from hypothesis import given, strategies as st

from antcsp.core import RelationalStructure
from antcsp.formulas import (EQ, TRUE, FormulaError, PpFormula, all_types, canonicalize, closure_union,
                             definitions_from_json, eval_pp, formula_from_json, instantiate_Fk,
                             kFq_theory, project_types, theory_contains, translate_to_target, type_of)
from antcsp.reductions.pp import sat3_to_one_in_three
from antcsp.robustness import fundamental_relations
from antcsp.templates import GRAPH, complete_graph, cycle, one_in_three, sat_template

from _gen import random_structure

K2, K3 = complete_graph(2), complete_graph(3)
E = PpFormula(("x1", "x2"), (), (("E", ("x1", "x2")),))
PATH2 = PpFormula(("x1", "x2"), ("y",), (("E", ("x1", "y")), ("E", ("y", "x2"))))


def test_eval_with_witness():
    assert eval_pp(K3, PATH2, (0, 0), witness=True) == (True, (1,))
    assert eval_pp(K2, PATH2, (0, 1)) is False
    assert eval_pp(K3, TRUE, ()) is True


def test_eval_binding_mismatch():
    with pytest.raises(FormulaError):
        eval_pp(K3, PATH2, (0,))


def test_formula_json():
    f = formula_from_json({"free": ["x1"], "exists": ["y"],
                           "atoms": [{"rel": "E", "args": ["x1", "y"]}, {"eq": ["x1", "y"]}]})
    assert f.atoms == (("E", ("x1", "y")), (EQ, ("x1", "y")))
    assert formula_from_json(f.to_json()) == f
    with pytest.raises(FormulaError):
        formula_from_json({"free": ["x1"], "atoms": [{"rel": "E", "args": ["x1", "z"]}]})


def test_instantiate_counts():
    assert len(instantiate_Fk([E], 2)) == 4
    one = instantiate_Fk([E], 1)
    assert len(one) == 1 and one[0].atoms == (("E", ("x1", "x1")),)
    assert instantiate_Fk([], 3) == []


def test_type_of_examples():
    tau = type_of(cycle(3), (0, 1), [E])
    assert sorted(m.atoms for m in tau) == [(("E", ("x1", "x2")),), (("E", ("x2", "x1")),)]
    assert len(type_of(cycle(3), (0, 1), [])) == 0
    r = fundamental_relations(one_in_three().signature)
    inst = RelationalStructure(one_in_three().signature, 4, {"r": [(0, 1, 2)]})
    assert len(type_of(inst, (2, 3), r)) == 0


def test_project_types_counts():
    assert project_types([], 3, 1) == [PpFormula(("x1",))]
    assert len(project_types([E], 2, 2)) == 16
    sentences = project_types([E], 1, 0)
    assert len(sentences) == 2 and all(not f.free for f in sentences)
    with pytest.raises(FormulaError):
        project_types([E], 1, 2)


def test_closure_union_counts():
    # levels 0, 1, 2 of F={E}, k=2 are 2, 2 and 16 formulas, pairwise different arities
    assert len(closure_union([E], 2)) == sum(len(project_types([E], 2, i)) for i in range(3))
    assert closure_union([], 2) == [PpFormula(()), PpFormula(("x1",)), PpFormula(("x1", "x2"))]
    assert closure_union([E], 0) == [PpFormula(())]


def test_translate_clause():
    defs, _ = sat3_to_one_in_three()
    psi = PpFormula(("a", "b", "c"), (), (("R3_100", ("a", "b", "c")),))
    out = translate_to_target(psi, defs)
    assert len(out.atoms) == 3 and len(out.exists) == 4
    two = PpFormula(("a", "b", "c"), (), (("R3_100", ("a", "b", "c")), ("R3_011", ("c", "b", "a"))))
    out2 = translate_to_target(two, defs)
    assert len(out2.exists) == 8 == len(set(out2.exists))
    assert translate_to_target(TRUE, defs) == TRUE
    with pytest.raises(FormulaError):
        translate_to_target(PpFormula(("a",), (), (("E", ("a", "a")),)), defs)


def test_definitions_json_round_trip():
    defs, _ = sat3_to_one_in_three()
    back = definitions_from_json(defs.to_json())
    assert back.symbols() == defs.symbols()
    assert all(back[r] == defs[r] for r in defs.symbols())


def test_theory_examples():
    th = kFq_theory(K2, 2, [E])
    got = {(tuple(m.atoms for m in q.premise), q.conclusion) for q in th}
    assert (((("E", ("x1", "x2")),),), ("E", ("x2", "x1"))) in got
    assert ((), (EQ, ("x1", "x1"))) in got
    th3 = kFq_theory(K3, 2, [E])
    assert not any(not q.premise.members and q.conclusion == ("E", ("x1", "x2")) for q in th3)
    assert theory_contains(K2, 2, [E], instantiate_Fk([E], 2)[1:2], ("E", ("x2", "x1")))


def _direct_eval(structure, f, binding):
    env0 = dict(zip(f.free, binding))
    for vals in itertools.product(range(structure.size), repeat=len(f.exists)):
        env = dict(env0, **dict(zip(f.exists, vals)))
        if all((env[a[0]] == env[a[1]]) if s == EQ else structure.holds(s, tuple(env[v] for v in a))
               for s, a in f.atoms):
            return True
    return False


@st.composite
def formula_and_structure(draw):
    rng = random.Random(draw(st.integers(0, 10 ** 6)))
    A = random_structure(rng, GRAPH, rng.randint(1, 4), density=0.4)
    nfree, nex = rng.randint(0, 3), rng.randint(0, 4)
    free = tuple(f"x{i + 1}" for i in range(nfree))
    ex = tuple(f"y{i + 1}" for i in range(nex))
    vs = free + ex
    atoms = []
    if vs:
        for _ in range(rng.randint(0, 5)):
            s = EQ if rng.random() < 0.15 else "E"
            atoms.append((s, (rng.choice(vs), rng.choice(vs))))
    return A, PpFormula(free, ex, tuple(atoms)), rng


@given(formula_and_structure())
def test_eval_matches_direct_enumeration(data):
    A, f, _ = data
    for b in itertools.product(range(A.size), repeat=len(f.free)):
        assert eval_pp(A, f, b) == _direct_eval(A, f, b)


@given(formula_and_structure())
def test_canonicalize_idempotent_and_sound(data):
    A, f, _ = data
    c = canonicalize(f)
    assert canonicalize(c) == c
    for b in itertools.product(range(A.size), repeat=len(f.free)):
        assert eval_pp(A, f, b) == eval_pp(A, c, b)


@given(st.integers(0, 10 ** 6))
def test_compatibility_equals_type_transfer(seed):
    rng = random.Random(seed)
    B = random_structure(rng, GRAPH, rng.randint(2, 5), density=0.4)
    A = rng.choice([K2, K3, cycle(4)])
    F = rng.choice([[E], [PATH2], [E, PATH2]])
    k = rng.randint(1, min(3, B.size))
    tup = tuple(rng.sample(range(B.size), k))
    img = tuple(rng.randrange(A.size) for _ in tup)
    Fk = instantiate_Fk(F, k)
    direct = all(eval_pp(A, g, img) for g in Fk if eval_pp(B, g, tup))
    tau = type_of(B, tup, F)
    assert direct == eval_pp(A, tau.formula(), img)


@given(st.integers(0, 10 ** 6))
def test_translation_agrees_with_source(seed):
    rng = random.Random(seed)
    defs, target = sat3_to_one_in_three()
    src = sat_template(3)
    nv = rng.randint(1, 4)
    vs = [f"v{i}" for i in range(nv)]
    free = tuple(vs[:rng.randint(0, nv)])
    ex = tuple(v for v in vs if v not in free)
    atoms = tuple((rng.choice(defs.symbols()), tuple(rng.choice(vs) for _ in range(3)))
                  for _ in range(rng.randint(0, 2)))
    used = {v for _, a in atoms for v in a} | set(free)
    psi = PpFormula(free, tuple(v for v in ex if v in used), atoms)
    t = translate_to_target(psi, defs)
    for b in itertools.product((0, 1), repeat=len(psi.free)):
        assert eval_pp(src, psi, b) == eval_pp(target, t, b)


def test_all_types_includes_empty():
    ts = list(all_types([E], 1))
    assert len(ts) == 2 and len(ts[0]) == 0
