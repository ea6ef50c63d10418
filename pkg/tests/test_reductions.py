import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from antcsp.core import RelationalStructure, find_homomorphism
from antcsp.formulas import FormulaError, PpDefinitionSet
from antcsp.reductions import (EXISTENTIAL, ClauseError, SignedClauseInstance, arrow_diagram,
                               chain_definitions, chain_families, dimacs_export, dimacs_import,
                               gottlob_amplify, pp_reduce, reduce_to_3sat, reduce_width,
                               sat3_to_one_in_three)
from antcsp.robustness import brute_force_robust, is_robust
from antcsp.templates import sat_signature, sat_template

from _gen import random_clauses

SAT3 = sat_template(3)


def _sat(struct, template):
    return find_homomorphism(struct, template) is not None


# pp-reduction


def test_one_clause_to_one_in_three():
    defs, target = sat3_to_one_in_three()
    src = SignedClauseInstance(3, [((0, 0), (1, 0), (2, 0))])
    out = pp_reduce(src.to_structure(), defs)
    assert out.structure.size == 7
    assert len(list(out.structure.hyperedges())) == 3
    assert out.opens() == [0, 1, 2] and len(out.existentials()) == 4
    assert out.element_provenance[3] == (EXISTENTIAL, 0, 0)
    assert [c for _, _, _, c in out.hyperedge_provenance] == [0, 1, 2]


def test_pp_reduce_empty():
    defs, _ = sat3_to_one_in_three()
    out = pp_reduce(RelationalStructure(sat_signature(3), 0, {}), defs)
    assert out.structure.size == 0 and out.hyperedge_provenance == []


def test_pp_reduce_missing_definition():
    defs, _ = sat3_to_one_in_three()
    partial = PpDefinitionSet({"R3_000": defs["R3_000"]}, None, defs.target)
    src = SignedClauseInstance(3, [((0, 1), (1, 0), (2, 0))])
    with pytest.raises(FormulaError):
        pp_reduce(src.to_structure(), partial)


def test_pp_reduce_preserves_satisfiability():
    defs, target = sat3_to_one_in_three()
    rng = random.Random(7)
    for _ in range(10):
        src = random_clauses(rng, 3, rng.randint(1, 6))
        out = pp_reduce(src.to_structure(), defs)
        assert src.is_satisfiable() == _sat(out.structure, target)


# Gottlob amplification


def test_amplify_one_clause():
    src = SignedClauseInstance(3, [((0, 0), (1, 1), (2, 0))])
    amp = gottlob_amplify(src, 1)
    assert amp.num_vars == 9 and len(amp.clauses) == 27 and amp.width == 6
    # signs follow the source literal each copy came from
    for c in amp.clauses:
        assert [s for _, s in c] == [0, 0, 1, 1, 0, 0]
    assert len(gottlob_amplify(src, 2).clauses) == 10 ** 3


def test_amplify_zero_is_identity():
    src = random_clauses(random.Random(1), 4, 3)
    assert gottlob_amplify(src, 0) == src


@pytest.mark.parametrize("seed", range(6))
def test_amplify_robust_k1(seed):
    rng = random.Random(seed)
    src = random_clauses(rng, rng.randint(2, 4), rng.randint(1, 3))
    amp = gottlob_amplify(src, 1).to_structure()
    tmpl = sat_template(6)
    assert src.is_satisfiable() == _sat(amp, tmpl)
    if src.is_satisfiable():
        assert brute_force_robust(amp, tmpl, 1, []).ok


def test_amplify_robust_k2():
    rng = random.Random(11)
    seen = 0
    while seen < 2:
        src = random_clauses(rng, 2, 2)
        if not src.is_satisfiable():
            continue
        seen += 1
        assert is_robust(gottlob_amplify(src, 2).to_structure(), sat_template(9), 2, []).ok


def test_amplify_unsat_stays_unsat():
    # all eight sign patterns on one variable triple
    src = SignedClauseInstance(3, [tuple(zip(range(3), s)) for s in itertools.product((0, 1), repeat=3)])
    assert not src.is_satisfiable()
    assert not _sat(gottlob_amplify(src, 1).to_structure(), sat_template(6))


# width reduction


def test_chain_counts():
    out = reduce_to_3sat(SignedClauseInstance(6, [tuple((i, i % 2) for i in range(6))]))
    assert len(out.hyperedge_provenance) == 4 and len(out.existentials()) == 3
    out = reduce_to_3sat(SignedClauseInstance(4, [tuple((i, 0) for i in range(4))]))
    assert len(out.hyperedge_provenance) == 2 and len(out.existentials()) == 1


def test_chain_rejects_short_clauses():
    with pytest.raises(ClauseError):
        reduce_to_3sat(random_clauses(random.Random(0), 3, 1))


def test_chain_preserves_satisfiability():
    rng = random.Random(5)
    for _ in range(15):
        src = random_clauses(rng, rng.randint(3, 6), rng.randint(1, 4), width=6)
        out = reduce_to_3sat(src)
        assert src.is_satisfiable() == _sat(out.structure, SAT3)


def test_chain_definitions_match_direct_split():
    rng = random.Random(3)
    for _ in range(10):
        # hyperedge order fixes the numbering of the fresh link elements
        src = SignedClauseInstance.from_structure(random_clauses(rng, 5, rng.randint(1, 3), width=6).to_structure())
        direct = reduce_to_3sat(src)
        via_defs = pp_reduce(src.to_structure(), chain_definitions(6))
        assert direct.structure == via_defs.structure


def test_four_wide_chains():
    out = reduce_width(SignedClauseInstance(12, [tuple((i, 0) for i in range(12))]), 4)
    assert [len(t) for _, t in out.family(0)] == [4] * 5


# arrows


def _worked_family():
    out = reduce_to_3sat(SignedClauseInstance(6, [tuple((i, 0) for i in range(6))]))
    fam, = chain_families(out)
    assert fam.links == [6, 7, 8]
    return fam


def test_worked_arrow_example():
    # links 0,1,0 and the first open literal fixed to 0
    d = arrow_diagram(_worked_family(), {6: 0, 7: 1, 8: 0, 0: 0})
    assert d.arrows == [(0, "->"), (1, "<-"), (2, "->"), (3, "<-"), (4, "<-")]
    assert d.convergent == [(0, 1), (2, 3)]
    assert d.stabilizers() == {1: 1, 3: 1}
    assert not d.failed


def test_arrows_with_nothing_assigned():
    d = arrow_diagram(_worked_family(), {})
    assert d.arrows == [(0, "->"), (4, "<-")]
    assert d.convergent == [(0, 4)]
    assert d.stabilizers() == {0: 1}


def test_arrow_interval_can_fail():
    d = arrow_diagram(_worked_family(), {6: 1, 7: 0, 2: 0})
    assert d.failed and d.choices[-1][3] == "failed"


def test_arrows_reject_foreign_elements():
    with pytest.raises(ValueError):
        arrow_diagram(_worked_family(), {42: 1})


@settings(deadline=None)
@given(st.lists(st.integers(0, 1), min_size=3, max_size=3), st.lists(st.integers(0, 1), min_size=6, max_size=6))
def test_family_satisfied_iff_intervals_stabilized(links, opens):
    fam = _worked_family()
    nu = dict(zip(fam.links, links)) | dict(enumerate(opens))
    d = arrow_diagram(fam, nu)
    structure = reduce_to_3sat(SignedClauseInstance(6, [tuple((v, 0) for v in range(6))])).structure
    satisfied = all(
        any(nu[v] != int(b) for v, b in zip(t, name.partition("_")[2]))
        for name, t in structure.hyperedges())
    assert satisfied == all(status == "stabilized" for _, _, _, status in d.choices)


# DIMACS


def test_dimacs_header_example():
    inst = dimacs_import("p cnf 3 1\n1 -2 3 0\n")
    assert inst.clauses == (((0, 0), (1, 1), (2, 0)),)


def test_dimacs_empty():
    inst = dimacs_import("p cnf 0 0\n")
    assert inst.num_vars == 0 and inst.clauses == ()


def test_dimacs_round_trip():
    rng = random.Random(99)
    for _ in range(20):
        inst = random_clauses(rng, rng.randint(1, 6), rng.randint(0, 5), width=rng.choice([3, 4, 6]))
        text = dimacs_export(inst)
        assert dimacs_import(text) == inst
        assert dimacs_export(dimacs_import(text)) == text


@pytest.mark.parametrize("text", ["1 2 3 0\n", "p cnf 2 1\n1 2 3 0\n", "p cnf 3 2\n1 2 3 0\n",
                                  "p cnf 3 2\n1 2 3 0\n1 2 0\n", "p cnf 3 1\n1 x 3 0\n"])
def test_dimacs_errors(text):
    with pytest.raises(ClauseError):
        dimacs_import(text)
