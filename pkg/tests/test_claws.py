import itertools

import networkx as nx
import pytest
from networkx.algorithms.isomorphism import categorical_multiedge_match, categorical_node_match

from antcsp.claws import ClawFormula, claw_formulas, enumerate_claws, is_claw, set_partitions
from antcsp.formulas import PpDefinitionSet, PpFormula, translate_to_target
from antcsp.reductions.pp import sat3_to_one_in_three
from antcsp.reductions.sat import chain_definitions
from antcsp.robustness import fundamental_relations

DEFS, _ = sat3_to_one_in_three()


def test_set_partitions_are_bell_numbers():
    assert [sum(1 for _ in set_partitions(range(n))) for n in range(7)] == [1, 1, 2, 5, 15, 52, 203]


def test_arity_zero_without_types_is_the_empty_sentence():
    assert claw_formulas(DEFS, [], 0, 0) == [PpFormula(())]


def test_worked_example_is_a_claw():
    F = fundamental_relations(DEFS.source)
    rho = DEFS["R3_000"]
    ren = {"x1": "v1", "x2": "x2", "x3": "x3", "y1": "y1", "y2": "v2", "y3": "y3", "y4": "v3"}
    talon = tuple((s, tuple(ren[v] for v in a)) for s, a in rho.atoms)
    sigma = translate_to_target(PpFormula(("v1", "x2", "x3", "v4"), (),
                                          (("R3_010", ("v1", "x2", "v4")), ("R3_111", ("x3", "x3", "v4")))), DEFS)
    phi = PpFormula(("v1", "v2", "v3", "v4"), ("y1", "x2", "y3", "x3") + sigma.exists, talon + sigma.atoms)
    assert is_claw(phi, DEFS, F, 4, 12)
    assert not is_claw(phi, DEFS, F, 3, 12)


def test_non_claws_rejected():
    rho = DEFS["R3_000"]
    # a lone target atom is no definition copy
    assert not is_claw(PpFormula(("a",), ("b", "c"), (("r_000", ("a", "b", "c")),)), DEFS, [], 1, 3)
    # wrong number of free variables
    assert not is_claw(PpFormula(rho.free, rho.exists, rho.atoms), DEFS, [], 1, 3)
    # two copies sharing an existential variable
    a = rho.rename({"y1": "s"})
    b = rho.rename({v: v + "b" for v in rho.variables()}).rename({"y1b": "s"})
    shared = PpFormula(("x1",), tuple(sorted(set(a.variables() + b.variables()) - {"x1"})), a.atoms + b.atoms)
    assert not is_claw(shared, DEFS, [], 1, 3)


def test_every_enumerated_claw_passes_membership():
    out = claw_formulas(DEFS, [], 1, 3)
    assert len(out) == 277
    assert all(is_claw(f, DEFS, [], 1, 3) for f in out)


def test_claws_with_types_pass_membership():
    F = fundamental_relations(DEFS.source)[:1]
    out = claw_formulas(DEFS, F, 1, 1)
    assert len(out) > 277 - 1
    assert all(is_claw(f, DEFS, F, 1, 1) for f in out)


def test_projected_filter_is_a_subset():
    F = fundamental_relations(DEFS.source)[:1]
    full = set(claw_formulas(DEFS, F, 1, 1))
    assert set(claw_formulas(DEFS, F, 1, 1, projected=True)) <= full


def test_construction_record_serializes():
    c = next(iter(enumerate_claws(DEFS, [], 1, 0)))
    assert isinstance(c, ClawFormula)
    obj = c.to_json(DEFS)
    assert obj["free"] == list(c.free)


def _graph_of(f: PpFormula):
    g = nx.MultiDiGraph()
    for v in f.variables():
        g.add_node(("v", v), kind="free" if v in f.free else "bound")
    for i, (s, args) in enumerate(f.atoms):
        g.add_node(("a", i), kind=s)
        for p, v in enumerate(args):
            g.add_edge(("a", i), ("v", v), pos=p)
    return g


def _direct_claw_count(defs, symbol):
    """Identification maps of one talon copy as restricted-growth strings,
    every free-variable choice, deduplicated by graph isomorphism."""
    rho = defs[symbol]
    n = len(rho.free)
    reps = {}
    for growth in itertools.product(range(n), repeat=n):
        if any(growth[i] > max(growth[:i], default=-1) + 1 for i in range(n)):
            continue
        ren = {v: f"o{growth[i]}" for i, v in enumerate(rho.free)}
        atoms = tuple(dict.fromkeys((s, tuple(ren.get(v, v) for v in a)) for s, a in rho.atoms))
        allv = sorted({v for _, a in atoms for v in a})
        for free in allv:
            f = PpFormula((free,), tuple(v for v in allv if v != free), atoms)
            g = _graph_of(f)
            key = (len(allv), tuple(sorted(a for _, a in atoms)), g.degree(("v", free)),
                   tuple(sorted(d for _, d in g.degree())))
            bucket = reps.setdefault(key, [])
            if not any(nx.is_isomorphic(g, h, node_match=categorical_node_match("kind", None),
                                        edge_match=categorical_multiedge_match("pos", None)) for h in bucket):
                bucket.append(g)
    # no talon-free claw: with bound 0 it has no variable to leave free
    return sum(len(b) for b in reps.values())


@pytest.mark.parametrize("symbol", ["R6_101100"])
def test_width_six_talon_count_matches_direct_enumeration(symbol):
    full = chain_definitions(6)
    defs = PpDefinitionSet({symbol: full[symbol]}, None, full.target)
    assert len(claw_formulas(defs, [], 1, 0)) == _direct_claw_count(defs, symbol)
