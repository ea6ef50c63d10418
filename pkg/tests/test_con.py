import random

import pytest

from antcsp.core import RelationalStructure, find_homomorphism
from antcsp.reductions import NotACore, build_G, canonical_no, con_reduce
from antcsp.reductions.con import COPY
from antcsp.robustness import fundamental_relations, is_robust
from antcsp.templates import complete_graph, constant_symbol, cycle, with_constants

from _gen import random_structure

K3 = complete_graph(3)
K3C = with_constants(K3)


def _instance(n, edges=(), consts=()):
    rels = {"E": list(edges)}
    for b, a in consts:
        rels.setdefault(constant_symbol(a), []).append((b,))
    return RelationalStructure(K3C.signature, n, rels)


def test_constant_glued_to_copy():
    out = con_reduce(_instance(1, consts=[(0, 0)]), K3)
    assert out.structure.size == 3
    assert out.copy_map == [0, 1, 2]
    assert out.element_provenance[0][0] == "open"
    assert sorted(out.structure.relation("E")) == sorted(K3.relation("E"))


def test_no_constants_gives_disjoint_union():
    out = con_reduce(_instance(2, edges=[(0, 1), (1, 0)]), K3)
    assert out.structure.size == 5
    assert out.copy_map == [2, 3, 4]
    assert [p[0] for p in out.element_provenance] == ["open", "open", COPY, COPY, COPY]
    assert len(out.structure.relation("E")) == 2 + 6


def test_clashing_constants_give_no_instance():
    out = con_reduce(_instance(1, consts=[(0, 0), (0, 1)]), K3)
    assert out.pre_map is None
    assert find_homomorphism(out.structure, K3) is None
    assert out.structure == canonical_no(K3, 0, 1)


def test_edge_forces_clash_after_reflection():
    # an edge between two copies of constant 0 is unsatisfiable
    out = con_reduce(_instance(2, edges=[(0, 1)], consts=[(0, 0), (1, 0)]), K3)
    assert find_homomorphism(out.structure, K3) is None


def test_requires_core():
    c4 = cycle(4)
    inst = RelationalStructure(with_constants(c4).signature, 1, {})
    with pytest.raises(NotACore):
        con_reduce(inst, c4)


def test_satisfiability_and_robustness_carry_over():
    rng = random.Random(0)
    F = fundamental_relations(K3C.signature)
    G = build_G(F, K3, 2)
    robust_seen = 0
    for _ in range(150):
        B = random_structure(rng, K3C.signature, rng.randint(1, 4), max_tuples=2)
        out = con_reduce(B, K3)
        assert (find_homomorphism(B, K3C) is None) == (find_homomorphism(out.structure, K3) is None)
        if is_robust(B, K3C, 2, F).ok:
            robust_seen += 1
            assert is_robust(out.structure, K3, 2, G).ok
    assert robust_seen >= 20


def test_build_G_shapes():
    G = build_G([], K3, 2)
    assert all(len(g.free) == 2 for g in G)
    assert all(not any(s.startswith("is") for s, _ in g.atoms) for g in G)
    assert len(G) == len(set(G))
