import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from antcsp.core import enumerate_homomorphisms
from antcsp.formulas import PpFormula, project_types
from antcsp.robustness import (NON_EXTENDABLE, UNSATISFIABLE, brute_force_robust, is_compatible,
                               is_robust, is_robust_upto, verify_counterexample, fundamental_relations)
from antcsp.templates import GRAPH, complete_graph, cycle, one_in_three

from _gen import random_structure

K2, K3 = complete_graph(2), complete_graph(3)
TRI = cycle(3)
E = fundamental_relations(GRAPH)


def test_compatibility_on_the_triangle():
    assert not is_compatible(TRI, K3, {0: 0, 1: 0}, E)
    assert is_compatible(TRI, K3, {0: 0, 1: 1}, E)
    assert is_compatible(TRI, K3, {}, E)
    assert is_compatible(TRI, K3, {0: 0, 1: 0}, [])


def test_compatibility_range_errors():
    with pytest.raises(ValueError):
        is_compatible(TRI, K3, {0: 3}, E)
    with pytest.raises(ValueError):
        is_compatible(TRI, K3, {7: 0}, E)


def test_triangle_robust_with_edges():
    assert is_robust(TRI, K3, 2, E).ok
    assert brute_force_robust(TRI, K3, 2, E).ok


def test_triangle_not_robust_without_formulas():
    for decide in (is_robust, brute_force_robust):
        v = decide(TRI, K3, 2, [])
        assert not v.ok and v.reason == NON_EXTENDABLE
        assert v.subset == (0, 1) and v.assignment == {0: 0, 1: 0}
        assert verify_counterexample(TRI, K3, v, [])


def test_unsatisfiable_at_level_zero():
    for decide in (is_robust, brute_force_robust):
        v = decide(complete_graph(4), K3, 0, [])
        assert not v.ok and v.reason == UNSATISFIABLE


def test_upto():
    assert is_robust_upto(TRI, K3, 2, E).ok
    v = is_robust_upto(TRI, K3, 2, [])
    assert not v.ok and v.level == 2
    assert is_robust_upto(TRI, K3, 0, []).ok
    assert not is_robust_upto(complete_graph(4), K3, 0, []).ok


def test_small_instance_only_needs_a_solution():
    edge = complete_graph(2)
    assert is_robust(edge, K3, 3, []).ok
    assert brute_force_robust(edge, K3, 3, []).ok


def test_negative_k():
    with pytest.raises(ValueError):
        is_robust(TRI, K3, -1, [])


TEMPLATES = [K2, K3, one_in_three()]


def _random_case(rng):
    A = rng.choice(TEMPLATES)
    n = rng.randint(1, 6)
    B = random_structure(rng, A.signature, n, max_tuples=rng.randint(1, 5))
    k = rng.randint(0, 3)
    F = rng.choice([[], fundamental_relations(A.signature)])
    return A, B, k, F


def test_oracle_agreement_sample():
    rng = random.Random(20261016)
    for _ in range(120):
        A, B, k, F = _random_case(rng)
        fast, slow = is_robust(B, A, k, F), brute_force_robust(B, A, k, F)
        assert fast == slow, (B.to_json(), k, len(F))
        if fast.reason == NON_EXTENDABLE:
            assert verify_counterexample(B, A, fast, F)


@settings(deadline=None)
@given(st.integers(0, 2 ** 32))
def test_monotone_in_k(seed):
    rng = random.Random(seed)
    A, B, k, F = _random_case(rng)
    # below k elements robustness is only satisfiability, so nothing to inherit
    if B.size < k or not is_robust(B, A, k, F).ok:
        return
    for ell in range(k + 1):
        assert is_robust(B, A, ell, project_types(F, k, ell)).ok


@settings(deadline=None)
@given(st.integers(0, 2 ** 32))
def test_solution_restrictions_are_compatible(seed):
    rng = random.Random(seed)
    A, B, k, F = _random_case(rng)
    for h in itertools.islice(enumerate_homomorphisms(B, A), 20):
        for S in itertools.combinations(range(B.size), min(k, B.size)):
            assert is_compatible(B, A, {x: h.mapping[x] for x in S}, F)


def test_sentence_in_F_blocks_everything():
    # a 0-ary formula true in the instance and false in the template
    loop = PpFormula((), ("y",), (("E", ("y", "y")),))
    from antcsp.templates import graph
    B = graph(1, [(0, 0)])
    assert not is_compatible(B, K3, {}, [loop])
    assert is_compatible(TRI, K3, {}, [loop])


def test_small_instances_break_naive_monotonicity():
    # vacuous at k=3 on two elements, yet a real restriction at k=1
    from antcsp.core import RelationalStructure
    B = RelationalStructure(one_in_three().signature, 2, {"r": [(0, 0, 1)]})
    assert is_robust(B, one_in_three(), 3, []).ok
    assert not is_robust(B, one_in_three(), 1, project_types([], 3, 1)).ok
