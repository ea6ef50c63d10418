import itertools

import pytest

from antcsp.core import count_homomorphisms, StructureError
from antcsp.polymorphisms import (OperationTable, bw_pair, check_identities, check_preservation,
                                  core_retract, endomorphisms, find_polymorphism, has_bw_pair,
                                  indicator_instance, is_core, no_identities, nu, projection, wnu)
from antcsp.templates import complete_graph, cycle, graph, linear_template, loop, one_in_three

K2, K3 = complete_graph(2), complete_graph(3)
Z2 = linear_template(2, 1)


def test_indicator_sizes():
    p = indicator_instance(K2, 2)
    assert p.size == 4 and len(p.relation("E")) == 4
    p = indicator_instance(K3, 2)
    assert p.size == 9 and len(p.relation("E")) == 36
    assert indicator_instance(K3, 1) == K3


@pytest.mark.parametrize("template", [K2, K3, graph(3, [(0, 0), (0, 1), (1, 2)])])
def test_binary_polymorphisms_counted_two_ways(template):
    m = template.size
    direct = sum(check_preservation(OperationTable(2, m, list(t)), template)
                 for t in itertools.product(range(m), repeat=m * m))
    assert count_homomorphisms(indicator_instance(template, 2), template) == direct


def test_k3_has_no_wnu():
    assert find_polymorphism(K3, wnu(3)) is None
    assert find_polymorphism(K3, wnu(3, quasi=True)) is None


def test_k2_majority():
    maj = find_polymorphism(K2, nu(3))["w"]
    assert maj.table == [0, 0, 0, 1, 0, 1, 1, 1]
    assert check_preservation(maj, K2)
    assert check_identities({"w": maj}, nu(3)) and check_identities({"w": maj}, wnu(3))


def test_z2_xor():
    xor = OperationTable(3, 2, [a ^ b ^ c for a, b, c in itertools.product(range(2), repeat=3)])
    assert check_preservation(xor, Z2)
    assert check_identities({"w": xor}, wnu(3))
    found = find_polymorphism(Z2, wnu(3))["w"]
    assert found.table == xor.table


def test_one_in_three_has_no_wnu():
    assert find_polymorphism(one_in_three(), wnu(3)) is None
    assert has_bw_pair(one_in_three()) is None


def test_projection_fails_symmetry():
    p = projection(3, 0, 2)
    assert check_preservation(p, K2)
    assert check_identities({"f": p}, no_identities(3))
    assert not check_identities({"w": p}, wnu(3))


def test_constant_on_loop_is_quasi_wnu():
    A = graph(2, [(0, 0), (0, 1)])
    const = OperationTable(3, 2, [0] * 8)
    assert check_preservation(const, A)
    assert check_identities({"w": const}, wnu(3, quasi=True))
    assert not check_identities({"w": const}, wnu(3))


def test_found_tables_are_sound():
    for template, spec in [(K2, nu(3)), (K2, wnu(4)), (Z2, wnu(3)), (cycle(4), wnu(3, quasi=True))]:
        got = find_polymorphism(template, spec)
        assert got is not None
        assert check_identities(got, spec)
        assert all(check_preservation(t, template) for t in got.values())


def test_k2_bw_pair():
    w3, w4 = has_bw_pair(K2)
    assert check_identities({"w3": w3, "w4": w4}, bw_pair())
    assert check_preservation(w3, K2) and check_preservation(w4, K2)


def test_z2_bw_pair_experiment():
    # recorded, not a theorem: the linked pair is absent on the 2-element affine template
    assert has_bw_pair(Z2) is None


def test_cores():
    assert len(endomorphisms(K3)) == 6 and is_core(K3)
    c4 = cycle(4)
    assert not is_core(c4)
    sub, kept, r = core_retract(c4, with_map=True)
    assert sub.size == 2 and len(sub.relation("E")) == 2
    assert all(r[a] == a for a in kept)
    assert is_core(loop()) and core_retract(loop()) == loop()


def test_identity_system_errors():
    bad = no_identities(2)
    bad.equations.append((("w", ("x", "y")), "x"))
    with pytest.raises(ValueError):
        bad.check()
    with pytest.raises(StructureError):
        OperationTable.from_json({"arity": 2, "domain": 2, "table": [0, 1]})
    t = projection(2, 1, 3)
    assert OperationTable.from_json(t.to_json()) == t
