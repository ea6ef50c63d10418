"""The standard pp-reduction: replace each hyperedge by its definition."""
from __future__ import annotations

import itertools

from ..core import RelationalStructure, Signature, quotient
from ..formulas import EQ, FormulaError, PpDefinitionSet, PpFormula
from ..templates import one_in_three_signed, sat_signature, sat_symbol, signed_symbol
from .output import EXISTENTIAL, OPEN, ReductionOutput


def pp_reduce(instance: RelationalStructure, defs: PpDefinitionSet, target: Signature | None = None) -> ReductionOutput:
    """Each hyperedge r(b1..bn) becomes the atoms of rho_r with fresh elements
    for its quantified variables.  Source elements keep their ids."""
    target = target or defs.target
    if target is None:
        raise FormulaError("target signature required")
    edges = list(instance.hyperedges())
    for s, _ in edges:
        defs[s]  # raises on a missing definition
    prov = [(OPEN, e) for e in range(instance.size)]
    out_edges = []
    hprov = []
    merges = []
    for eid, (s, t) in enumerate(edges):
        rho = defs[s]
        env = dict(zip(rho.free, t))
        for pos, v in enumerate(rho.exists):
            env[v] = len(prov)
            prov.append((EXISTENTIAL, eid, pos))
        for c, (sym, args) in enumerate(rho.atoms):
            tup = tuple(env[v] for v in args)
            if sym == EQ:
                merges.append(tup)
                continue
            out_edges.append((sym, tup))
            hprov.append((sym, tup, eid, c))
    rels = {}
    for sym, tup in out_edges:
        rels.setdefault(sym, []).append(tup)
    struct = RelationalStructure(target, len(prov), rels)
    if merges:
        struct, cmap = _merge(struct, merges)
        hprov = [(s, tuple(cmap[x] for x in t), e, c) for s, t, e, c in hprov]
        merged = {}
        for old, new in enumerate(cmap):
            merged.setdefault(new, prov[old])
        prov = [merged[i] for i in range(struct.size)]
    return ReductionOutput(struct, prov, hprov, edges)


def _merge(struct, pairs):
    parent = list(range(struct.size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for x in range(struct.size):
        groups.setdefault(find(x), []).append(x)
    return quotient(struct, list(groups.values()))


def clause_to_one_in_three(signs) -> PpFormula:
    """A 3-clause with the given negation pattern as a conjunction of three signed 1-in-3 atoms."""
    s1, s2, s3 = signs
    return PpFormula(("x1", "x2", "x3"), ("y1", "y2", "y3", "y4"), (
        (signed_symbol((1 ^ s1, 0, 0)), ("x1", "y1", "y2")),
        (signed_symbol((0, s2, 0)), ("y2", "x2", "y3")),
        (signed_symbol((0, 0, 1 ^ s3)), ("y3", "y4", "x3")),
    ))


def sat3_to_one_in_three() -> tuple[PpDefinitionSet, RelationalStructure]:
    """Definitions of every 3SAT clause relation over signed 1-in-3, and that template."""
    target = one_in_three_signed()
    defs = {sat_symbol(s): clause_to_one_in_three(s) for s in itertools.product((0, 1), repeat=3)}
    return PpDefinitionSet(defs, sat_signature(3), target.signature), target
