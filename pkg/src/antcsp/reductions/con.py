"""From the template with named constants back to the bare core template.

Elements tagged with a constant are glued onto a copy of the template (its
diagram), so the constants are simulated by the copy's elements.
"""
from __future__ import annotations

import itertools

from ..core import RelationalStructure, check_signatures
from ..formulas import EQ, PpFormula, all_types, canonicalize, formula_sort_key
from ..robustness import fundamental_relations
from ..templates import split_constants, with_constants
from .output import OPEN, ReductionOutput

COPY = "copy"     # provenance tag of a template-copy element: (COPY, a)


class NotACore(ValueError):
    pass


def _require_core(template):
    from ..polymorphisms import is_core

    if not is_core(template):
        raise NotACore("template is not a core; compute core_retract first")


def diagram_atoms(template, names):
    """Atoms of every template hyperedge, written over the variable names[a]."""
    return tuple((s, tuple(names[a] for a in t)) for s, t in template.hyperedges())


def canonical_no(template, a, b) -> RelationalStructure:
    """The template copy with the elements a and b glued together.

    A core has no non-injective endomorphism, so this has no homomorphism to it.
    """
    keep = [x for x in range(template.size) if x != max(a, b)]
    idx = {x: i for i, x in enumerate(keep)}
    idx[max(a, b)] = idx[min(a, b)]
    rels = {s: [tuple(idx[x] for x in t) for t in template.relation(s)] for s, _ in template.signature}
    return RelationalStructure(template.signature, len(keep), rels)


def con_reduce(instance: RelationalStructure, template: RelationalStructure, k=None, F=None,
               reflect=True) -> ReductionOutput:
    """Reduce an instance over the constant-enriched signature to the bare template.

    Reflection at level k (default: the largest arity, at least 2) with F
    (default: the singleton constant relations) runs first.  If some element is
    forced to two different constants the output is the canonical NO
    structure, flagged by ``pre_map`` being None and empty provenance.
    """
    from ..reflection import one_step_reflection

    _require_core(template)
    acon = with_constants(template)
    check_signatures(instance, acon)
    base, consts = split_constants(instance.signature, template.size)
    if k is None:
        k = max(2, instance.signature.max_arity())
    if F is None:
        F = [f for f in fundamental_relations(acon.signature) if f.atoms[0][0] in consts]
    pre_map = list(range(instance.size))
    if reflect:
        r = one_step_reflection(instance, acon, k, F)
        instance, pre_map = r.structure, r.quotient_map
    n, m = instance.size, template.size
    parent = list(range(n + m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for sym, a in consts.items():
        for (b,) in instance.relation(sym):
            rb, rc = find(b), find(n + a)
            if rb != rc:
                parent[max(rb, rc)] = min(rb, rc)
    owner = {}
    for a in range(m):
        root = find(n + a)
        if root in owner:
            return ReductionOutput(canonical_no(template, owner[root], a), [], [], [])
        owner[root] = a
    roots = sorted({find(x) for x in range(n + m)})
    new = {r: i for i, r in enumerate(roots)}
    cmap = [new[find(x)] for x in range(n + m)]
    prov = [None] * len(roots)
    for x in range(n + m):
        e = cmap[x]
        if prov[e] is None:
            prov[e] = (OPEN, x) if x < n else (COPY, x - n)
    edges = list(instance.hyperedges())
    rels = {s: [] for s, _ in base}
    hprov = []
    for eid, (s, t) in enumerate(edges):
        if s in consts:
            continue
        tt = tuple(cmap[x] for x in t)
        rels[s].append(tt)
        hprov.append((s, tt, eid, 0))
    for c, (s, t) in enumerate(template.hyperedges()):
        tt = tuple(cmap[n + a] for a in t)
        rels[s].append(tt)
        hprov.append((s, tt, -1, c))
    struct = RelationalStructure(base, len(roots), rels)
    out = ReductionOutput(struct, prov, hprov, edges, pre_map=pre_map)
    out.copy_map = [cmap[n + a] for a in range(m)]
    return out


def build_G(F, template: RelationalStructure, k: int, constants_in_F=True) -> list[PpFormula]:
    """Compatibility formulas over the bare signature matching F over the constant one.

    For every p <= k with k-p <= |A|, every (p,F)-type and every (k-p)-set of
    template elements: the diagram of the template over fresh variables, the
    type with each constant atom x in {a} turned into x = (variable of a), and
    everything quantified except the p type variables and the chosen template
    variables.  The singleton constant relations are added to F unless
    ``constants_in_F`` is false.
    """
    acon = with_constants(template)
    F = list(F)
    _, consts = split_constants(acon.signature, template.size)
    if constants_in_F:
        present = {canonicalize(f) for f in F}
        for f in fundamental_relations(acon.signature):
            if f.atoms[0][0] in consts and canonicalize(f) not in present:
                F.append(f)
    m = template.size
    names = [f"a{a}" for a in range(m)]
    diag = diagram_atoms(template, names)
    out = {}
    for p in range(k + 1):
        if k - p > m:
            continue
        for sigma in all_types(F, p):
            phi = sigma.formula()
            atoms = []
            for s, args in phi.atoms:
                if s in consts:
                    atoms.append((EQ, (args[0], names[consts[s]])))
                else:
                    atoms.append((s, args))
            for chosen in itertools.combinations(range(m), k - p):
                free = phi.free + tuple(names[a] for a in chosen)
                exists = tuple(names[a] for a in range(m) if a not in chosen) + phi.exists
                delta = PpFormula(free, exists, diag + tuple(atoms))
                g = canonicalize(delta)
                out.setdefault(g, None)
    return sorted(out, key=formula_sort_key)
