"""Frozen tuples, (k,F)-reflection, implied constraints and quasivariety membership."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import (RelationalStructure, check_signatures, find_homomorphism, quotient)
from .formulas import EQ
from .robustness import Compatibility, compatible_assignments


@dataclass
class FrozenReport:
    relations: dict          # symbol -> sorted list of frozen nonhyperedges
    equalities: list         # frozen pairs (a, b) with a < b
    classes: list            # transitive closure of the equality pairs, as a partition
    size: int = 0

    def equal(self, a, b) -> bool:
        return a == b or (min(a, b), max(a, b)) in set(self.equalities)

    def is_empty(self) -> bool:
        return not self.equalities and not any(self.relations.values())

    def count(self) -> int:
        return len(self.equalities) + sum(len(v) for v in self.relations.values())

    def to_json(self):
        return {"relations": {r: [list(t) for t in ts] for r, ts in sorted(self.relations.items())},
                "equalities": [list(p) for p in self.equalities],
                "classes": [list(c) for c in self.classes]}


def _classes(n, pairs):
    parent = list(range(n))

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
    for x in range(n):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values())


def local_images(instance, template, k, F, max_size):
    """For every element set E with |E| <= max_size, the maps on E that extend
    to an F-compatible map on every superset of size min(k, |B|).

    Returns {E (sorted tuple): set of image tuples aligned with E}.
    """
    n = instance.size
    m = min(k, n)
    compat = Compatibility(instance, template, F)
    out: dict[tuple, set] = {}
    for K in itertools.combinations(range(n), m):
        seen: dict[tuple, set] = {}
        for nu in compatible_assignments(K, template.size, compat):
            for r in range(0, min(max_size, m) + 1):
                for E in itertools.combinations(K, r):
                    seen.setdefault(E, set()).add(tuple(nu[x] for x in E))
        for r in range(0, min(max_size, m) + 1):
            for E in itertools.combinations(K, r):
                got = seen.get(E, set())
                if E in out:
                    out[E] &= got
                else:
                    out[E] = set(got)
    return out


def frozen_tuples(instance: RelationalStructure, template: RelationalStructure, k: int, F) -> FrozenReport:
    """Nonhyperedges (and non-equal pairs) forced by the local F-compatible maps.

    A tuple on element set E is frozen when every map on E that extends to an
    F-compatible map on each min(k,|B|)-element superset of E lands in the
    template relation.
    """
    check_signatures(instance, template)
    sig = instance.signature
    if k < 0:
        raise ValueError("k must be non-negative")
    # only symbols (and equality) of arity at most k are tested
    need = max([ar for _, ar in sig if ar <= k] + [min(2, k)])
    n = instance.size
    images = local_images(instance, template, k, F, need)

    def maps_on(E):
        return [dict(zip(E, img)) for img in images.get(E, ())]

    cache = {}
    rels = {}
    for name, ar in sig:
        if ar > k:
            rels[name] = []
            continue
        rA = template.relation_set(name)
        rB = instance.relation_set(name)
        frozen = []
        for t in itertools.product(range(n), repeat=ar):
            if t in rB:
                continue
            E = tuple(sorted(set(t)))
            if E not in cache:
                cache[E] = maps_on(E)
            if all(tuple(mu[x] for x in t) in rA for mu in cache[E]):
                frozen.append(t)
        rels[name] = frozen
    eqs = []
    for a, b in itertools.combinations(range(n), 2) if k >= 2 else ():
        if all(mu[a] == mu[b] for mu in maps_on((a, b))):
            eqs.append((a, b))
    return FrozenReport(rels, eqs, _classes(n, eqs), n)


@dataclass
class ReflectionResult:
    structure: RelationalStructure
    quotient_map: list            # source element -> result element
    iterations: int
    enlarged: int = 0             # tuples added across all passes
    steps: list = field(default_factory=list)   # per-pass quotient maps

    def to_json(self):
        out = self.structure.to_json()
        out["quotient_map"] = list(self.quotient_map)
        out["iterations"] = self.iterations
        return out


def _apply(instance, report: FrozenReport):
    rels = {name: list(instance.relation(name)) + list(report.relations.get(name, ()))
            for name, _ in instance.signature}
    enlarged = instance.with_relations(rels)
    return quotient(enlarged, report.classes)


def one_step_reflection(instance, template, k: int, F) -> ReflectionResult:
    """Add every frozen tuple, then identify frozen-equal elements (least id represents)."""
    report = frozen_tuples(instance, template, k, F)
    struct, cmap = _apply(instance, report)
    return ReflectionResult(struct, list(cmap), 1, report.count(), [list(cmap)])


def full_reflection(instance, template, k: int, F, max_steps=None) -> ReflectionResult:
    """Repeat one-step reflection until nothing is frozen.

    ``iterations`` counts the passes that changed the structure, with a floor
    of one for inputs that are already free of frozen tuples.
    """
    current = instance
    total = list(range(instance.size))
    steps = []
    added = 0
    while max_steps is None or len(steps) < max_steps:
        report = frozen_tuples(current, template, k, F)
        if report.is_empty():
            break
        current, cmap = _apply(current, report)
        total = [cmap[x] for x in total]
        steps.append(list(cmap))
        added += report.count()
    return ReflectionResult(current, total, max(1, len(steps)), added, steps)


# implied constraints


@dataclass(frozen=True)
class ImpliedConstraint:
    symbol: str      # a relation symbol or "="
    tuple: tuple

    def to_json(self):
        return {"symbol": self.symbol, "tuple": list(self.tuple)}

    def __str__(self):
        if self.symbol == EQ:
            return f"{self.tuple[0]} = {self.tuple[1]}"
        return f"{self.symbol}{self.tuple}"


def _candidates(instance):
    n = instance.size
    for name, ar in instance.signature:
        rB = instance.relation_set(name)
        for t in itertools.product(range(n), repeat=ar):
            if t not in rB:
                yield name, t
    for a, b in itertools.combinations(range(n), 2):
        yield EQ, (a, b)


def _separated(template, h, name, t):
    img = tuple(h[x] for x in t)
    if name == EQ:
        return img[0] != img[1]
    return img not in template.relation_set(name)


def _separating_images(template, name, t):
    """Target tuples that would separate t, consistent with repeats inside t."""
    if name == EQ:
        pool = ((a, b) for a in range(template.size) for b in range(template.size) if a != b)
    else:
        rA = template.relation_set(name)
        pool = (a for a in itertools.product(range(template.size), repeat=len(t)) if a not in rA)
    for img in pool:
        seed = {}
        ok = True
        for x, a in zip(t, img):
            if seed.setdefault(x, a) != a:
                ok = False
                break
        if ok:
            yield seed


def implied_constraints(instance, template) -> list[ImpliedConstraint]:
    """Nonhyperedges and distinct pairs that no homomorphism separates."""
    check_signatures(instance, template)
    if find_homomorphism(instance, template) is None:
        return [ImpliedConstraint(s, t) for s, t in _candidates(instance)]
    known = []
    out = []
    for name, t in _candidates(instance):
        if any(_separated(template, h, name, t) for h in known):
            continue
        for seed in _separating_images(template, name, t):
            h = find_homomorphism(instance, template, seed)
            if h is not None:
                known.append(h.mapping)
                break
        else:
            out.append(ImpliedConstraint(name, t))
    return out


def brute_force_implied(instance, template) -> list[ImpliedConstraint]:
    """Same answer from the complete list of homomorphisms."""
    from .core import brute_force_homomorphisms

    homs = brute_force_homomorphisms(instance, template)
    return [ImpliedConstraint(s, t) for s, t in _candidates(instance)
            if not any(_separated(template, h, s, t) for h in homs)]


def in_quasivariety(instance, template) -> bool:
    return not implied_constraints(instance, template)


def in_universal_horn(instance, template) -> bool:
    return in_quasivariety(instance, template) and find_homomorphism(instance, template) is not None
