"""Strategies: families of partial maps closed under restriction and extension.

A family with domains of size at most s is checked as an (s-1, s)-strategy:
every member is a partial homomorphism, every restriction of a member is a
member, and every member on fewer than s points extends to any further point.
"""
from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass

from . import budget as _budget
from .core import RelationalStructure, check_signatures, enumerate_homomorphisms
from .robustness import Compatibility, compatible_assignments

NONEMPTY = "Nonempty"
HOMOMORPHISM = "Homomorphism"
RESTRICTION = "Restriction"
EXTENSION = "Extension"


def as_member(nu: dict) -> tuple:
    """Canonical form of a partial map: sorted (element, value) pairs."""
    return tuple(sorted(nu.items()))


@dataclass(frozen=True)
class Strategy:
    family: frozenset     # members as sorted (element, value) tuples
    bound: int            # largest domain size s; strategy parameters (s-1, s)

    @property
    def params(self):
        return self.bound - 1, self.bound

    def __len__(self):
        return len(self.family)

    def __contains__(self, nu):
        return (as_member(nu) if isinstance(nu, dict) else tuple(nu)) in self.family

    def members(self, size=None):
        out = [m for m in self.family if size is None or len(m) == size]
        return sorted(out, key=lambda m: (len(m), m))

    def to_json(self):
        return {"bound": self.bound, "params": list(self.params),
                "family": [{str(x): a for x, a in m} for m in self.members()]}

    @classmethod
    def from_json(cls, obj):
        try:
            fam = frozenset(as_member({int(x): int(a) for x, a in m.items()}) for m in obj["family"])
            return cls(fam, int(obj["bound"]))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ValueError(f"strategy: {exc}") from None


@dataclass(frozen=True)
class StrategyCheck:
    ok: bool
    clause: str | None = None
    witness: tuple | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok

    def to_json(self):
        out = {"ok": self.ok}
        if not self.ok:
            out["clause"] = self.clause
            out["witness"] = {str(x): a for x, a in (self.witness or ())}
            if self.detail:
                out["detail"] = self.detail
        return out


def _tuples_by_support(instance):
    by = {}
    for name, t in instance.hyperedges():
        by.setdefault(frozenset(t), []).append((name, t))
    return by


def _is_partial_hom(member, by_support, template):
    nu = dict(member)
    dom = sorted(nu)
    for r in range(1, len(dom) + 1):
        for sub in itertools.combinations(dom, r):
            for name, t in by_support.get(frozenset(sub), ()):
                if tuple(nu[x] for x in t) not in template.relation_set(name):
                    return False
    return True


def _work(n, m, s):
    return sum(comb(n, r) * m ** r for r in range(min(s, n) + 1))


def candidate_family(instance: RelationalStructure, template: RelationalStructure, k: int, F, j: int) -> Strategy:
    """All maps on at most j points that extend to an F-compatible map on k points.

    With fewer than k elements there is no k-superset; as with robustness,
    only satisfiability counts then, so the family is the restrictions of
    the solutions.
    """
    check_signatures(instance, template)
    if not 0 <= j <= k:
        raise ValueError(f"need 0 <= j <= k, got j={j}, k={k}")
    n = instance.size
    size = min(k, n)
    b = _budget.current()
    b.check_size(comb(n, size) * template.size ** size, "candidate family")
    family = set()

    def add(items):
        for r in range(min(j, len(items)) + 1):
            family.update(itertools.combinations(items, r))

    if n < k:
        for h in enumerate_homomorphisms(instance, template):
            b.charge(1)
            add(list(enumerate(h.mapping)))
        return Strategy(frozenset(family), j)
    compat = Compatibility(instance, template, F)
    for S in itertools.combinations(range(n), k):
        for nu in compatible_assignments(S, template.size, compat):
            b.charge(1)
            add(sorted(nu.items()))
    return Strategy(frozenset(family), j)


def check_strategy(candidate: Strategy, instance: RelationalStructure, template: RelationalStructure) -> StrategyCheck:
    """Verify the strategy clauses exhaustively; the first violation is reported."""
    check_signatures(instance, template)
    P = candidate.family
    s = candidate.bound
    if () not in P:
        return StrategyCheck(False, NONEMPTY, (), "the empty map is missing")
    order = candidate.members()
    by = _tuples_by_support(instance)
    for m in order:
        if len(m) > s:
            return StrategyCheck(False, RESTRICTION, m, f"domain larger than {s}")
        if any(not 0 <= x < instance.size or not 0 <= a < template.size for x, a in m):
            return StrategyCheck(False, HOMOMORPHISM, m, "outside the universes")
        if not _is_partial_hom(m, by, template):
            return StrategyCheck(False, HOMOMORPHISM, m, "a tuple is not preserved")
    for m in order:
        for i in range(len(m)):
            sub = m[:i] + m[i + 1:]
            if sub not in P:
                return StrategyCheck(False, RESTRICTION, m, f"restriction {dict(sub)} missing")
    for m in order:
        if len(m) >= s:
            continue
        dom = {x for x, _ in m}
        for x in range(instance.size):
            if x in dom:
                continue
            if not any(tuple(sorted(m + ((x, a),))) in P for a in range(template.size)):
                return StrategyCheck(False, EXTENSION, m, f"no extension to element {x}")
    return StrategyCheck(True)


def partial_homomorphisms(instance, template, s: int) -> set:
    """Every partial homomorphism on at most s points."""
    n, m = instance.size, template.size
    b = _budget.current()
    b.check_size(_work(n, m, s), "partial maps")
    by = _tuples_by_support(instance)
    out = set()
    for r in range(min(s, n) + 1):
        for D in itertools.combinations(range(n), r):
            for vals in itertools.product(range(m), repeat=r):
                b.charge(1)
                mem = tuple(zip(D, vals))
                if _is_partial_hom(mem, by, template):
                    out.add(mem)
    return out


def establish_consistency(instance: RelationalStructure, template: RelationalStructure, j: int):
    """Greatest (j, j+1)-strategy inside the partial homomorphisms, or None.

    Prunes in rounds: first members with a missing restriction, then members
    on at most j points lacking an extension, until nothing changes.
    """
    check_signatures(instance, template)
    if j < 1:
        raise ValueError("j must be at least 1")
    s = j + 1
    n, m = instance.size, template.size
    P = partial_homomorphisms(instance, template, s)
    b = _budget.current()
    changed = True
    while changed and () in P:
        changed = False
        drop = set()
        for mem in sorted(P, key=lambda t: (len(t), t)):
            if any(mem[:i] + mem[i + 1:] not in P for i in range(len(mem))):
                drop.add(mem)
        if drop:
            P -= drop
            changed = True
        drop = set()
        for mem in sorted(P, key=lambda t: (len(t), t)):
            if len(mem) >= s:
                continue
            b.charge(1)
            dom = {x for x, _ in mem}
            for x in range(n):
                if x not in dom and not any(tuple(sorted(mem + ((x, a),))) in P for a in range(m)):
                    drop.add(mem)
                    break
        if drop:
            P -= drop
            changed = True
    if () not in P:
        return None
    return Strategy(frozenset(P), s)


ACCEPT = "Accept"
REJECT = "Reject"


def ant_separator(instance: RelationalStructure, template: RelationalStructure, k: int, F, j: int):
    """Accept iff the maps on at most j+1 points extending to F-compatible maps
    on k points form a (j, j+1)-strategy.  Returns (verdict, check)."""
    if not 0 <= j < k:
        raise ValueError(f"need 0 <= j < k, got j={j}, k={k}")
    chk = check_strategy(candidate_family(instance, template, k, F, j + 1), instance, template)
    return (ACCEPT if chk.ok else REJECT), chk
