"""F-compatibility and (k,F)-robust satisfiability, with a brute-force twin."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import RelationalStructure, check_signatures, enumerate_homomorphisms, find_homomorphism
from .formulas import formula_relation, formula_relation_within, holds_at, instantiate_Fk, type_of

YES = "Yes"
NO = "No"
UNSATISFIABLE = "Unsatisfiable"
NON_EXTENDABLE = "NonExtendable"


@dataclass(frozen=True)
class RobustVerdict:
    outcome: str
    reason: str | None = None
    subset: tuple | None = None
    assignment: dict | None = field(default=None, compare=True)
    level: int | None = None

    @property
    def ok(self) -> bool:
        return self.outcome == YES

    def __bool__(self):
        return self.ok

    def to_json(self):
        out = {"outcome": self.outcome}
        if self.reason:
            out["reason"] = self.reason
        if self.subset is not None:
            out["subset"] = list(self.subset)
            out["assignment"] = {str(k): v for k, v in sorted(self.assignment.items())}
        if self.level is not None:
            out["level"] = self.level
        return out


class Compatibility:
    """Precomputed F-compatibility test for one instance/template pair.

    A partial map nu is F-compatible iff, for every formula phi in F, every
    tuple of dom(nu) satisfying phi in the instance is sent to a tuple
    satisfying phi in the template.  Ranging over all such tuples is the same
    as ranging over the instantiations F_k at the domain tuple.
    """

    def __init__(self, instance: RelationalStructure, template: RelationalStructure, F, span=None):
        # span: only maps on at most this many elements will be tested
        self.F = list(F)
        self.sentences_ok = True
        self.by_support: dict[frozenset, list] = {}
        for i, phi in enumerate(self.F):
            rA = formula_relation(template, phi)
            if not phi.free:
                if formula_relation(instance, phi) and not rA:
                    self.sentences_ok = False
                continue
            rB = formula_relation(instance, phi) if span is None else formula_relation_within(instance, phi, span)
            for t in rB:
                self.by_support.setdefault(frozenset(t), []).append((t, rA))
        self._supports = sorted(self.by_support, key=len)

    def __call__(self, nu: dict) -> bool:
        if not self.sentences_ok:
            return False
        dom = frozenset(nu)
        by = self.by_support
        if len(dom) <= 6:
            for r in range(1, len(dom) + 1):
                for sub in itertools.combinations(sorted(dom), r):
                    for t, rA in by.get(frozenset(sub), ()):
                        if tuple(nu[x] for x in t) not in rA:
                            return False
            return True
        for sup in self._supports:
            if sup <= dom:
                for t, rA in by[sup]:
                    if tuple(nu[x] for x in t) not in rA:
                        return False
        return True

    def local(self, nu: dict, new) -> bool:
        """Compatibility checks for tuples that involve the element ``new``."""
        if not self.sentences_ok:
            return False
        others = sorted(x for x in nu if x != new)
        by = self.by_support
        for r in range(0, len(others) + 1):
            for sub in itertools.combinations(others, r):
                for t, rA in by.get(frozenset(sub + (new,)), ()):
                    if tuple(nu[x] for x in t) not in rA:
                        return False
        return True


def is_compatible(instance, template, nu: dict, F) -> bool:
    for b, a in nu.items():
        if not 0 <= b < instance.size:
            raise ValueError(f"element {b} outside instance universe")
        if not 0 <= a < template.size:
            raise ValueError(f"value {a} outside template universe")
    return Compatibility(instance, template, F)(dict(nu))


def compatible_assignments(subset, template_size, compat: Compatibility):
    """F-compatible maps on ``subset`` in lexicographic order (depth-first, pruned)."""
    subset = tuple(subset)
    n = len(subset)
    nu = {}

    def rec(i):
        if i == n:
            yield dict(nu)
            return
        b = subset[i]
        for a in range(template_size):
            nu[b] = a
            if compat.local(nu, b):
                yield from rec(i + 1)
            del nu[b]

    if not compat.sentences_ok:
        return
    yield from rec(0)


def is_robust(instance, template, k: int, F) -> RobustVerdict:
    """(k,F)-robust satisfiability via seeded search on every compatible map.

    Checks exactly-k subsets in lexicographic order; the first failure found is
    the lexicographically least counterexample.
    """
    check_signatures(instance, template)
    if k < 0:
        raise ValueError("k must be non-negative")
    first = find_homomorphism(instance, template)
    if first is None:
        return RobustVerdict(NO, UNSATISFIABLE, level=k)
    if instance.size < k:
        return RobustVerdict(YES, level=k)
    compat = Compatibility(instance, template, F, span=k)
    # by_value[x][a]: bitset of the known solutions sending x to a
    by_value = [[0] * template.size for _ in range(instance.size)]
    count = 0

    def remember(h):
        nonlocal count
        bit = 1 << count
        count += 1
        for x, a in enumerate(h):
            by_value[x][a] |= bit

    remember(first.mapping)
    everything = lambda: (1 << count) - 1
    for S in itertools.combinations(range(instance.size), k):
        for nu in compatible_assignments(S, template.size, compat):
            hit = everything()
            for x in S:
                hit &= by_value[x][nu[x]]
                if not hit:
                    break
            if hit:
                continue
            h = find_homomorphism(instance, template, nu)
            if h is None:
                return RobustVerdict(NO, NON_EXTENDABLE, S, nu, level=k)
            remember(h.mapping)
    return RobustVerdict(YES, level=k)


def is_robust_upto(instance, template, k: int, F, robust=is_robust) -> RobustVerdict:
    """(<=k,F)-robustness; reports the first failing level."""
    for ell in range(k + 1):
        v = robust(instance, template, ell, F)
        if not v.ok:
            return v
    return RobustVerdict(YES, level=k)


def brute_force_robust(instance, template, k: int, F) -> RobustVerdict:
    """Same contract as is_robust, computed from the full list of homomorphisms."""
    check_signatures(instance, template)
    if k < 0:
        raise ValueError("k must be non-negative")
    homs = [h.mapping for h in enumerate_homomorphisms(instance, template)]
    if not homs:
        return RobustVerdict(NO, UNSATISFIABLE, level=k)
    if instance.size < k:
        return RobustVerdict(YES, level=k)
    # compatibility straight from the definition: the type of S in the
    # instance must hold at its image
    Fk = instantiate_Fk(F, k)
    for S in itertools.combinations(range(instance.size), k):
        proj = {tuple(h[x] for x in S) for h in homs}
        tau = type_of(instance, S, F, Fk).members
        for img in itertools.product(range(template.size), repeat=k):
            if img in proj:
                continue
            if all(holds_at(template, g, img) for g in tau):
                return RobustVerdict(NO, NON_EXTENDABLE, S, dict(zip(S, img)), level=k)
    return RobustVerdict(YES, level=k)


def verify_counterexample(instance, template, verdict: RobustVerdict, F) -> bool:
    """A returned (S, nu) must be compatible and have no extension."""
    if verdict.ok or verdict.reason != NON_EXTENDABLE:
        return False
    nu = verdict.assignment
    return is_compatible(instance, template, nu, F) and \
        find_homomorphism(instance, template, nu) is None


def fundamental_relations(signature):
    """F consisting of the bare relation symbols r(x1,...,xn)."""
    from .formulas import PpFormula

    out = []
    for name, ar in signature:
        xs = tuple(f"x{i + 1}" for i in range(ar))
        out.append(PpFormula(xs, (), ((name, xs),)))
    return out
