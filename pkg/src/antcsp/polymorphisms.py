"""Polymorphisms through the indicator structure, identity systems and cores.

An n-ary polymorphism of A is a homomorphism from the power A^n to A.  Height-1
identities (both sides a single operation applied to variables, or a bare
variable) are compiled into that search: equal sides become glued indicator
elements and a bare variable side becomes a fixed value.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import budget as _budget
from .core import (RelationalStructure, StructureError, enumerate_homomorphisms, find_homomorphism,
                   quotient)


def encode(t, m):
    """Row-major index of the tuple t over {0..m-1}."""
    i = 0
    for a in t:
        i = i * m + a
    return i


def decode(i, m, n):
    out = []
    for _ in range(n):
        i, a = divmod(i, m)
        out.append(a)
    return tuple(reversed(out))


def indicator_instance(template: RelationalStructure, n: int) -> RelationalStructure:
    """The power template^n; element i stands for the n-tuple decode(i)."""
    m = template.size
    size = m ** n
    work = size + sum(len(template.relation(s)) ** n for s, _ in template.signature)
    _budget.current().check_size(work, "indicator instance")
    rels = {}
    for name, ar in template.signature:
        rows = template.relation(name)
        out = []
        for pick in itertools.product(rows, repeat=n):
            # pick[i] is the row used in coordinate i; column j is the j-th element
            out.append(tuple(encode(tuple(p[j] for p in pick), m) for j in range(ar)))
        rels[name] = out
    labels = ["".join(map(str, decode(i, m, n))) for i in range(size)]
    return RelationalStructure(template.signature, size, rels, labels)


@dataclass
class OperationTable:
    arity: int
    domain: int
    table: list          # row-major over domain^arity

    def __call__(self, *args):
        return self.table[encode(args, self.domain)]

    def to_json(self):
        return {"arity": self.arity, "domain": self.domain, "table": list(self.table)}

    @classmethod
    def from_json(cls, obj):
        try:
            n, m, tab = int(obj["arity"]), int(obj["domain"]), [int(v) for v in obj["table"]]
        except (KeyError, TypeError, ValueError) as e:
            raise StructureError(f"operation table: {e}") from None
        if len(tab) != m ** n:
            raise StructureError(f"operation table: {len(tab)} entries, expected {m ** n}")
        if any(not 0 <= v < m for v in tab):
            raise StructureError("operation table: value outside the domain")
        return cls(n, m, tab)


# identity systems: a side is a variable name or (op, (var, ...))


@dataclass
class IdentitySystem:
    arities: dict                           # operation symbol -> arity
    equations: list = field(default_factory=list)   # (lhs, rhs)
    name: str = ""

    def variables(self):
        vs = set()
        for side in (s for eq in self.equations for s in eq):
            if isinstance(side, str):
                vs.add(side)
            else:
                vs.update(side[1])
        return sorted(vs)

    def check(self):
        for lhs, rhs in self.equations:
            for side in (lhs, rhs):
                if isinstance(side, str):
                    continue
                op, args = side
                if op not in self.arities:
                    raise ValueError(f"unknown operation {op!r}")
                if len(args) != self.arities[op]:
                    raise ValueError(f"{op} takes {self.arities[op]} arguments, got {len(args)}")

    def to_json(self):
        def side(s):
            return s if isinstance(s, str) else {"op": s[0], "args": list(s[1])}
        return {"name": self.name, "arities": dict(self.arities),
                "equations": [[side(a), side(b)] for a, b in self.equations]}


def _near(n, pos, y="y", x="x"):
    return tuple(y if i == pos else x for i in range(n))


def _idempotent(op, n):
    return [((op, ("x",) * n), "x")]


def wnu(n, quasi=False, op="w") -> IdentitySystem:
    """w(y,x,..,x) = w(x,y,..,x) = ... = w(x,..,x,y), idempotent unless quasi."""
    eqs = [((op, _near(n, 0)), (op, _near(n, i))) for i in range(1, n)]
    if quasi:
        name = f"quasi-WNU({n})"
    else:
        eqs += _idempotent(op, n)
        name = f"WNU({n})"
    return IdentitySystem({op: n}, eqs, name)


def nu(n, quasi=False, op="w") -> IdentitySystem:
    """Every near-unanimous row gives x (quasi: gives w(x,..,x))."""
    target = (op, ("x",) * n) if quasi else "x"
    eqs = [((op, _near(n, i)), target) for i in range(n)]
    return IdentitySystem({op: n}, eqs, f"quasi-NU({n})" if quasi else f"NU({n})")


def bw_pair(quasi=False) -> IdentitySystem:
    """3-ary and 4-ary WNUs linked by w3(y,x,x) = w4(y,x,x,x)."""
    a = wnu(3, quasi, "w3")
    b = wnu(4, quasi, "w4")
    link = (("w3", _near(3, 0)), ("w4", _near(4, 0)))
    return IdentitySystem({"w3": 3, "w4": 4}, a.equations + b.equations + [link],
                          "quasi-BW pair" if quasi else "BW pair")


def no_identities(n, op="f") -> IdentitySystem:
    return IdentitySystem({op: n}, [], f"any({n})")


PRESETS = {"wnu": wnu, "nu": nu}


class _Glue:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _compile(template, spec: IdentitySystem):
    """Disjoint union of indicator instances, glued and seeded by the identities.

    Returns (structure, class map, offsets) or None when the identities force
    two different constants on one element.
    """
    spec.check()
    m = template.size
    ops = sorted(spec.arities)
    offsets = {}
    total = 0
    parts = []
    for op in ops:
        offsets[op] = total
        part = indicator_instance(template, spec.arities[op])
        parts.append(part)
        total += part.size
    rels = {name: [] for name, _ in template.signature}
    for op, part in zip(ops, parts):
        off = offsets[op]
        for name, _ in template.signature:
            rels[name].extend(tuple(x + off for x in t) for t in part.relation(name))
    glue = _Glue(total)
    fixed = []
    vs = spec.variables()
    for vals in itertools.product(range(m), repeat=len(vs)):
        env = dict(zip(vs, vals))

        def where(side):
            if isinstance(side, str):
                return ("const", env[side])
            op, args = side
            return ("elem", offsets[op] + encode(tuple(env[v] for v in args), m))

        lhs, rhs = zip(*[(where(a), where(b)) for a, b in spec.equations]) if spec.equations else ((), ())
        for (ka, a), (kb, b) in zip(lhs, rhs):
            if ka == "elem" and kb == "elem":
                glue.union(a, b)
            elif ka == "elem":
                fixed.append((a, b))
            elif kb == "elem":
                fixed.append((b, a))
            elif a != b:
                return None
    classes = {}
    for x in range(total):
        classes.setdefault(glue.find(x), []).append(x)
    struct = RelationalStructure(template.signature, total, rels)
    q, cmap = quotient(struct, list(classes.values()))
    seed = {}
    for e, a in fixed:
        c = cmap[e]
        if seed.setdefault(c, a) != a:
            return None
    return q, cmap, offsets, seed


def find_polymorphism(template: RelationalStructure, spec: IdentitySystem):
    """Lexicographically least tables satisfying the identities, or None.

    Returns {operation symbol: OperationTable}.
    """
    compiled = _compile(template, spec)
    if compiled is None:
        return None
    q, cmap, offsets, seed = compiled
    h = find_homomorphism(q, template, seed)
    if h is None:
        return None
    m = template.size
    out = {}
    for op, off in offsets.items():
        n = spec.arities[op]
        out[op] = OperationTable(n, m, [h[cmap[off + i]] for i in range(m ** n)])
    return out


def check_identities(tables: dict, spec: IdentitySystem) -> bool:
    spec.check()
    m = next(iter(tables.values())).domain if tables else 0
    vs = spec.variables()
    for vals in itertools.product(range(m), repeat=len(vs)):
        env = dict(zip(vs, vals))

        def ev(side):
            if isinstance(side, str):
                return env[side]
            op, args = side
            return tables[op](*(env[v] for v in args))

        for a, b in spec.equations:
            if ev(a) != ev(b):
                return False
    return True


def check_preservation(table: OperationTable, template: RelationalStructure) -> bool:
    """Applying the operation row-wise to any choice of hyperedges lands in the relation."""
    if table.domain != template.size:
        return False
    for name, ar in template.signature:
        rel = template.relation_set(name)
        for rows in itertools.product(template.relation(name), repeat=table.arity):
            if tuple(table(*(r[j] for r in rows)) for j in range(ar)) not in rel:
                return False
    return True


# endomorphisms and cores


def endomorphisms(template: RelationalStructure) -> list:
    _budget.current().check_size(template.size ** template.size, "endomorphisms")
    return [h.mapping for h in enumerate_homomorphisms(template, template)]


def is_core(template: RelationalStructure) -> bool:
    """No endomorphism misses an element (equivalently all are bijective)."""
    m = template.size
    full = (1 << m) - 1
    for a in range(m):
        if find_homomorphism(template, template, domains=[full & ~(1 << a)] * m) is not None:
            return False
    return True


def core_retract(template: RelationalStructure, with_map=False):
    """Induced substructure on the lexicographically least smallest endomorphism image.

    With ``with_map`` also returns (kept elements, retraction fixing them).
    """
    m = template.size
    for s in range(1, m + 1):
        for S in itertools.combinations(range(m), s):
            mask = sum(1 << a for a in S)
            h = find_homomorphism(template, template, domains=[mask] * m)
            if h is None:
                continue
            # h permutes S (minimality); a power of it fixes S pointwise
            r = list(h.mapping)
            while any(r[a] != a for a in S):
                r = [h.mapping[x] for x in r]
            sub, kept = template.induced(S)
            return (sub, kept, r) if with_map else sub
    raise AssertionError("identity is always an endomorphism")


def has_bw_pair(template: RelationalStructure, quasi=False):
    """(w3, w4) tables linked by w3(y,x,x) = w4(y,x,x,x), or None."""
    got = find_polymorphism(template, bw_pair(quasi))
    if got is None:
        return None
    return got["w3"], got["w4"]


def projection(n, i, m) -> OperationTable:
    return OperationTable(n, m, [decode(j, m, n)[i] for j in range(m ** n)])
