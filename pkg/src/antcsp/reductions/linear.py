"""Linear equations over Z_m: variable tripling and the regroupings back to width 3."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .. import budget as _budget
from ..core import RelationalStructure, StructureError
from ..templates import linear_template


class LinearError(ValueError):
    pass


def _prime_factors(m):
    out, d = set(), 2
    while d * d <= m:
        while m % d == 0:
            out.add(d)
            m //= d
        d += 1
    if m > 1:
        out.add(m)
    return out


@dataclass
class LinearSystem:
    """Equations sum(coeff * var) = rhs over Z_m with coefficients +1/-1 and rhs in {0, g}."""

    modulus: int
    g: int
    num_vars: int
    equations: list = field(default_factory=list)    # (((var, coeff), ...), rhs)

    def __post_init__(self):
        m = self.modulus
        if m < 2:
            raise LinearError("modulus must be at least 2")
        if not 0 < self.g < m:
            raise LinearError(f"g={self.g} must be a nonzero element of Z_{m}")
        order = m // math.gcd(m, self.g)
        if order not in _prime_factors(m):
            raise LinearError(f"g={self.g} has order {order} in Z_{m}, not a prime")
        eqs = []
        for i, (terms, rhs) in enumerate(self.equations):
            terms = tuple((int(v), int(c)) for v, c in terms)
            for v, c in terms:
                if c not in (1, -1):
                    raise LinearError(f"equation {i}: coefficient {c} is not +1 or -1")
                if not 0 <= v < self.num_vars:
                    raise LinearError(f"equation {i}: variable {v} out of range")
            if rhs % m not in (0, self.g):
                raise LinearError(f"equation {i}: right-hand side {rhs} not in {{0, {self.g}}}")
            eqs.append((terms, rhs % m))
        self.equations = eqs

    @property
    def prime(self):
        """Order of g, the field size used for dimensions."""
        return self.modulus // math.gcd(self.modulus, self.g)

    def width(self):
        return max((len(t) for t, _ in self.equations), default=0)

    def satisfied_by(self, values) -> bool:
        m = self.modulus
        return all(sum(c * values[v] for v, c in t) % m == h for t, h in self.equations)

    def to_json(self):
        return {"modulus": self.modulus, "g": self.g, "vars": self.num_vars,
                "eqs": [{"terms": [[v, c] for v, c in t], "rhs": h} for t, h in self.equations]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            eqs = [(tuple(tuple(x) for x in e["terms"]), e["rhs"]) for e in obj.get("eqs", [])]
            return cls(int(obj["modulus"]), int(obj["g"]), int(obj["vars"]), eqs)
        except (KeyError, TypeError) as e:
            raise LinearError(f"bad linear system JSON: {e}") from None

    def to_structure(self) -> RelationalStructure:
        """Width-3 equations with at most one negative term as r_h / s_h hyperedges."""
        rels = {"r_0": [], "r_g": [], "s_0": [], "s_g": []}
        for i, (terms, h) in enumerate(self.equations):
            if len(terms) != 3:
                raise LinearError(f"equation {i} has width {len(terms)}, need 3")
            neg = [v for v, c in terms if c < 0]
            pos = [v for v, c in terms if c > 0]
            if len(neg) >= 2:
                if h != 0:
                    raise LinearError(f"equation {i}: two negative terms with nonzero right-hand side")
                neg, pos = pos, neg
            tag = "g" if h else "0"
            if neg:
                rels[f"r_{tag}"].append((pos[0], pos[1], neg[0]))
            else:
                rels[f"s_{tag}"].append(tuple(pos))
        return RelationalStructure(linear_template(self.modulus, self.g).signature, self.num_vars, rels)


def lower(var, part):
    """Tripled copy of a variable; part 0, 1, 2 for left, middle, right."""
    return 3 * var + part


def triple_variables(sys: LinearSystem) -> LinearSystem:
    """Replace every variable x by x_L + x_M + x_R."""
    eqs = []
    for terms, h in sys.equations:
        eqs.append((tuple((lower(v, p), c) for v, c in terms for p in range(3)), h))
    return LinearSystem(sys.modulus, sys.g, 3 * sys.num_vars, eqs)


def regroup_to_width4(sys: LinearSystem) -> LinearSystem:
    """Each tripled equation becomes three width-4 equations x_P + y_P +- z_P - u_P = 0
    (P = L, M, R) and u_L + u_M + u_R = h, with fresh u variables."""
    n = sys.num_vars
    eqs = []
    for i, (terms, h) in enumerate(sys.equations):
        if len(terms) != 9:
            raise LinearError(f"equation {i} has width {len(terms)}, need 9")
        parts = [[], [], []]
        for v, c in terms:
            parts[v % 3].append((v, c))
        if any(len(p) != 3 for p in parts):
            raise LinearError(f"equation {i} is not a tripled equation")
        us = []
        for p in parts:
            u = n
            n += 1
            us.append(u)
            eqs.append((tuple(p) + ((u, -1),), 0))
        eqs.append((tuple((u, 1) for u in us), h))
    return LinearSystem(sys.modulus, sys.g, n, eqs)


def regroup_to_width3(sys: LinearSystem) -> LinearSystem:
    """Split a + b + s*c - u = 0 into a + b - v = 0 and v + s*c - u = 0 (fresh v).

    Width-3 equations pass through.  Outputs have at most one negative term
    per equation unless the right-hand side forbids flipping.
    """
    n = sys.num_vars
    eqs = []
    for i, (terms, h) in enumerate(sys.equations):
        if len(terms) == 3:
            eqs.append((terms, h))
            continue
        if len(terms) != 4 or h != 0:
            raise LinearError(f"equation {i}: expected width 4 with right-hand side 0")
        (a, ca), (b, cb), (c, cc), (u, cu) = terms
        v = n
        n += 1
        eqs.append((((a, ca), (b, cb), (v, -1)), 0))
        rest = ((v, 1), (c, cc), (u, cu))
        if sum(1 for _, k in rest if k < 0) > 1:
            rest = tuple((x, -k) for x, k in rest)
        eqs.append((rest, 0))
    return LinearSystem(sys.modulus, sys.g, n, eqs)


def linear_chain(sys: LinearSystem) -> list[LinearSystem]:
    """[source, tripled, width 4, width 3]"""
    t = triple_variables(sys)
    w4 = regroup_to_width4(t)
    return [sys, t, w4, regroup_to_width3(w4)]


# solution spaces


def count_solutions(sys: LinearSystem) -> int:
    """Depth-first enumeration of all solutions; a variable that is the last
    unknown of some equation is forced rather than branched on."""
    m = sys.modulus
    n = sys.num_vars
    by_var = [[] for _ in range(n)]
    for i, (terms, _) in enumerate(sys.equations):
        for v, _ in terms:
            by_var[v].append(i)
    vals = [None] * n
    b = _budget.current()

    def forced(e):
        terms, h = sys.equations[e]
        free = [(v, c) for v, c in terms if vals[v] is None]
        s = sum(c * vals[v] for v, c in terms if vals[v] is not None)
        return free, s, h

    def assign(v, a, trail):
        vals[v] = a
        trail.append(v)
        stack = [v]
        while stack:
            x = stack.pop()
            for e in by_var[x]:
                free, s, h = forced(e)
                if not free:
                    if (s - h) % m:
                        return False
                    continue
                # one unknown (possibly repeated): coefficient sum must be a unit
                if len({w for w, _ in free}) == 1:
                    w = free[0][0]
                    c = sum(k for _, k in free) % m
                    if math.gcd(c, m) != 1:
                        continue
                    val = ((h - s) * pow(c, -1, m)) % m
                    vals[w] = val
                    trail.append(w)
                    stack.append(w)
        return True

    def rec(start):
        b.charge(1)
        v = start
        while v < n and vals[v] is not None:
            v += 1
        if v == n:
            return 1 if sys.satisfied_by(vals) else 0
        total = 0
        for a in range(m):
            trail = []
            if assign(v, a, trail):
                total += rec(v + 1)
            for x in trail:
                vals[x] = None
        return total

    # a constant-false equation with no variables
    for terms, h in sys.equations:
        if not terms and h % m:
            return 0
    return rec(0)


def linear_solution_space(sys: LinearSystem):
    """(satisfiable, dimension over GF(p) or None, number of solutions)."""
    count = count_solutions(sys)
    dim = None
    p = sys.prime
    if count and p == sys.modulus:
        d = round(math.log(count, p))
        if p ** d == count:
            dim = d
    return count > 0, dim, count


def rank_dimension(sys: LinearSystem):
    """Dimension of the solution set by Gaussian elimination over prime Z_p, or
    None when inconsistent.  An independent route to the enumeration above."""
    p = sys.modulus
    if _prime_factors(p) != {p}:
        raise LinearError("elimination needs a prime modulus")
    n = sys.num_vars
    rows = []
    for terms, h in sys.equations:
        r = [0] * (n + 1)
        for v, c in terms:
            r[v] = (r[v] + c) % p
        r[n] = h % p
        rows.append(r)
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
    if any(all(x == 0 for x in r[:n]) and r[n] for r in rows):
        return None
    return n - rank


def load_linear(path) -> LinearSystem:
    try:
        with open(path) as fh:
            return LinearSystem.from_json(json.load(fh))
    except json.JSONDecodeError as e:
        raise StructureError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
