"""Exact (k,F)-robustness for clause-chain outputs, F empty or the clause relations.

The generic checker walks every k-subset of the instance, which is hopeless
once a source clause has been amplified into tens of thousands of chains.
This one uses the shape of a chain instead:

* Given values for the open variables, a chain with some links fixed is
  satisfiable iff each range of segments between a right-pointing and the
  next left-pointing arrow holds a true open literal (link value 1 points
  right, 0 left; the chain start points right, the end left).  So a partial
  assignment extends iff some open assignment satisfies every chain with no
  fixed link plus one clause per arrow range of the chains with fixed links.
* Which segment ranges arise depends only on the positions and values of the
  fixed links, not on the chain.  A pattern whose ranges each contain a range
  of another pattern of the same size yields weaker constraints in every
  chain, so only undominated patterns need trying.
* F-compatibility (for the clause relations) only forbids a single-segment
  range whose open variables are all assigned and all false.  That is visible
  from the range mask alone, so patterns are tabulated once for all chains.

Open assignments are bitsets over all 2^V points, so V is kept small.
"""
from __future__ import annotations

import itertools
from array import array
from functools import lru_cache

from ..robustness import NO, NON_EXTENDABLE, UNSATISFIABLE, YES, RobustVerdict, fundamental_relations
from .sat import arrow_ranges, bulk, chain_families

MAX_OPENS = 18


def _patterns(L, size):
    out = []
    for links in itertools.combinations(range(L), size):
        for vals in itertools.product((0, 1), repeat=size):
            out.append(tuple(zip(links, vals)))
    return out


@lru_cache(maxsize=None)
def _ranges(s, pattern):
    return tuple(arrow_ranges(s, dict(pattern)))


def _dominates(r1, r2):
    """Ranges r1 force at least what r2 forces (each range of r2 contains one of r1)."""
    return all(any(a1 >= a2 and b1 <= b2 for a1, b1 in r1) for a2, b2 in r2)


@lru_cache(maxsize=None)
def undominated(s, size, bad=frozenset()):
    """Maximal patterns of ``size`` fixed links avoiding single-segment ranges in ``bad``."""
    cand = []
    seen = set()
    for p in _patterns(s - 1, size):
        r = _ranges(s, p)
        if any(b == a + 1 and a in bad for a, b in r):
            continue
        if r in seen:
            continue
        seen.add(r)
        cand.append((p, r))
    keep = []
    for p, r in cand:
        if not any(r2 != r and _dominates(r2, r) for _, r2 in cand):
            keep.append(p)
    return tuple(keep)


@lru_cache(maxsize=None)
def tolerant(s, size):
    """Patterns undominated for some set of forbidden single segments.

    Forbidding more segments only removes competitors, so it is enough to test
    each pattern against the largest forbidden set it still admits.
    """
    out = []
    for p in _patterns(s - 1, size):
        own = {a for a, b in _ranges(s, p) if b == a + 1}
        if p in undominated(s, size, frozenset(range(s)) - own):
            out.append(p)
    return tuple(out)


class ChainRobustness:
    def __init__(self, out, k: int, F=()):
        with bulk():
            self._setup(out, k, F)

    def _setup(self, out, k, F):
        self.out = out
        self.k = k
        F = list(F)
        if not F:
            self.fundamental = False
        elif sorted(map(str, F)) == sorted(map(str, fundamental_relations(out.structure.signature))):
            self.fundamental = True
        else:
            raise ValueError("chain robustness handles F empty or the fundamental clause relations only")
        self.fams = chain_families(out)
        self.opens = out.opens()
        V = self.V = len(self.opens)
        if V > MAX_OPENS:
            raise ValueError(f"{V} open variables; the exact chain check handles at most {MAX_OPENS}")
        self.bit = {e: i for i, e in enumerate(self.opens)}
        seglens = {len(f.segments) for f in self.fams}
        if len(seglens) > 1:
            raise ValueError("chains of different lengths")
        self.s = seglens.pop() if seglens else 0
        npts = 1 << V
        self.FULL = (1 << npts) - 1
        self.T = []
        for i in range(V):
            block = ((1 << (1 << i)) - 1) << (1 << i)
            self.T.append(block * (self.FULL // ((1 << (1 << (i + 1))) - 1)))
        self._sat = {}
        # per family, per segment: literal mask pos | neg << V
        self.seg = []
        for f in self.fams:
            row = []
            for seg in f.segments:
                m = 0
                for v, neg in seg:
                    m |= 1 << (self.bit[v] + (V if neg else 0))
                row.append(m)
            self.seg.append(row)
        A0 = self.FULL
        for row in self.seg:
            whole = 0
            for m in row:
                whole |= m
            A0 &= self.sat(whole)
        self.A0 = A0

    # bitsets

    def sat(self, clause):
        r = self._sat.get(clause)
        if r is None:
            V = self.V
            r = 0
            pos, neg = clause & ((1 << V) - 1), clause >> V
            for i in range(V):
                if pos >> i & 1:
                    r |= self.T[i]
                if neg >> i & 1:
                    r |= self.FULL ^ self.T[i]
            self._sat[clause] = r
        return r

    def cube(self, nu_bits):
        c = self.FULL
        for i, v in nu_bits.items():
            c &= self.T[i] if v else self.FULL ^ self.T[i]
        return c

    def _range_mask(self, f, a, b):
        m = 0
        for x in self.seg[f][a:b]:
            m |= x
        return m

    def _key(self, f, p):
        return tuple(self._range_mask(f, a, b) for a, b in _ranges(self.s, p))

    # atoms, tabulated once over all families

    def _table(self, size):
        cache = getattr(self, "_gen", None)
        if cache is None:
            cache = self._gen = {}
        if size in cache:
            return cache[size]
        if self.fundamental and size < self.k:
            pats = tolerant(self.s, size)
        else:
            pats = undominated(self.s, size)
        table = {}
        with bulk():
            for pi, p in enumerate(pats):
                rng = _ranges(self.s, p)
                singles = tuple(b == a + 1 for a, b in rng)
                for f in range(len(self.fams)):
                    key = (self._key(f, p), singles)
                    arr = table.get(key)
                    if arr is None:
                        arr = table[key] = array("q")
                    arr.append(f * len(pats) + pi)
        cache[size] = (pats, table)
        return cache[size]

    def _atoms(self, size, omask, onmask, A):
        """Distinct constraint bitsets for atoms of ``size`` links, each with up to
        k realizations (family, pattern) on distinct families."""
        pats, table = self._table(size)
        npat = len(pats)
        V = self.V
        low = (1 << V) - 1
        groups = {}
        for (key, singles), arr in table.items():
            X = A
            skip = False
            for c, single in zip(key, singles):
                pos, neg = c & low, c >> V
                if pos & onmask or neg & omask & ~onmask:
                    continue
                rest = (pos & ~omask) | ((neg & ~omask) << V)
                if not rest and single and self.fundamental:
                    # a falsified clause under fixed links: not F-compatible
                    skip = True
                    break
                X &= self.sat(rest)
            if skip:
                continue
            lst = groups.setdefault(X, [])
            for code in arr:
                if len(lst) >= self.k:
                    break
                f, pi = divmod(code, npat)
                if all(g != f for g, _ in lst):
                    lst.append((f, pats[pi]))
        return [(X, lst) for X, lst in groups.items() if lst]

    def _counterexample(self, O, nu_o, parts):
        nu = {self.opens[i]: v for i, v in zip(O, nu_o)}
        for f, p in parts:
            for j, v in p:
                nu[self.fams[f].links[j]] = v
        S = tuple(sorted(nu))
        return RobustVerdict(NO, NON_EXTENDABLE, S, {x: nu[x] for x in S}, level=self.k)

    @staticmethod
    def _distinct(choices):
        """Pick one realization per slot with pairwise distinct families."""
        def rec(i, used, acc):
            if i == len(choices):
                return acc
            for f, p in choices[i]:
                if f not in used:
                    r = rec(i + 1, used | {f}, acc + [(f, p)])
                    if r is not None:
                        return r
            return None
        return rec(0, frozenset(), [])

    def _search(self, e, omask, onmask, A):
        if e == 0:
            return [] if not A else None
        by_size = {sz: self._atoms(sz, omask, onmask, A) for sz in range(1, e + 1)}
        for parts in _partitions(e):
            lists = [by_size[sz] for sz in parts]
            found = self._combo(lists, parts, A)
            if found is not None:
                return found
        return None

    def _combo(self, lists, parts, A):
        n = len(lists)

        def rec(i, start, X, chosen):
            if i == n:
                if X:
                    return None
                return self._distinct([lst for _, lst in chosen])
            lst = lists[i]
            # equal consecutive sizes: unordered choice
            lo = start if i > 0 and parts[i] == parts[i - 1] else 0
            for t in range(lo, len(lst)):
                Y = X & lst[t][0]
                r = rec(i + 1, t, Y, chosen + [lst[t]])
                if r is not None:
                    return r
            return None

        return rec(0, 0, A, [])

    def check(self) -> RobustVerdict:
        k = self.k
        if not self.A0:
            return RobustVerdict(NO, UNSATISFIABLE, level=k)
        if self.out.structure.size < k:
            return RobustVerdict(YES, level=k)
        V = self.V
        for o in range(min(k, V), -1, -1):
            e = k - o
            if e > 0 and not self.fams:
                continue
            for O in itertools.combinations(range(V), o):
                omask = sum(1 << i for i in O)
                for nu_o in itertools.product((0, 1), repeat=o):
                    onmask = sum(1 << i for i, v in zip(O, nu_o) if v)
                    A = self.A0 & self.cube(dict(zip(O, nu_o)))
                    found = self._search(e, omask, onmask, A)
                    if found is not None:
                        return self._counterexample(O, nu_o, found)
        return RobustVerdict(YES, level=k)


def _partitions(n, most=None):
    most = n if most is None else most
    if n == 0:
        yield ()
        return
    for first in range(min(n, most), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def chain_robust(out, k: int, F=()) -> RobustVerdict:
    """(k,F)-robustness of a clause-chain output, decided from its chain structure."""
    return ChainRobustness(out, k, F).check()


def local_certificate(out, verdict: RobustVerdict):
    """Shrink a counterexample to the open elements plus the chains it touches.

    Every chain clause holds a link, so this sub-instance keeps all tuples
    inside the counterexample's domain; a map that fails to extend here fails
    on the whole output too.  Returns (sub-instance, relabelled assignment).
    """
    from ..core import RelationalStructure

    touched = set(verdict.assignment)
    keep = set(out.opens())
    edges = []
    by_family = {}
    for sym, t, src, _ in out.hyperedge_provenance:
        by_family.setdefault(src, []).append((sym, t))
    for src, rows in by_family.items():
        elems = {x for _, t in rows for x in t}
        if elems & (touched - keep):
            keep |= elems
            edges.extend(rows)
    keep |= touched
    order = sorted(keep)
    new = {x: i for i, x in enumerate(order)}
    rels = {}
    for sym, t in edges:
        rels.setdefault(sym, []).append(tuple(new[x] for x in t))
    sub = RelationalStructure(out.structure.signature, len(order), rels)
    return sub, {new[x]: v for x, v in verdict.assignment.items()}
