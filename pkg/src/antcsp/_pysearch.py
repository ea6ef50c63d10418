"""Pure-Python backtracking kernel.

Variables are dense ints, domains are bitmasks over template values.  Each
decision is followed by generalized arc consistency over the touched
constraints, run to a fixpoint.  Branching takes the least-indexed variable
with more than one value left and tries values in increasing order, so
solutions come out in lexicographic order.
"""
from collections import deque

from .budget import BudgetExceeded


class Search:
    def __init__(self, n, scopes, cons_rel, tables, domains, limit=-1):
        self.n = n
        self.scopes = [tuple(s) for s in scopes]
        self.cons_rel = list(cons_rel)
        self.tables = [list(t) for t in tables]
        self.dom = list(domains)
        self.limit = limit
        self.nodes = 0
        self.watch = [[] for _ in range(n)]
        self.repeats = []
        for ci, sc in enumerate(self.scopes):
            seen = {}
            pairs = []
            for i, v in enumerate(sc):
                if v in seen:
                    pairs.append((seen[v], i))
                else:
                    seen[v] = i
                    self.watch[v].append(ci)
            self.repeats.append(pairs)
        self.trail = []
        self.stack = []
        self.started = False
        self.done = False

    def _undo(self, mark):
        trail = self.trail
        dom = self.dom
        while len(trail) > mark:
            v, old = trail.pop()
            dom[v] = old

    def _revise(self, ci, changed):
        sc = self.scopes[ci]
        dom = self.dom
        arity = len(sc)
        pairs = self.repeats[ci]
        new = [0] * arity
        masks = [dom[v] for v in sc]
        for t in self.tables[self.cons_rel[ci]]:
            ok = True
            for i in range(arity):
                if not (masks[i] >> t[i]) & 1:
                    ok = False
                    break
            if ok and pairs:
                for i, j in pairs:
                    if t[i] != t[j]:
                        ok = False
                        break
            if ok:
                for i in range(arity):
                    new[i] |= 1 << t[i]
        for i in range(arity):
            v = sc[i]
            m = dom[v] & new[i]
            if m != dom[v]:
                self.trail.append((v, dom[v]))
                dom[v] = m
                if m == 0:
                    return False
                changed.append(v)
        return True

    def _propagate(self, queue):
        inq = set(queue)
        queue = deque(queue)
        watch = self.watch
        while queue:
            ci = queue.popleft()
            inq.discard(ci)
            changed = []
            if not self._revise(ci, changed):
                return False
            for v in changed:
                for cj in watch[v]:
                    if cj != ci and cj not in inq:
                        inq.add(cj)
                        queue.append(cj)
        return True

    def _pick(self):
        start = self.stack[-1][0] + 1 if self.stack else 0
        dom = self.dom
        for v in range(start, self.n):
            m = dom[v]
            if m & (m - 1):
                return v
        return -1

    def _try_next(self):
        frame = self.stack[-1]
        v = frame[0]
        while frame[1]:
            bit = frame[1] & -frame[1]
            frame[1] ^= bit
            self._undo(frame[2])
            self.nodes += 1
            if self.limit >= 0 and self.nodes > self.limit:
                raise BudgetExceeded(self.limit, self.nodes)
            self.trail.append((v, self.dom[v]))
            self.dom[v] = bit
            if self._propagate(list(self.watch[v])):
                return True
        self._undo(frame[2])
        return False

    def _backtrack(self):
        while self.stack:
            if self._try_next():
                return True
            frame = self.stack.pop()
            self._undo(frame[2])
        return False

    def next_solution(self):
        if self.done:
            return None
        if not self.started:
            self.started = True
            ok = all(m != 0 for m in self.dom) and self._propagate(list(range(len(self.scopes))))
        else:
            ok = self._backtrack()
        while ok:
            v = self._pick()
            if v < 0:
                return [m.bit_length() - 1 for m in self.dom]
            self.stack.append([v, self.dom[v], len(self.trail)])
            ok = self._try_next() or self._backtrack()
        self.done = True
        return None
