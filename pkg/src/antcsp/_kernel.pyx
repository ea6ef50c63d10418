# cython: language_level=3
"""Compiled backtracking kernel, same algorithm and output order as _pysearch."""
from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport uint64_t, int64_t

from .budget import BudgetExceeded


cdef class Search:
    cdef int n, m
    cdef int *scope_off
    cdef int *scope_var
    cdef int *first_pos
    cdef int *cons_rel
    cdef int *table_off
    cdef int *table_len
    cdef int *table_data
    cdef int *watch_off
    cdef int *watch_con
    cdef uint64_t *dom
    cdef int *trail_var
    cdef uint64_t *trail_old
    cdef int trail_len, trail_cap
    cdef int *queue
    cdef char *inq
    cdef uint64_t *newmask
    cdef int *st_var
    cdef uint64_t *st_rem
    cdef int *st_mark
    cdef int depth
    cdef public int64_t limit
    cdef public int64_t nodes
    cdef bint started, done

    def __cinit__(self, n, scopes, cons_rel, tables, domains, limit=-1):
        cdef int i, j, k, ci, v, total, r, maxar
        self.n = n
        self.m = len(scopes)
        self.limit = limit
        self.nodes = 0
        self.started = False
        self.done = False
        self.depth = 0
        m = self.m
        total = 0
        maxar = 1
        for sc in scopes:
            total += len(sc)
            if len(sc) > maxar:
                maxar = len(sc)
        self.scope_off = <int *> malloc((m + 1) * sizeof(int))
        self.scope_var = <int *> malloc((total + 1) * sizeof(int))
        self.first_pos = <int *> malloc((total + 1) * sizeof(int))
        self.cons_rel = <int *> malloc((m + 1) * sizeof(int))
        self.newmask = <uint64_t *> malloc(maxar * sizeof(uint64_t))
        k = 0
        for ci in range(m):
            self.scope_off[ci] = k
            sc = scopes[ci]
            for i in range(len(sc)):
                self.scope_var[k + i] = sc[i]
                self.first_pos[k + i] = i
                for j in range(i):
                    if sc[j] == sc[i]:
                        self.first_pos[k + i] = j
                        break
            self.cons_rel[ci] = cons_rel[ci]
            k += len(sc)
        self.scope_off[m] = k

        nt = len(tables)
        self.table_off = <int *> malloc((nt + 1) * sizeof(int))
        self.table_len = <int *> malloc((nt + 1) * sizeof(int))
        total = 0
        for t in tables:
            for tup in t:
                total += len(tup)
        self.table_data = <int *> malloc((total + 1) * sizeof(int))
        k = 0
        for r in range(nt):
            self.table_off[r] = k
            self.table_len[r] = len(tables[r])
            for tup in tables[r]:
                for x in tup:
                    self.table_data[k] = x
                    k += 1

        counts = [0] * n
        for ci in range(m):
            seen = set()
            for v in scopes[ci]:
                if v not in seen:
                    seen.add(v)
                    counts[v] += 1
        self.watch_off = <int *> malloc((n + 1) * sizeof(int))
        k = 0
        for v in range(n):
            self.watch_off[v] = k
            k += counts[v]
        self.watch_off[n] = k
        self.watch_con = <int *> malloc((k + 1) * sizeof(int))
        fill = [self.watch_off[v] for v in range(n)]
        for ci in range(m):
            seen = set()
            for v in scopes[ci]:
                if v not in seen:
                    seen.add(v)
                    self.watch_con[fill[v]] = ci
                    fill[v] += 1

        self.dom = <uint64_t *> malloc((n + 1) * sizeof(uint64_t))
        for v in range(n):
            self.dom[v] = domains[v]
        self.trail_cap = 1024 + 4 * n
        self.trail_var = <int *> malloc(self.trail_cap * sizeof(int))
        self.trail_old = <uint64_t *> malloc(self.trail_cap * sizeof(uint64_t))
        self.trail_len = 0
        self.queue = <int *> malloc((m + 1) * sizeof(int))
        self.inq = <char *> malloc((m + 1) * sizeof(char))
        for ci in range(m):
            self.inq[ci] = 0
        self.st_var = <int *> malloc((n + 1) * sizeof(int))
        self.st_rem = <uint64_t *> malloc((n + 1) * sizeof(uint64_t))
        self.st_mark = <int *> malloc((n + 1) * sizeof(int))

    def __dealloc__(self):
        free(self.scope_off); free(self.scope_var); free(self.first_pos)
        free(self.cons_rel); free(self.table_off); free(self.table_len)
        free(self.table_data); free(self.watch_off); free(self.watch_con)
        free(self.dom); free(self.trail_var); free(self.trail_old)
        free(self.queue); free(self.inq); free(self.newmask)
        free(self.st_var); free(self.st_rem); free(self.st_mark)

    cdef inline void _set(self, int v, uint64_t mask):
        if self.trail_len == self.trail_cap:
            self.trail_cap *= 2
            self.trail_var = <int *> realloc(self.trail_var, self.trail_cap * sizeof(int))
            self.trail_old = <uint64_t *> realloc(self.trail_old, self.trail_cap * sizeof(uint64_t))
        self.trail_var[self.trail_len] = v
        self.trail_old[self.trail_len] = self.dom[v]
        self.trail_len += 1
        self.dom[v] = mask

    cdef void _undo(self, int mark):
        while self.trail_len > mark:
            self.trail_len -= 1
            self.dom[self.trail_var[self.trail_len]] = self.trail_old[self.trail_len]

    cdef int _revise(self, int ci, int *changed, int *nchanged):
        cdef int off = self.scope_off[ci]
        cdef int arity = self.scope_off[ci + 1] - off
        cdef int r = self.cons_rel[ci]
        cdef int toff = self.table_off[r]
        cdef int tl = self.table_len[r]
        cdef int i, t, v
        cdef int *tup
        cdef bint ok
        cdef uint64_t mk
        for i in range(arity):
            self.newmask[i] = 0
        for t in range(tl):
            tup = self.table_data + toff + t * arity
            ok = True
            for i in range(arity):
                if not ((self.dom[self.scope_var[off + i]] >> tup[i]) & 1):
                    ok = False
                    break
                if self.first_pos[off + i] != i and tup[self.first_pos[off + i]] != tup[i]:
                    ok = False
                    break
            if ok:
                for i in range(arity):
                    self.newmask[i] |= (<uint64_t> 1) << tup[i]
        nchanged[0] = 0
        for i in range(arity):
            v = self.scope_var[off + i]
            mk = self.dom[v] & self.newmask[i]
            if mk != self.dom[v]:
                self._set(v, mk)
                if mk == 0:
                    return 0
                changed[nchanged[0]] = v
                nchanged[0] += 1
        return 1

    cdef int _propagate_from(self, int var, bint everything):
        cdef int head = 0, tail = 0, count = 0, ci, ci2, j, k, v, nch
        cdef int m = self.m
        cdef int changed[64]
        if everything:
            for ci in range(m):
                self.queue[tail] = ci
                tail += 1
                self.inq[ci] = 1
            count = m
        else:
            for j in range(self.watch_off[var], self.watch_off[var + 1]):
                ci = self.watch_con[j]
                self.queue[tail] = ci
                tail += 1
                if tail == m:
                    tail = 0
                self.inq[ci] = 1
                count += 1
        if tail == m:
            tail = 0
        while count > 0:
            ci = self.queue[head]
            head += 1
            if head == m:
                head = 0
            count -= 1
            self.inq[ci] = 0
            if not self._revise(ci, changed, &nch):
                while count > 0:
                    self.inq[self.queue[head]] = 0
                    head += 1
                    if head == m:
                        head = 0
                    count -= 1
                return 0
            for k in range(nch):
                v = changed[k]
                for j in range(self.watch_off[v], self.watch_off[v + 1]):
                    ci2 = self.watch_con[j]
                    if ci2 != ci and not self.inq[ci2]:
                        self.inq[ci2] = 1
                        self.queue[tail] = ci2
                        tail += 1
                        if tail == m:
                            tail = 0
                        count += 1
        return 1

    cdef int _pick(self):
        cdef int start = 0, v
        cdef uint64_t mk
        if self.depth > 0:
            start = self.st_var[self.depth - 1] + 1
        for v in range(start, self.n):
            mk = self.dom[v]
            if mk & (mk - 1):
                return v
        return -1

    cdef int _try_next(self) except -1:
        cdef int top = self.depth - 1
        cdef int v = self.st_var[top]
        cdef uint64_t bit
        while self.st_rem[top]:
            bit = self.st_rem[top] & (~self.st_rem[top] + 1)
            self.st_rem[top] ^= bit
            self._undo(self.st_mark[top])
            self.nodes += 1
            if self.limit >= 0 and self.nodes > self.limit:
                raise BudgetExceeded(self.limit, self.nodes)
            self._set(v, bit)
            if self._propagate_from(v, False):
                return 1
        self._undo(self.st_mark[top])
        return 0

    cdef int _backtrack(self) except -1:
        while self.depth > 0:
            if self._try_next():
                return 1
            self.depth -= 1
            self._undo(self.st_mark[self.depth])
        return 0

    def next_solution(self):
        cdef int v, i
        cdef bint ok
        cdef uint64_t mk
        if self.done:
            return None
        if not self.started:
            self.started = True
            ok = True
            for i in range(self.n):
                if self.dom[i] == 0:
                    ok = False
                    break
            if ok and self.m > 0:
                ok = self._propagate_from(0, True)
        else:
            ok = self._backtrack()
        while ok:
            v = self._pick()
            if v < 0:
                out = []
                for i in range(self.n):
                    mk = self.dom[i]
                    j = 0
                    while mk > 1:
                        mk >>= 1
                        j += 1
                    out.append(j)
                return out
            self.st_var[self.depth] = v
            self.st_rem[self.depth] = self.dom[v]
            self.st_mark[self.depth] = self.trail_len
            self.depth += 1
            ok = self._try_next() or self._backtrack()
        self.done = True
        return None
