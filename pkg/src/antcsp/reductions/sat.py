"""Signed clause instances, Gottlob amplification, clause chains and DIMACS."""
from __future__ import annotations

import gc
import itertools
from contextlib import contextmanager
from dataclasses import dataclass

from ..core import RelationalStructure, StructureError
from ..templates import sat_signature, sat_symbol
from .output import EXISTENTIAL, OPEN, ReductionOutput


class ClauseError(ValueError):
    pass


@contextmanager
def bulk():
    """Amplified instances allocate millions of small tuples; pause the cycle collector."""
    was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was:
            gc.enable()


@dataclass(frozen=True)
class SignedClauseInstance:
    """Clauses of uniform width over variables 0..num_vars-1.

    A literal is ``(var, neg)`` with ``neg`` 1 for a negated occurrence.
    """

    num_vars: int
    clauses: tuple = ()

    def __post_init__(self):
        cl = tuple(tuple((int(v), int(bool(s))) for v, s in c) for c in self.clauses)
        object.__setattr__(self, "clauses", cl)
        widths = {len(c) for c in cl}
        if len(widths) > 1:
            raise ClauseError(f"mixed clause widths {sorted(widths)}")
        for i, c in enumerate(cl):
            if not c:
                raise ClauseError(f"clause {i} is empty")
            for v, _ in c:
                if not 0 <= v < self.num_vars:
                    raise ClauseError(f"clause {i}: variable {v} out of range 0..{self.num_vars - 1}")

    @classmethod
    def _trusted(cls, num_vars, clauses):
        """Skip validation for clauses built by this module."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "num_vars", num_vars)
        object.__setattr__(obj, "clauses", tuple(clauses))
        return obj

    @property
    def width(self):
        return len(self.clauses[0]) if self.clauses else 0

    def satisfied_by(self, assignment) -> bool:
        return all(any(assignment[v] != s for v, s in c) for c in self.clauses)

    def solutions(self):
        """All satisfying assignments, by enumeration (small instances only)."""
        for a in itertools.product((0, 1), repeat=self.num_vars):
            if self.satisfied_by(a):
                yield a

    def is_satisfiable(self) -> bool:
        return next(self.solutions(), None) is not None

    def to_structure(self, width=None) -> RelationalStructure:
        n = width or self.width
        if self.clauses and n != self.width:
            raise ClauseError(f"width {self.width} clauses, structure width {n} requested")
        if n == 0:
            raise ClauseError("cannot infer a width for an instance without clauses")
        rels = {}
        for c in self.clauses:
            rels.setdefault(sat_symbol([s for _, s in c]), []).append(tuple(v for v, _ in c))
        return RelationalStructure(sat_signature(n), self.num_vars, rels)

    @classmethod
    def from_structure(cls, structure: RelationalStructure) -> "SignedClauseInstance":
        clauses = []
        for name, t in structure.hyperedges():
            head, _, bits = name.partition("_")
            if not head.startswith("R") or len(bits) != len(t):
                raise ClauseError(f"symbol {name!r} is not a signed clause relation")
            clauses.append(tuple(zip(t, (int(b) for b in bits))))
        return cls(structure.size, clauses)

    def to_json(self):
        return {"vars": self.num_vars,
                "clauses": [[(v + 1) * (-1 if s else 1) for v, s in c] for c in self.clauses]}


# Gottlob amplification


def copy_id(var, j, k):
    return var * (2 * k + 1) + j


def gottlob_amplify(src: SignedClauseInstance, k: int) -> SignedClauseInstance:
    """Each variable gets 2k+1 copies; a clause becomes every choice of (k+1)
    copies for each of its literals, signs inherited."""
    if k < 0:
        raise ClauseError("k must be non-negative")
    m = 2 * k + 1
    subsets = list(itertools.combinations(range(m), k + 1))
    out = []
    with bulk():
        for c in src.clauses:
            blocks = [[tuple((copy_id(v, j, k), s) for j in I) for I in subsets] for v, s in c]
            for choice in itertools.product(*blocks):
                out.append(sum(choice, ()))
        return SignedClauseInstance._trusted(src.num_vars * m, out)


# clause chains


def chain_layout(n: int, w: int) -> list[int]:
    """Segment sizes when one n-clause is split into a chain of w-clauses."""
    if w < 3:
        raise ClauseError("chain width must be at least 3")
    if n <= w:
        raise ClauseError(f"width {n} is not above the target width {w}")
    inner = n - 2 * (w - 1)
    if inner < 0 or inner % (w - 2):
        raise ClauseError(f"a {n}-clause does not split evenly into {w}-clauses")
    return [w - 1] + [w - 2] * (inner // (w - 2)) + [w - 1]


def reduce_width(src: SignedClauseInstance, w: int) -> ReductionOutput:
    """Split every clause into a chain of w-clauses joined by fresh link variables.

    For w=3 and a clause (x1 .. xn) this is
    (x1 x2 y1)(-y1 x3 y2)...(-y_{n-3} x_{n-1} x_n): n-2 clauses, n-3 links.
    """
    with bulk():
        return _reduce_width(src, w)


def _reduce_width(src, w):
    layout = chain_layout(src.width, w) if src.clauses else []
    prov = [(OPEN, v) for v in range(src.num_vars)]
    hprov = []
    out_clauses = []
    edges = [(sat_symbol([s for _, s in c]), tuple(v for v, _ in c)) for c in src.clauses]
    symbol = {}
    for cid, c in enumerate(src.clauses):
        links = []
        for j in range(len(layout) - 1):
            links.append(len(prov))
            prov.append((EXISTENTIAL, cid, j))
        pos = 0
        for j, size in enumerate(layout):
            lits = list(c[pos:pos + size])
            pos += size
            if j > 0:
                lits.insert(0, (links[j - 1], 1))
            if j < len(layout) - 1:
                lits.append((links[j], 0))
            lits = tuple(lits)
            out_clauses.append(lits)
            signs = tuple(s for _, s in lits)
            sym = symbol.get(signs)
            if sym is None:
                sym = symbol[signs] = sat_symbol(signs)
            hprov.append((sym, tuple(v for v, _ in lits), cid, j))
    inst = SignedClauseInstance._trusted(len(prov), out_clauses)
    rels = {}
    for sym, t, _, _ in hprov:
        rels.setdefault(sym, []).append(t)
    struct = RelationalStructure(sat_signature(w), len(prov), rels)
    return ReductionOutput(struct, prov, hprov, edges, inst)


def chain_definitions(n: int, w: int = 3):
    """The chain split as pp-definitions: each n-clause symbol defined over
    w-clause symbols, opens x1..xn and links y1.. quantified."""
    from ..formulas import PpDefinitionSet, PpFormula

    layout = chain_layout(n, w)
    xs = tuple(f"x{i + 1}" for i in range(n))
    ys = tuple(f"y{j + 1}" for j in range(len(layout) - 1))
    defs = {}
    for signs in itertools.product((0, 1), repeat=n):
        atoms = []
        pos = 0
        for j, size in enumerate(layout):
            lits = [(xs[i], signs[i]) for i in range(pos, pos + size)]
            pos += size
            if j > 0:
                lits.insert(0, (ys[j - 1], 1))
            if j < len(layout) - 1:
                lits.append((ys[j], 0))
            atoms.append((sat_symbol([g for _, g in lits]), tuple(v for v, _ in lits)))
        defs[sat_symbol(signs)] = PpFormula(xs, ys, tuple(atoms))
    return PpDefinitionSet(defs, sat_signature(n), sat_signature(w))


def reduce_to_3sat(src: SignedClauseInstance) -> ReductionOutput:
    if src.clauses and src.width < 4:
        raise ClauseError(f"reduce_to_3sat needs width >= 4, got {src.width}")
    return reduce_width(src, 3)


@dataclass
class ChainFamily:
    """The chain replacing one long clause: open literals per segment and the links."""

    source: int
    segments: list            # list of lists of (open element, neg)
    links: list               # link elements; links[j] sits between segment j and j+1

    def elements(self) -> set:
        return {v for seg in self.segments for v, _ in seg} | set(self.links)

    def literals(self) -> list:
        return [lit for seg in self.segments for lit in seg]


def chain_families(out: ReductionOutput) -> list[ChainFamily]:
    """Read the clause chains back off the produced hyperedges."""
    with bulk():
        return _chain_families(out)


def _chain_families(out):
    is_open = [p[0] == OPEN for p in out.element_provenance]
    rows = {}
    decoded = {}
    for sym, t, src, c in out.hyperedge_provenance:
        signs = decoded.get(sym)
        if signs is None:
            signs = decoded[sym] = [int(b) for b in sym.partition("_")[2]]
        rows.setdefault(src, []).append((c, list(zip(t, signs))))
    fams = []
    for src in sorted(rows):
        clauses = [lits for _, lits in sorted(rows[src])]
        s = len(clauses)
        segs, links = [], []
        for j, lits in enumerate(clauses):
            body = list(lits)
            if j > 0:
                v, neg = body.pop(0)
                if is_open[v] or not neg or v != links[-1]:
                    raise StructureError(f"family {src}: clause {j} does not start with the negated link")
            if j < s - 1:
                v, neg = body.pop()
                if is_open[v] or neg:
                    raise StructureError(f"family {src}: clause {j} does not end with a positive link")
                links.append(v)
            if any(not is_open[v] for v, _ in body):
                raise StructureError(f"family {src}: clause {j} has a link in an open position")
            segs.append(body)
        fams.append(ChainFamily(src, segs, links))
    return fams


# arrows


@dataclass
class ArrowDiagram:
    arrows: list                  # (boundary index, "->" or "<-"); boundary j sits before segment j
    convergent: list              # consecutive convergent pairs as segment ranges (a, b)
    choices: list                 # per pair: (range, literal or None, value or None, status)
    failed: bool = False

    def stabilizers(self) -> dict:
        return {lit[0]: val for _, lit, val, status in self.choices if status == "chosen"}


def arrow_ranges(s: int, fixed: dict) -> list[tuple[int, int]]:
    """Segment ranges [a, b) between consecutive convergent arrows.

    ``fixed`` maps a link index j (0-based, between segments j and j+1) to its
    value; a 1 points right, a 0 points left.  The chain start points right and
    the end points left.
    """
    arrows = [(0, 1)] + [(j + 1, fixed[j]) for j in sorted(fixed)] + [(s, 0)]
    out = []
    for (a, da), (b, db) in zip(arrows, arrows[1:]):
        if da == 1 and db == 0:
            out.append((a, b))
    return out


def arrow_diagram(family: ChainFamily, nu: dict) -> ArrowDiagram:
    """Arrows for the link values in ``nu`` and, for every convergent pair, the
    least-index open literal not already assigned that would stabilize it."""
    allowed = family.elements()
    extra = sorted(set(nu) - allowed)
    if extra:
        raise ValueError(f"assignment mentions elements outside the family: {extra}")
    s = len(family.segments)
    fixed = {j: nu[y] for j, y in enumerate(family.links) if y in nu}
    arrows = [(0, "->")] + [(j + 1, "->" if v else "<-") for j, v in sorted(fixed.items())] + [(s, "<-")]
    ranges = arrow_ranges(s, fixed)
    choices = []
    failed = False
    taken = dict((v, a) for v, a in nu.items())
    for a, b in ranges:
        lits = [lit for seg in family.segments[a:b] for lit in seg]
        if any(v in taken and taken[v] != neg for v, neg in lits):
            choices.append(((a, b), None, None, "stabilized"))
            continue
        for v, neg in lits:
            if v not in taken:
                taken[v] = 1 - neg
                choices.append(((a, b), (v, neg), 1 - neg, "chosen"))
                break
        else:
            choices.append(((a, b), None, None, "failed"))
            failed = True
    return ArrowDiagram(arrows, ranges, choices, failed)


# DIMACS


def dimacs_import(text: str) -> SignedClauseInstance:
    nvars = None
    declared = None
    lits = []
    clauses = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ClauseError(f"line {lineno}: expected 'p cnf <vars> <clauses>'")
            try:
                nvars, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise ClauseError(f"line {lineno}: header counts must be integers") from None
            continue
        if nvars is None:
            raise ClauseError(f"line {lineno}: clause before the 'p cnf' header")
        for col, tok in enumerate(line.split(), 1):
            try:
                x = int(tok)
            except ValueError:
                raise ClauseError(f"line {lineno}, token {col}: {tok!r} is not an integer") from None
            if x == 0:
                clauses.append(tuple(lits))
                lits = []
            else:
                if abs(x) > nvars:
                    raise ClauseError(f"line {lineno}, token {col}: variable {abs(x)} exceeds {nvars}")
                lits.append((abs(x) - 1, 1 if x < 0 else 0))
    if nvars is None:
        raise ClauseError("missing 'p cnf' header")
    if lits:
        clauses.append(tuple(lits))
    if declared is not None and declared != len(clauses):
        raise ClauseError(f"header declares {declared} clauses, found {len(clauses)}")
    widths = sorted({len(c) for c in clauses})
    if len(widths) > 1:
        raise ClauseError(f"mixed clause widths {widths}; the width-n pipelines need uniform "
                          "clauses (pad short clauses by repeating a literal)")
    return SignedClauseInstance(nvars, clauses)


def dimacs_export(inst: SignedClauseInstance) -> str:
    lines = [f"p cnf {inst.num_vars} {len(inst.clauses)}"]
    for c in inst.clauses:
        lines.append(" ".join(str((v + 1) * (-1 if s else 1)) for v, s in c) + " 0")
    return "\n".join(lines) + "\n"
