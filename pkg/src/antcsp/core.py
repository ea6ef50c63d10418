"""Relational structures, quotients and the homomorphism engine."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from . import budget as _budget
from ._backend import make_search


class StructureError(ValueError):
    """Malformed structure data; the message names the offending position."""


class SignatureMismatch(ValueError):
    pass


class Signature:
    """Ordered list of relation symbols with arities (equality is implicit)."""

    __slots__ = ("symbols", "_arity")

    def __init__(self, symbols: Iterable[tuple[str, int]]):
        symbols = tuple((str(n), int(a)) for n, a in symbols)
        arity = {}
        for i, (name, a) in enumerate(symbols):
            if not name or name == "=":
                raise StructureError(f"signature[{i}]: invalid symbol name {name!r}")
            if name in arity:
                raise StructureError(f"signature[{i}]: duplicate symbol {name!r}")
            if a < 1:
                raise StructureError(f"signature[{i}]: arity of {name!r} must be >= 1, got {a}")
            arity[name] = a
        self.symbols = symbols
        self._arity = arity

    def arity(self, name: str) -> int:
        return self._arity[name]

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    def max_arity(self) -> int:
        return max((a for _, a in self.symbols), default=0)

    def __contains__(self, name):
        return name in self._arity

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return f"Signature({list(self.symbols)!r})"


class RelationalStructure:
    """Finite structure on the universe 0..size-1.

    Relations are stored as sorted tuples of tuples.  Labels are display
    metadata only.
    """

    __slots__ = ("signature", "size", "relations", "labels", "_sets", "cache")

    def __init__(self, signature, size: int, relations: Mapping[str, Iterable] | None = None,
                 labels=None):
        if not isinstance(signature, Signature):
            signature = Signature(signature)
        self.signature = signature
        self.size = int(size)
        relations = dict(relations or {})
        for name in relations:
            if name not in signature:
                raise StructureError(f"relations.{name}: symbol not in signature")
        rels = {}
        for name, ar in signature:
            tuples = set()
            for j, t in enumerate(relations.get(name, ())):
                t = tuple(int(x) for x in t)
                if len(t) != ar:
                    raise StructureError(
                        f"relations.{name}[{j}]: expected arity {ar}, got {len(t)}")
                for p, x in enumerate(t):
                    if not 0 <= x < self.size:
                        raise StructureError(
                            f"relations.{name}[{j}][{p}]: element {x} out of range 0..{self.size - 1}")
                tuples.add(t)
            rels[name] = tuple(sorted(tuples))
        self.relations = rels
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != self.size:
                raise StructureError("labels: length differs from universe size")
        self.labels = labels
        self._sets = {}
        # derived data (e.g. pp-definable relations) memoized per structure
        self.cache = {}

    @property
    def universe(self) -> range:
        return range(self.size)

    def relation(self, name: str) -> tuple:
        return self.relations[name]

    def relation_set(self, name: str) -> frozenset:
        s = self._sets.get(name)
        if s is None:
            s = frozenset(self.relations[name])
            self._sets[name] = s
        return s

    def holds(self, name: str, tup) -> bool:
        return tuple(tup) in self.relation_set(name)

    def hyperedges(self) -> Iterator[tuple[str, tuple]]:
        for name, _ in self.signature:
            for t in self.relations[name]:
                yield name, t

    def num_hyperedges(self) -> int:
        return sum(len(v) for v in self.relations.values())

    def label(self, e: int) -> str:
        return self.labels[e] if self.labels is not None else str(e)

    def with_relations(self, relations, size=None, labels=None) -> "RelationalStructure":
        return RelationalStructure(self.signature, self.size if size is None else size,
                                   relations, labels)

    def induced(self, elements) -> tuple["RelationalStructure", list[int]]:
        """Induced substructure on ``elements`` (renumbered in increasing order)."""
        keep = sorted(set(elements))
        index = {e: i for i, e in enumerate(keep)}
        rels = {}
        for name, _ in self.signature:
            rels[name] = [tuple(index[x] for x in t) for t in self.relations[name]
                          if all(x in index for x in t)]
        labels = [self.label(e) for e in keep] if self.labels is not None else None
        return RelationalStructure(self.signature, len(keep), rels, labels), keep

    def key(self):
        return (self.signature.symbols, self.size,
                tuple(self.relations[n] for n, _ in self.signature))

    def __eq__(self, other):
        return isinstance(other, RelationalStructure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        rels = ", ".join(f"{n}:{len(self.relations[n])}" for n, _ in self.signature)
        return f"<RelationalStructure size={self.size} {rels}>"

    # serialization

    def to_json(self) -> dict:
        universe = list(self.labels) if self.labels is not None else self.size
        return {
            "signature": [{"name": n, "arity": a} for n, a in self.signature],
            "universe": universe,
            "relations": {n: [list(t) for t in self.relations[n]] for n, _ in self.signature},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False, separators=(",", ":"))


def structure_from_json(obj) -> RelationalStructure:
    """Build a structure from its JSON object, with position-precise errors."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise StructureError("top level: expected an object")
    sig_raw = obj.get("signature")
    if not isinstance(sig_raw, list):
        raise StructureError("signature: expected a list")
    syms = []
    for i, s in enumerate(sig_raw):
        if not isinstance(s, dict) or "name" not in s or "arity" not in s:
            raise StructureError(f"signature[{i}]: expected {{'name','arity'}}")
        if not isinstance(s["arity"], int) or isinstance(s["arity"], bool):
            raise StructureError(f"signature[{i}].arity: expected an integer")
        syms.append((s["name"], s["arity"]))
    sig = Signature(syms)
    uni = obj.get("universe")
    labels = None
    if isinstance(uni, bool):
        raise StructureError("universe: expected an integer or a list of labels")
    if isinstance(uni, int):
        if uni < 0:
            raise StructureError("universe: size must be non-negative")
        size = uni
    elif isinstance(uni, list):
        labels = [str(x) for x in uni]
        if len(set(labels)) != len(labels):
            raise StructureError("universe: duplicate labels")
        size = len(labels)
    else:
        raise StructureError("universe: expected an integer or a list of labels")
    rels_raw = obj.get("relations", {})
    if not isinstance(rels_raw, dict):
        raise StructureError("relations: expected an object")
    index = {lab: i for i, lab in enumerate(labels)} if labels is not None else None
    rels = {}
    for name, tuples in rels_raw.items():
        if name not in sig:
            raise StructureError(f"relations.{name}: symbol not in signature")
        if not isinstance(tuples, list):
            raise StructureError(f"relations.{name}: expected a list of tuples")
        out = []
        for j, t in enumerate(tuples):
            if not isinstance(t, list):
                raise StructureError(f"relations.{name}[{j}]: expected a list")
            if len(t) != sig.arity(name):
                raise StructureError(
                    f"relations.{name}[{j}]: expected arity {sig.arity(name)}, got {len(t)}")
            row = []
            for p, x in enumerate(t):
                if isinstance(x, bool):
                    raise StructureError(f"relations.{name}[{j}][{p}]: invalid element {x!r}")
                if isinstance(x, int):
                    if not 0 <= x < size:
                        raise StructureError(
                            f"relations.{name}[{j}][{p}]: element {x} out of range 0..{size - 1}")
                    row.append(x)
                elif index is not None and str(x) in index:
                    row.append(index[str(x)])
                else:
                    raise StructureError(f"relations.{name}[{j}][{p}]: unknown element {x!r}")
            out.append(row)
        rels[name] = out
    return RelationalStructure(sig, size, rels, labels)


def load_structure(path) -> RelationalStructure:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StructureError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return structure_from_json(obj)


# quotients


def quotient(structure: RelationalStructure, partition) -> tuple[RelationalStructure, list[int]]:
    """Collapse each class of ``partition`` to one element.

    Classes are numbered by their least element; the returned class map sends
    each original element to its class id.
    """
    n = structure.size
    cmap = [-1] * n
    classes = []
    for i, cls in enumerate(partition):
        cls = sorted(set(cls))
        if not cls:
            raise StructureError(f"partition[{i}]: empty class")
        for e in cls:
            if not 0 <= e < n:
                raise StructureError(f"partition[{i}]: element {e} out of range")
            if cmap[e] != -1:
                raise StructureError(f"partition[{i}]: element {e} occurs in two classes")
            cmap[e] = i
        classes.append(cls)
    missing = [e for e in range(n) if cmap[e] == -1]
    if missing:
        raise StructureError(f"partition: elements {missing} not covered")
    order = sorted(range(len(classes)), key=lambda i: classes[i][0])
    renum = {old: new for new, old in enumerate(order)}
    cmap = [renum[c] for c in cmap]
    rels = {name: [tuple(cmap[x] for x in t) for t in structure.relations[name]]
            for name, _ in structure.signature}
    labels = None
    if structure.labels is not None:
        labels = ["+".join(structure.labels[e] for e in classes[old]) for old in order]
    return RelationalStructure(structure.signature, len(classes), rels, labels), cmap


def partition_from_map(class_map) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for e, c in enumerate(class_map):
        groups.setdefault(c, []).append(e)
    return [groups[c] for c in sorted(groups)]


# homomorphisms


@dataclass(frozen=True)
class Homomorphism:
    """A total map instance -> template with the hyperedges it was checked on."""

    mapping: tuple[int, ...]
    instance: RelationalStructure | None = field(default=None, repr=False, compare=False)

    @property
    def certificate(self) -> tuple[tuple[str, tuple[int, ...]], ...]:
        """The instance hyperedges, each of which the search verified."""
        if self.instance is None:
            return ()
        return tuple(self.instance.hyperedges())

    def __getitem__(self, e):
        return self.mapping[e]

    def __len__(self):
        return len(self.mapping)

    def as_dict(self) -> dict[int, int]:
        return dict(enumerate(self.mapping))

    def restrict(self, elements) -> dict[int, int]:
        return {e: self.mapping[e] for e in elements}


def check_signatures(instance: RelationalStructure, template: RelationalStructure):
    for name, ar in instance.signature:
        if name not in template.signature:
            raise SignatureMismatch(f"instance symbol {name!r} missing from template")
        if template.signature.arity(name) != ar:
            raise SignatureMismatch(
                f"symbol {name!r}: arity {ar} in instance, {template.signature.arity(name)} in template")


def _check_seed(instance, template, seed):
    seed = dict(seed or {})
    for b, a in seed.items():
        if not 0 <= b < instance.size:
            raise ValueError(f"seed element {b} outside instance universe 0..{instance.size - 1}")
        if not 0 <= a < template.size:
            raise ValueError(f"seed value {a} for element {b} outside template range 0..{template.size - 1}")
    return seed


def compile_problem(instance: RelationalStructure, template: RelationalStructure, seed=None,
                    domains=None):
    """Translate a homomorphism problem into kernel arrays."""
    check_signatures(instance, template)
    seed = _check_seed(instance, template, seed)
    names = [n for n, _ in instance.signature]
    rel_index = {n: i for i, n in enumerate(names)}
    tables = [list(template.relation(n)) for n in names]
    scopes = []
    cons_rel = []
    for name in names:
        r = rel_index[name]
        for t in instance.relation(name):
            scopes.append(t)
            cons_rel.append(r)
    full = (1 << template.size) - 1
    doms = list(domains) if domains is not None else [full] * instance.size
    for b, a in seed.items():
        doms[b] &= 1 << a
    return scopes, cons_rel, tables, doms


def _run(instance, template, seed, domains=None, backend=None):
    scopes, cons_rel, tables, doms = compile_problem(instance, template, seed, domains)
    b = _budget.current()
    search = make_search(instance.size, scopes, cons_rel, tables, doms, b.remaining(),
                         template.size, backend)
    return search, b


def enumerate_homomorphisms(instance, template, seed=None, *, backend=None,
                            domains=None) -> Iterator[Homomorphism]:
    """All homomorphisms extending ``seed``, in lexicographic order."""
    search, b = _run(instance, template, seed, domains, backend)
    charged = 0
    try:
        while True:
            sol = search.next_solution()
            b.charge(search.nodes - charged)
            charged = search.nodes
            if sol is None:
                return
            yield Homomorphism(tuple(sol), instance)
    except _budget.BudgetExceeded:
        b.charge(search.nodes - charged)
        raise


def find_homomorphism(instance, template, seed=None, *, backend=None,
                      domains=None) -> Homomorphism | None:
    """Lexicographically least homomorphism extending ``seed``, or None."""
    for h in enumerate_homomorphisms(instance, template, seed, backend=backend, domains=domains):
        return h
    return None


def seeded_existence(instance, template, *, backend=None):
    """A test ``seed -> bool`` for many seeded searches over one compiled problem."""
    scopes, cons_rel, tables, doms = compile_problem(instance, template)

    def exists(seed) -> bool:
        d = list(doms)
        for b, a in _check_seed(instance, template, seed).items():
            d[b] &= 1 << a
        b = _budget.current()
        search = make_search(instance.size, scopes, cons_rel, tables, d, b.remaining(), template.size, backend)
        try:
            sol = search.next_solution()
        finally:
            b.charge(search.nodes)
        return sol is not None

    return exists


def count_homomorphisms(instance, template, seed=None, limit=None) -> int:
    c = 0
    for _ in enumerate_homomorphisms(instance, template, seed):
        c += 1
        if limit is not None and c >= limit:
            break
    return c


def is_homomorphism(instance, template, mapping) -> bool:
    if len(mapping) != instance.size:
        return False
    for name, t in instance.hyperedges():
        if not template.holds(name, tuple(mapping[x] for x in t)):
            return False
    return True


def is_partial_homomorphism(instance, template, assignment: Mapping[int, int]) -> bool:
    """Every hyperedge lying entirely inside the domain maps to a template hyperedge."""
    for name, t in instance.hyperedges():
        if all(x in assignment for x in t):
            if not template.holds(name, tuple(assignment[x] for x in t)):
                return False
    return True


def brute_force_homomorphisms(instance, template) -> list[tuple[int, ...]]:
    """Every total map checked directly; an oracle for tiny inputs only."""
    import itertools

    return [m for m in itertools.product(range(template.size), repeat=instance.size)
            if is_homomorphism(instance, template, m)]


def disjoint_union(a: RelationalStructure, b: RelationalStructure) -> RelationalStructure:
    if a.signature != b.signature:
        raise SignatureMismatch("disjoint union needs equal signatures")
    rels = {n: list(a.relation(n)) + [tuple(x + a.size for x in t) for t in b.relation(n)]
            for n, _ in a.signature}
    return RelationalStructure(a.signature, a.size + b.size, rels)
