"""Primitive-positive formulas: evaluation, instantiation, types, translation.

Atoms are plain tuples ``(symbol, args)``; equality uses the symbol ``"="``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import budget as _budget
from .core import RelationalStructure, Signature, enumerate_homomorphisms, find_homomorphism, seeded_existence

EQ = "="


class FormulaError(ValueError):
    pass


def rel(symbol, *args):
    return (symbol, tuple(args))


def eq(a, b):
    return (EQ, (a, b))


@dataclass(frozen=True)
class PpFormula:
    free: tuple
    exists: tuple = ()
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "free", tuple(self.free))
        object.__setattr__(self, "exists", tuple(self.exists))
        object.__setattr__(self, "atoms", tuple((s, tuple(a)) for s, a in self.atoms))
        fs, es = set(self.free), set(self.exists)
        if len(fs) != len(self.free):
            raise FormulaError(f"repeated free variable in {self.free}")
        if len(es) != len(self.exists):
            raise FormulaError(f"repeated existential variable in {self.exists}")
        if fs & es:
            raise FormulaError(f"variables both free and quantified: {sorted(fs & es)}")
        declared = fs | es
        for sym, args in self.atoms:
            if sym == EQ and len(args) != 2:
                raise FormulaError("equality atom needs two arguments")
            for v in args:
                if v not in declared:
                    raise FormulaError(f"undeclared variable {v!r} in atom {sym}{args}")

    @property
    def arity(self):
        return len(self.free)

    def variables(self) -> tuple:
        return self.free + self.exists

    def symbols(self) -> set:
        return {s for s, _ in self.atoms if s != EQ}

    def check_signature(self, signature: Signature):
        for sym, args in self.atoms:
            if sym == EQ:
                continue
            if sym not in signature:
                raise FormulaError(f"symbol {sym!r} not in signature")
            if signature.arity(sym) != len(args):
                raise FormulaError(
                    f"atom {sym}{args}: arity {len(args)}, signature says {signature.arity(sym)}")

    def rename(self, mapping) -> "PpFormula":
        """Rename variables; unmapped ones keep their names."""
        f = lambda v: mapping.get(v, v)
        return PpFormula(tuple(f(v) for v in self.free), tuple(f(v) for v in self.exists),
                         tuple((s, tuple(f(v) for v in a)) for s, a in self.atoms))

    def canonical(self) -> "PpFormula":
        return canonicalize(self)

    def to_json(self) -> dict:
        atoms = []
        for s, a in self.atoms:
            if s == EQ:
                atoms.append({"eq": list(a)})
            else:
                atoms.append({"rel": s, "args": list(a)})
        return {"free": list(self.free), "exists": list(self.exists), "atoms": atoms}

    def __str__(self):
        body = " & ".join(f"{a[0]}={a[1]}" if s == EQ else f"{s}({','.join(a)})"
                          for s, a in self.atoms) or "true"
        q = "".join(f"E{v} " for v in self.exists)
        return f"({','.join(self.free)}) {q}{body}"


TRUE = PpFormula(())


def formula_from_json(obj) -> PpFormula:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise FormulaError("formula: expected an object")
    atoms = []
    for i, a in enumerate(obj.get("atoms", [])):
        if "eq" in a:
            if len(a["eq"]) != 2:
                raise FormulaError(f"atoms[{i}].eq: expected two variables")
            atoms.append((EQ, tuple(a["eq"])))
        elif "rel" in a:
            atoms.append((a["rel"], tuple(a.get("args", []))))
        else:
            raise FormulaError(f"atoms[{i}]: expected 'rel' or 'eq'")
    try:
        return PpFormula(tuple(obj.get("free", [])), tuple(obj.get("exists", [])), tuple(atoms))
    except FormulaError as exc:
        raise FormulaError(f"formula: {exc}") from None


def formulas_from_json(obj) -> list[PpFormula]:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if isinstance(obj, dict):
        obj = [obj]
    out = []
    for i, f in enumerate(obj):
        try:
            out.append(formula_from_json(f))
        except FormulaError as exc:
            raise FormulaError(f"[{i}]: {exc}") from None
    return out


def load_formulas(path) -> list[PpFormula]:
    with open(path) as fh:
        return formulas_from_json(json.load(fh))


# canonical forms

_PERM_CAP = 5040


def _refine(exists, atoms, fixed):
    """Colour refinement of the quantified variables; returns rank per variable."""
    color = {v: 0 for v in exists}
    for _ in range(len(exists) + 1):
        sig = {}
        for v in exists:
            occ = []
            for s, args in atoms:
                for p, a in enumerate(args):
                    if a == v:
                        cols = tuple(fixed[b] if b in fixed else (1, color[b]) for b in args)
                        # equality is symmetric: orientation must not matter
                        occ.append((s, 0, tuple(sorted(cols))) if s == EQ else (s, p, cols))
            sig[v] = (color[v], tuple(sorted(occ)))
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: ranks[sig[v]] for v in exists}
        if len(set(new.values())) == len(set(color.values())):
            color = new
            break
        color = new
    return color


def canonicalize(f: PpFormula) -> PpFormula:
    """Free variables become x1..xn (in order), quantified ones y1..ym.

    The quantified variables are ordered by colour refinement; ties are broken
    by trying every order inside the tied classes and keeping the least atom
    list (when that is cheap).  Equalities between identical variables,
    duplicate atoms and quantifiers over variables in no atom are dropped
    (the last is vacuous on nonempty structures).
    """
    body = tuple(dict.fromkeys((s, a) for s, a in f.atoms if not (s == EQ and a[0] == a[1])))
    used = {v for _, a in body for v in a}
    f = PpFormula(f.free, tuple(v for v in f.exists if v in used), body)
    free_names = {v: f"x{i + 1}" for i, v in enumerate(f.free)}
    fixed = {v: (0, i) for i, v in enumerate(f.free)}
    color = _refine(f.exists, f.atoms, fixed)
    groups: dict[int, list] = {}
    for v in f.exists:
        groups.setdefault(color[v], []).append(v)
    classes = [groups[c] for c in sorted(groups)]
    width = len(f.exists)
    names = [f"y{i + 1}" for i in range(width)]

    def build(order):
        m = dict(free_names)
        for i, v in enumerate(order):
            m[v] = names[i]
        out = set()
        for s, args in f.atoms:
            a = tuple(m[x] for x in args)
            if s == EQ:
                if a[0] == a[1]:
                    continue
                a = tuple(sorted(a, key=_var_key))
            out.add((s, a))
        return tuple(sorted(out, key=_atom_key))

    total = math.prod(math.factorial(len(c)) for c in classes)
    if total <= _PERM_CAP:
        best = None
        for combo in itertools.product(*(itertools.permutations(c) for c in classes)):
            order = [v for part in combo for v in part]
            atoms = build(order)
            key = tuple(_atom_key(a) for a in atoms)
            if best is None or key < best[0]:
                best = (key, atoms)
        atoms = best[1]
    else:
        atoms = build([v for c in classes for v in c])
    return PpFormula(tuple(free_names[v] for v in f.free), tuple(names), atoms)


def _var_key(name):
    return (name[0], int(name[1:]) if name[1:].isdigit() else name)


def _atom_key(atom):
    s, args = atom
    return (s, tuple(_var_key(a) for a in args))


# evaluation


def _formula_structure(f: PpFormula):
    """Compile a formula to a structure whose elements are its variable classes."""
    variables = f.variables()
    parent = {v: v for v in variables}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    order = {v: i for i, v in enumerate(variables)}
    for s, (a, *rest) in f.atoms:
        if s == EQ:
            ra, rb = find(a), find(rest[0])
            if ra != rb:
                if order[ra] < order[rb]:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
    reps = []
    index = {}
    for v in variables:
        r = find(v)
        if r not in index:
            index[r] = len(reps)
            reps.append(r)
    elem = {v: index[find(v)] for v in variables}
    syms = {}
    for s, args in f.atoms:
        if s != EQ:
            syms.setdefault(s, len(args))
    sig = Signature(sorted(syms.items()))
    rels = {s: [] for s in syms}
    for s, args in f.atoms:
        if s != EQ:
            rels[s].append(tuple(elem[v] for v in args))
    return RelationalStructure(sig, len(reps), rels), elem


_COMPILED: dict = {}


def _compiled(f):
    c = _COMPILED.get(f)
    if c is None:
        if len(_COMPILED) > 200_000:
            _COMPILED.clear()
        c = _formula_structure(f)
        _COMPILED[f] = c
    return c


def eval_pp(structure: RelationalStructure, f: PpFormula, binding, witness=False):
    """Truth of ``f`` at ``binding`` (values for the free variables, in order).

    With ``witness=True`` returns ``(truth, values)`` where ``values`` is the
    lexicographically least assignment of the quantified variables, or None.
    """
    if isinstance(binding, dict):
        binding = [binding[v] for v in f.free]
    binding = tuple(binding)
    if len(binding) != len(f.free):
        raise FormulaError(f"binding has {len(binding)} values for {len(f.free)} free variables")
    for x in binding:
        if not 0 <= x < structure.size:
            raise FormulaError(f"binding value {x} outside universe")
    if not f.exists and not witness:
        env = dict(zip(f.free, binding))
        for s, args in f.atoms:
            vals = tuple(env[v] for v in args)
            if s == EQ:
                if vals[0] != vals[1]:
                    return False
            elif not structure.holds(s, vals):
                return False
        return True
    fs, elem = _compiled(f)
    seed = {}
    for v, x in zip(f.free, binding):
        e = elem[v]
        if seed.get(e, x) != x:
            return (False, None) if witness else False
        seed[e] = x
    h = find_homomorphism(fs, structure, seed)
    if not witness:
        return h is not None
    if h is None:
        return False, None
    return True, tuple(h[elem[v]] for v in f.exists)


def formula_relation(structure: RelationalStructure, f: PpFormula) -> frozenset:
    """All free-variable tuples at which ``f`` holds (memoized per structure)."""
    key = ("pp", f)
    cached = structure.cache.get(key)
    if cached is not None:
        return cached
    fs, elem = _compiled(f)
    free_el = [elem[v] for v in f.free]
    if not f.exists:
        out = set()
        for h in enumerate_homomorphisms(fs, structure):
            out.add(tuple(h[e] for e in free_el))
    else:
        # enumerate free classes first, test each with one existence check
        out = set()
        classes = sorted(set(free_el))
        exists = seeded_existence(fs, structure)
        for vals in itertools.product(range(structure.size), repeat=len(classes)):
            seed = dict(zip(classes, vals))
            if exists(seed):
                out.add(tuple(seed[e] for e in free_el))
    res = frozenset(out)
    structure.cache[key] = res
    return res


def formula_relation_within(structure: RelationalStructure, f: PpFormula, span: int) -> frozenset:
    """The tuples of ``formula_relation`` that use at most ``span`` distinct elements."""
    fs, elem = _compiled(f)
    classes = sorted(set(elem[v] for v in f.free))
    if span >= len(classes) or span >= structure.size:
        return formula_relation(structure, f)
    key = ("pp", f, span)
    cached = structure.cache.get(key)
    if cached is not None:
        return cached
    free_el = [elem[v] for v in f.free]
    out, tried = set(), set()
    exists = seeded_existence(fs, structure)
    for pool in itertools.combinations(range(structure.size), span):
        for vals in itertools.product(pool, repeat=len(classes)):
            if vals in tried:
                continue
            tried.add(vals)
            seed = dict(zip(classes, vals))
            if exists(seed):
                out.add(tuple(seed[e] for e in free_el))
    res = frozenset(out)
    structure.cache[key] = res
    return res


def holds_at(structure, f: PpFormula, tup) -> bool:
    """Memoized truth of f at a tuple (uses the full relation for small universes)."""
    if structure.size ** max(len(f.free), 1) <= 4096 or not f.exists:
        if not f.exists:
            return eval_pp(structure, f, tup)
        return tuple(tup) in formula_relation(structure, f)
    key = ("at", f, tuple(tup))
    v = structure.cache.get(key)
    if v is None:
        v = eval_pp(structure, f, tup)
        structure.cache[key] = v
    return v


# instantiation and types


def substitute(f: PpFormula, targets: Sequence[str], new_free: Sequence[str], tag="q") -> PpFormula:
    """Send the i-th free variable to ``targets[i]`` (a member of ``new_free``).

    Quantified variables are renamed apart from ``new_free``.
    """
    m = dict(zip(f.free, targets))
    for i, v in enumerate(f.exists):
        m[v] = f"_{tag}{i + 1}"
    return PpFormula(tuple(new_free), tuple(m[v] for v in f.exists),
                     tuple((s, tuple(m[v] for v in a)) for s, a in f.atoms))


def std_vars(k, prefix="x"):
    return tuple(f"{prefix}{i + 1}" for i in range(k))


def instantiate_Fk(F: Iterable[PpFormula], k: int) -> list[PpFormula]:
    """All k-ary substitution instances of the formulas in F, canonical and deduplicated."""
    if k < 0:
        raise FormulaError("k must be non-negative")
    xs = std_vars(k)
    seen = {}
    for phi in F:
        for iota in itertools.product(range(k), repeat=len(phi.free)):
            g = canonicalize(substitute(phi, [xs[i] for i in iota], xs))
            seen.setdefault(g, None)
    return sorted(seen, key=formula_sort_key)


def formula_sort_key(f: PpFormula):
    return (len(f.free), len(f.exists), tuple(_atom_key(a) for a in f.atoms))


def instances_with_maps(F, k):
    """(formula, index map) pairs behind F_k, without canonicalization."""
    out = []
    for phi in F:
        for iota in itertools.product(range(k), repeat=len(phi.free)):
            out.append((phi, iota))
    return out


def conjunction(members: Iterable[PpFormula], free: Sequence[str]) -> PpFormula:
    """Conjunction of formulas over the same free variables, quantifiers renamed apart."""
    exists = []
    atoms = []
    for j, g in enumerate(members):
        m = {v: f"_c{j + 1}_{i + 1}" for i, v in enumerate(g.exists)}
        exists.extend(m.values())
        atoms.extend((s, tuple(m.get(v, v) for v in a)) for s, a in g.atoms)
    return PpFormula(tuple(free), tuple(exists), tuple(atoms))


@dataclass(frozen=True)
class TypeFormula:
    k: int
    members: tuple

    def formula(self) -> PpFormula:
        return conjunction(self.members, std_vars(self.k))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def to_json(self):
        return {"k": self.k, "members": [m.to_json() for m in self.members]}


def type_of(structure: RelationalStructure, tup, F, Fk=None) -> TypeFormula:
    """The members of F_k (k = len(tup)) true at ``tup``."""
    tup = tuple(tup)
    k = len(tup)
    Fk = instantiate_Fk(F, k) if Fk is None else Fk
    return TypeFormula(k, tuple(g for g in Fk if holds_at(structure, g, tup)))


def all_types(F, k) -> Iterable[TypeFormula]:
    """Every (k,F)-type, the empty one included."""
    Fk = instantiate_Fk(F, k)
    _budget.current().check_size(2 ** len(Fk), "types")
    for r in range(len(Fk) + 1):
        for combo in itertools.combinations(Fk, r):
            yield TypeFormula(k, combo)


def project(formula: PpFormula, ell: int) -> PpFormula:
    """Existentially quantify all free variables after the first ``ell``."""
    return PpFormula(formula.free[:ell], formula.free[ell:] + formula.exists, formula.atoms)


def project_types(F, k: int, ell: int) -> list[PpFormula]:
    """F|_ell: every (k,F)-type with its last k-ell variables quantified."""
    if ell > k or ell < 0:
        raise FormulaError(f"projection level {ell} outside 0..{k}")
    seen = {}
    for tau in all_types(F, k):
        seen.setdefault(canonicalize(project(tau.formula(), ell)), None)
    return sorted(seen, key=formula_sort_key)


def closure_union(F, k: int) -> list[PpFormula]:
    seen = {}
    for i in range(k + 1):
        for g in project_types(F, k, i):
            seen.setdefault(g, None)
    return sorted(seen, key=formula_sort_key)


# the (k,F)_q-theory


@dataclass(frozen=True)
class QuasiEquation:
    premise: TypeFormula
    conclusion: tuple  # an atom over x1..xk

    def __str__(self):
        s, a = self.conclusion
        concl = f"{a[0]}={a[1]}" if s == EQ else f"{s}({','.join(a)})"
        prem = " & ".join(str(m) for m in self.premise.members) or "true"
        return f"[{prem}] -> {concl}"


def candidate_conclusions(signature: Signature, k: int) -> list[tuple]:
    xs = std_vars(k)
    out = []
    for name, ar in signature:
        for idx in itertools.product(range(k), repeat=ar):
            out.append((name, tuple(xs[i] for i in idx)))
    for i in range(k):
        for j in range(k):
            out.append((EQ, (xs[i], xs[j])))
    return out


def kFq_theory(template: RelationalStructure, k: int, F) -> list[QuasiEquation]:
    """Every implication (type -> atom) true at all k-tuples of the template."""
    for name, ar in template.signature:
        if ar > k:
            raise FormulaError(f"k={k} is below the arity {ar} of {name!r}")
    Fk = instantiate_Fk(F, k)
    concl = candidate_conclusions(template.signature, k)
    _budget.current().check_size(2 ** len(Fk) * max(len(concl), 1), "theory")
    xs = std_vars(k)
    rows = []
    for tup in itertools.product(range(template.size), repeat=k):
        true_members = frozenset(i for i, g in enumerate(Fk) if holds_at(template, g, tup))
        env = dict(zip(xs, tup))
        true_concl = frozenset(
            j for j, (s, a) in enumerate(concl)
            if (env[a[0]] == env[a[1]] if s == EQ else template.holds(s, tuple(env[v] for v in a))))
        rows.append((true_members, true_concl))
    out = []
    for r in range(len(Fk) + 1):
        for combo in itertools.combinations(range(len(Fk)), r):
            need = frozenset(combo)
            ok = set(range(len(concl)))
            for mem, tc in rows:
                if need <= mem:
                    ok &= tc
            sigma = TypeFormula(k, tuple(Fk[i] for i in combo))
            for j in sorted(ok):
                out.append(QuasiEquation(sigma, concl[j]))
    return out


def theory_contains(template, k, F, premise_members, conclusion) -> bool:
    """Direct check of a single implication against every k-tuple."""
    xs = std_vars(k)
    s, a = conclusion
    for tup in itertools.product(range(template.size), repeat=k):
        if all(holds_at(template, g, tup) for g in premise_members):
            env = dict(zip(xs, tup))
            ok = env[a[0]] == env[a[1]] if s == EQ else template.holds(s, tuple(env[v] for v in a))
            if not ok:
                return False
    return True


# definitions and translation


class PpDefinitionSet:
    """Maps each source symbol to a pp-formula over the target signature.

    The free variables of a definition are its open variables, the quantified
    ones its existential variables.
    """

    def __init__(self, defs: dict, source: Signature | None = None, target: Signature | None = None):
        self.defs = dict(defs)
        self.source = source
        self.target = target
        for r, rho in self.defs.items():
            if source is not None:
                if r not in source:
                    raise FormulaError(f"definition for unknown symbol {r!r}")
                if source.arity(r) != len(rho.free):
                    raise FormulaError(
                        f"definition of {r!r} has {len(rho.free)} free variables, arity is {source.arity(r)}")
            if target is not None:
                rho.check_signature(target)

    def __getitem__(self, r) -> PpFormula:
        try:
            return self.defs[r]
        except KeyError:
            raise FormulaError(f"no definition for symbol {r!r}") from None

    def __contains__(self, r):
        return r in self.defs

    def symbols(self):
        return sorted(self.defs)

    def open_vars(self, r):
        return self.defs[r].free

    def exist_vars(self, r):
        return self.defs[r].exists

    def flat(self, r) -> PpFormula:
        """The quantifier-free matrix of the definition, all variables free."""
        rho = self.defs[r]
        return PpFormula(rho.free + rho.exists, (), rho.atoms)

    def max_open(self):
        return max((len(f.free) for f in self.defs.values()), default=0)

    def to_json(self):
        def sig(x):
            return None if x is None else [{"name": n, "arity": a} for n, a in x]
        return {"source": sig(self.source), "target": sig(self.target),
                "definitions": {r: self.defs[r].to_json() for r in self.symbols()}}


def definitions_from_json(obj) -> PpDefinitionSet:
    """{"source": [...], "target": [...], "definitions": {symbol: formula}}"""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or not isinstance(obj.get("definitions"), dict):
        raise FormulaError("definitions: expected an object with a 'definitions' map")

    def sig(key):
        raw = obj.get(key)
        if raw is None:
            return None
        try:
            return Signature([(d["name"], int(d["arity"])) for d in raw])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormulaError(f"{key}: bad signature entry ({exc})") from None

    defs = {}
    for r, f in obj["definitions"].items():
        try:
            defs[r] = formula_from_json(f)
        except FormulaError as exc:
            raise FormulaError(f"definitions.{r}: {exc}") from None
    return PpDefinitionSet(defs, sig("source"), sig("target"))


def translate_to_target(psi: PpFormula, defs: PpDefinitionSet) -> PpFormula:
    """Replace every relational atom by its definition with fresh quantified variables."""
    exists = list(psi.exists)
    atoms = []
    taken = set(psi.variables())
    counter = itertools.count(1)

    def fresh():
        while True:
            v = f"t{next(counter)}"
            if v not in taken:
                taken.add(v)
                return v

    for s, args in psi.atoms:
        if s == EQ:
            atoms.append((s, args))
            continue
        rho = defs[s]
        m = dict(zip(rho.free, args))
        for v in rho.exists:
            m[v] = fresh()
            exists.append(m[v])
        atoms.extend((t, tuple(m[v] for v in a)) for t, a in rho.atoms)
    return PpFormula(psi.free, tuple(exists), tuple(atoms))
