"""Claw formulas: opened definitions (talon) joined with a translated type (wrist).

A claw of arity k and bound l is built from at most k copies of definition
matrices, whose open variables may be glued together, plus an (l',F)-type
(l' <= l) translated to the target signature whose free variables may be glued
onto open talon variables; then everything but k variables is quantified.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import budget as _budget
from .formulas import (EQ, FormulaError, PpDefinitionSet, PpFormula, TypeFormula, all_types,
                       canonicalize, formula_sort_key, instantiate_Fk, project_types,
                       translate_to_target)


def set_partitions(items):
    """All partitions of a list, as lists of blocks, in a fixed order."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


@dataclass(frozen=True)
class ClawFormula:
    talon: tuple          # symbols of the opened definitions, one per copy
    glue: tuple           # open-variable blocks: tuple of tuples of (copy, position)
    wrist: TypeFormula
    wrist_glue: tuple     # per wrist variable: block index it is glued to, or None
    free: tuple           # the unquantified variables, by name

    def formula(self, defs: PpDefinitionSet) -> PpFormula:
        names = {}
        for b, block in enumerate(self.glue):
            for slot in block:
                names[slot] = f"o{b + 1}"
        atoms = []
        talon_vars = {f"o{b + 1}" for b in range(len(self.glue))}
        for i, r in enumerate(self.talon):
            rho = defs[r]
            m = {v: names[(i, j)] for j, v in enumerate(rho.free)}
            for j, v in enumerate(rho.exists):
                m[v] = f"e{i + 1}_{j + 1}"
                talon_vars.add(m[v])
            atoms.extend((s, tuple(m[v] for v in a)) for s, a in rho.atoms)
        wvars = []
        for j, b in enumerate(self.wrist_glue):
            wvars.append(f"o{b + 1}" if b is not None else f"w{j + 1}")
        sigma = translate_to_target(self.wrist.formula(), defs)
        ren = dict(zip(sigma.free, wvars))
        for v in sigma.exists:
            ren[v] = f"q{v}"
        atoms.extend((s, tuple(ren[v] for v in a)) for s, a in sigma.atoms)
        everything = sorted(talon_vars | set(wvars))
        exists = [v for v in everything if v not in self.free] + [ren[v] for v in sigma.exists]
        return PpFormula(self.free, tuple(exists), tuple(atoms))

    def to_json(self, defs):
        return {"talon": list(self.talon), "glue": [[list(s) for s in b] for b in self.glue],
                "wrist": self.wrist.to_json(), "wrist_glue": list(self.wrist_glue),
                "free": list(self.free), "formula": self.formula(defs).to_json()}


def _wrists(F, ell, projected):
    for lp in range(ell + 1):
        if projected:
            members = instantiate_Fk(project_types(F, ell, lp), lp)
            _budget.current().check_size(2 ** len(members), "wrist types")
            for r in range(len(members) + 1):
                for combo in itertools.combinations(members, r):
                    yield TypeFormula(lp, combo)
        else:
            yield from all_types(F, lp)


def enumerate_claws(defs: PpDefinitionSet, F, k: int, ell: int, projected=False):
    """Every claw construction (not deduplicated); see claw_formulas."""
    if k < 0 or ell < 0:
        raise FormulaError("k and the bound must be non-negative")
    syms = defs.symbols()
    wrists = list(_wrists(F, ell, projected))
    for kp in range(k + 1):
        for talon in itertools.combinations_with_replacement(syms, kp):
            slots = [(i, j) for i, r in enumerate(talon) for j in range(len(defs[r].free))]
            for part in set_partitions(slots):
                glue = tuple(tuple(b) for b in part)
                opens = [f"o{b + 1}" for b in range(len(glue))]
                exist = [f"e{i + 1}_{j + 1}" for i, r in enumerate(talon)
                         for j in range(len(defs[r].exists))]
                for sigma in wrists:
                    for wg in itertools.product([None] + list(range(len(glue))), repeat=sigma.k):
                        pool = opens + exist + [f"w{j + 1}" for j, b in enumerate(wg) if b is None]
                        if len(pool) < k:
                            continue
                        for free in itertools.combinations(pool, k):
                            yield ClawFormula(talon, glue, sigma, wg, free)


def claw_formulas(defs: PpDefinitionSet, F, k: int, ell: int, cap=None, projected=False) -> list[PpFormula]:
    """Distinct claw formulas (canonical forms) of arity k and bound ell.

    ``cap`` bounds the number of constructions visited (budget exceeded past
    it).  ``projected`` draws wrists from (l',F|l')-types only.
    """
    out = {}
    b = _budget.current()
    for i, c in enumerate(enumerate_claws(defs, F, k, ell, projected)):
        b.charge(1)
        if cap is not None and i >= cap:
            raise _budget.BudgetExceeded(cap, i + 1)
        out.setdefault(canonicalize(c.formula(defs)), None)
    return sorted(out, key=formula_sort_key)


# membership


def _instances(phi_atoms, pattern: PpFormula):
    """Ways to read ``pattern`` (free + quantified variables) inside a set of atoms.

    Yields (mapping, covered atom indices); quantified pattern variables go to
    distinct variables different from the images of the free ones.
    """
    atoms = list(phi_atoms)
    patoms = list(pattern.atoms)
    if not patoms:
        return

    def rec(i, m, used):
        if i == len(patoms):
            imgs_free = {m[v] for v in pattern.free if v in m}
            imgs_ex = [m[v] for v in pattern.exists if v in m]
            if len(set(imgs_ex)) != len(imgs_ex) or set(imgs_ex) & imgs_free:
                return
            yield dict(m), frozenset(used)
            return
        s, args = patoms[i]
        for idx, (t, targs) in enumerate(atoms):
            if t != s or len(targs) != len(args):
                continue
            m2 = dict(m)
            ok = True
            for v, w in zip(args, targs):
                if m2.setdefault(v, w) != w:
                    ok = False
                    break
            if ok:
                yield from rec(i + 1, m2, used | {idx})

    yield from rec(0, {}, frozenset())


def _covers(atoms, patterns, private_ok):
    """Partition-like covers of ``atoms`` by instances of ``patterns``.

    Each instance's quantified variables must be private: they occur only in
    atoms of that instance, and ``private_ok(var)`` must hold.  Yields lists of
    (pattern index, mapping).
    """
    atoms = list(atoms)
    occ = {}
    for idx, (_, args) in enumerate(atoms):
        for v in args:
            occ.setdefault(v, set()).add(idx)

    def rec(covered, acc):
        left = [i for i in range(len(atoms)) if i not in covered]
        if not left:
            yield list(acc)
            return
        target = left[0]
        for pi, pat in enumerate(patterns):
            for m, used in _instances(atoms, pat):
                if target not in used:
                    continue
                if any(not private_ok(m[v]) or not occ.get(m[v], set()) <= used for v in pat.exists):
                    continue
                acc.append((pi, m))
                yield from rec(covered | used, acc)
                acc.pop()

    yield from rec(frozenset(), [])


def is_claw(phi: PpFormula, defs: PpDefinitionSet, F, k: int, ell: int) -> bool:
    """Decide membership by parsing phi back into definition copies and a type.

    The atoms are covered by definition instances whose quantified variables
    are private; at most k of them form the talon, the rest translate a
    conjunction of instances of F whose variables number at most ell.
    """
    if len(phi.free) != k:
        return False
    if any(s == EQ for s, _ in phi.atoms):
        return False
    quantified = set(phi.exists)
    flats = [defs[r] for r in defs.symbols()]
    names = defs.symbols()
    all_vars = set(phi.variables())
    F = list(F)
    for cover in _covers(phi.atoms, flats, lambda v: True):
        n = len(cover)
        for tk in range(min(k, n) + 1):
            for talon in itertools.combinations(range(n), tk):
                tset = set(talon)
                talon_ex = {m[v] for i, (pi, m) in enumerate(cover) if i in tset
                            for v in flats[pi].exists}
                wrist_atoms = []
                wrist_ex = set()
                bad = False
                for i, (pi, m) in enumerate(cover):
                    if i in tset:
                        continue
                    rho = flats[pi]
                    ex = {m[v] for v in rho.exists}
                    # translation existentials are quantified and untouched by the talon
                    if not ex <= quantified:
                        bad = True
                        break
                    wrist_ex |= ex
                    args = tuple(m[v] for v in rho.free)
                    if set(args) & talon_ex:
                        bad = True
                        break
                    wrist_atoms.append((names[pi], args))
                if bad:
                    continue
                if _wrist_is_type(wrist_atoms, F, ell, all_vars - talon_ex - wrist_ex, quantified,
                                  talon_ex, cover, tset, flats):
                    return True
    return False


def _wrist_is_type(wrist_atoms, F, ell, candidates, quantified, talon_ex, cover, tset, flats):
    """Cover the wrist's source-level atoms by instances of F over <= ell variables."""
    talon_open = {m[v] for i, (pi, m) in enumerate(cover) if i in tset for v in flats[pi].free}
    # variables not in any talon copy belong to the wrist
    loose = {v for v in candidates if v not in talon_open}
    if not wrist_atoms:
        return len(loose) <= ell
    fpats = [f for f in F if f.atoms]
    talon_vars = talon_ex | talon_open
    for fcover in _covers(wrist_atoms, fpats, lambda v: v in quantified and v not in talon_vars):
        private = {m[v] for pi, m in fcover for v in fpats[pi].exists}
        wvars = {a for _, args in wrist_atoms for a in args} - private
        if len(wvars | (loose - private)) <= ell:
            return True
    return False
