"""Random instance generators shared by the tests."""
import itertools
import random

from antcsp.core import RelationalStructure
from antcsp.reductions.sat import SignedClauseInstance


def random_structure(rng: random.Random, signature, n, max_tuples=None, density=None):
    rels = {}
    for name, ar in signature:
        pool = list(itertools.product(range(n), repeat=ar)) if n else []
        if not pool:
            rels[name] = []
            continue
        if density is not None:
            rels[name] = [t for t in pool if rng.random() < density]
        else:
            cap = len(pool) if max_tuples is None else min(max_tuples, len(pool))
            rels[name] = rng.sample(pool, rng.randint(0, cap))
    return RelationalStructure(signature, n, rels)


def random_graph(rng, n, p=0.5, loops=False):
    edges = set()
    for a in range(n):
        for b in range(a if loops else a + 1, n):
            if rng.random() < p:
                edges.add((a, b))
                edges.add((b, a))
    from antcsp.templates import GRAPH
    return RelationalStructure(GRAPH, n, {"E": edges})


def random_clauses(rng, nvars, nclauses, width=3, distinct=False):
    clauses = []
    for _ in range(nclauses):
        if distinct:
            vs = rng.sample(range(nvars), width)
        else:
            vs = [rng.randrange(nvars) for _ in range(width)]
        clauses.append(tuple((v, rng.randint(0, 1)) for v in vs))
    return SignedClauseInstance(nvars, clauses)


def all_clause_instances(nvars, max_clauses, width=3):
    """Every instance with up to max_clauses clauses (as sorted multisets)."""
    lits = [(v, s) for v in range(nvars) for s in (0, 1)]
    clauses = list(itertools.product(lits, repeat=width))
    for m in range(max_clauses + 1):
        for combo in itertools.combinations_with_replacement(range(len(clauses)), m):
            yield SignedClauseInstance(nvars, [clauses[i] for i in combo])
