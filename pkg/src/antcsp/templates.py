"""Standard small structures used as templates and test instances."""
import itertools

from .core import RelationalStructure, Signature

GRAPH = Signature([("E", 2)])


def graph(n, edges, symmetric=True, labels=None) -> RelationalStructure:
    tuples = set()
    for a, b in edges:
        tuples.add((a, b))
        if symmetric:
            tuples.add((b, a))
    return RelationalStructure(GRAPH, n, {"E": tuples}, labels)


def complete_graph(n) -> RelationalStructure:
    return graph(n, [(a, b) for a in range(n) for b in range(n) if a != b])


def cycle(n) -> RelationalStructure:
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n) -> RelationalStructure:
    return graph(n, [(i, i + 1) for i in range(n - 1)])


def loop() -> RelationalStructure:
    return graph(1, [(0, 0)])


ONE_IN_THREE_SIG = Signature([("r", 3)])


def one_in_three() -> RelationalStructure:
    return RelationalStructure(ONE_IN_THREE_SIG, 2, {"r": [(1, 0, 0), (0, 1, 0), (0, 0, 1)]})


def two_plus() -> RelationalStructure:
    """{0,1} with the 1-in-3 relation r and the total 4-ary relation s."""
    sig = Signature([("r", 3), ("s", 4)])
    return RelationalStructure(sig, 2, {"r": [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
                                        "s": list(itertools.product((0, 1), repeat=4))})


def sat_symbol(signs) -> str:
    """Relation name for a clause whose i-th literal is negated when signs[i] is 1."""
    return f"R{len(signs)}_" + "".join("1" if s else "0" for s in signs)


def sat_signature(n) -> Signature:
    return Signature([(sat_symbol(s), n) for s in itertools.product((0, 1), repeat=n)])


def sat_template(n) -> RelationalStructure:
    """Boolean template of nSAT: one relation per negation pattern."""
    rels = {}
    for signs in itertools.product((0, 1), repeat=n):
        rels[sat_symbol(signs)] = [t for t in itertools.product((0, 1), repeat=n)
                                   if any(v != s for v, s in zip(t, signs))]
    return RelationalStructure(sat_signature(n), 2, rels)


def linear_template(modulus=2, g=1) -> RelationalStructure:
    """Z_m with r_h = {x+y-z=h} and s_h = {x+y+z=h} for h in {0, g}."""
    m = modulus
    sig = Signature([("r_0", 3), ("r_g", 3), ("s_0", 3), ("s_g", 3)])
    rels = {}
    for name, sign, h in (("r_0", -1, 0), ("r_g", -1, g), ("s_0", 1, 0), ("s_g", 1, g)):
        rels[name] = [(x, y, z) for x in range(m) for y in range(m) for z in range(m)
                      if (x + y + sign * z - h) % m == 0]
    return RelationalStructure(sig, m, rels)


def signed_symbol(pattern) -> str:
    return "r_" + "".join("1" if s else "0" for s in pattern)


def one_in_three_signed() -> RelationalStructure:
    """1-in-3 with a relation per negation pattern: r_p(x) iff x XOR p is 1-in-3."""
    base = {(1, 0, 0), (0, 1, 0), (0, 0, 1)}
    sig = Signature([(signed_symbol(p), 3) for p in itertools.product((0, 1), repeat=3)])
    rels = {}
    for p in itertools.product((0, 1), repeat=3):
        rels[signed_symbol(p)] = [t for t in itertools.product((0, 1), repeat=3)
                                  if tuple(a ^ b for a, b in zip(t, p)) in base]
    return RelationalStructure(sig, 2, rels)


def constant_symbol(a) -> str:
    return f"is{a}"


def with_constants(template: RelationalStructure) -> RelationalStructure:
    """The template with a singleton unary relation {a} added for every element a."""
    sig = Signature(list(template.signature) + [(constant_symbol(a), 1) for a in range(template.size)])
    rels = {name: template.relation(name) for name, _ in template.signature}
    for a in range(template.size):
        rels[constant_symbol(a)] = [(a,)]
    return RelationalStructure(sig, template.size, rels, template.labels)


def split_constants(signature: Signature, size: int):
    """(base signature, {symbol: element}) for a signature produced by with_constants."""
    consts = {constant_symbol(a): a for a in range(size)}
    base = [(n, ar) for n, ar in signature if n not in consts]
    return Signature(base), {n: consts[n] for n, _ in signature if n in consts}
