"""Time the compiled search kernel against the pure-Python one.

Run from the repository root:  python3 benchmarks/bench_kernel.py [--repeat N]
Each workload is solved with both kernels; solution counts must agree.
"""
import argparse
import random
import sys
import time

from antcsp._backend import CSearch
from antcsp.core import enumerate_homomorphisms
from antcsp.templates import complete_graph, cycle, one_in_three, sat_template
from antcsp.reductions import SignedClauseInstance, gottlob_amplify


def _random_graph(rng, n, p):
    from antcsp.templates import graph
    return graph(n, [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p])


def workloads():
    rng = random.Random(0)
    yield "C9 -> K3 (count)", cycle(9), complete_graph(3)
    yield "G(11, .25) -> K3 (count)", _random_graph(rng, 11, 0.25), complete_graph(3)
    yield "C10 -> K4 (count)", cycle(10), complete_graph(4)
    src = SignedClauseInstance(3, [((0, 0), (1, 1), (2, 0)), ((0, 1), (1, 0), (2, 1))])
    amp = gottlob_amplify(src, 1)
    yield "amplified 6SAT (count)", amp.to_structure(), sat_template(6)
    yield "chain of 1-in-3 (count)", _one3_chain(10), one_in_three()


def _one3_chain(length):
    from antcsp.core import RelationalStructure
    tuples = [(2 * i, 2 * i + 1, 2 * i + 2) for i in range(length)]
    return RelationalStructure(one_in_three().signature, 2 * length + 1, {"r": tuples})


def count(inst, tmpl, backend):
    return sum(1 for _ in enumerate_homomorphisms(inst, tmpl, backend=backend))


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if CSearch is None:
        print("compiled kernel not available (not built, or ANTCSP_PURE=1); nothing to compare")
        return 1
    print(f"{'workload':28} {'count':>10} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, inst, tmpl in workloads():
        tp, np_ = timed(lambda: count(inst, tmpl, "python"), args.repeat)
        tc, nc = timed(lambda: count(inst, tmpl, "cython"), args.repeat)
        if np_ != nc:
            print(f"{name}: kernels disagree ({np_} vs {nc})")
            return 2
        print(f"{name:28} {nc:>10} {tp:>10.4f} {tc:>10.4f} {tp / max(tc, 1e-9):>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
