import random

import pytest

from antcsp import BACKEND
from antcsp._backend import CSearch
from antcsp.core import enumerate_homomorphisms
from antcsp.templates import GRAPH, complete_graph, cycle, one_in_three, ONE_IN_THREE_SIG

from _gen import random_structure

needs_kernel = pytest.mark.skipif(CSearch is None, reason="compiled kernel not built")


def test_backend_name():
    assert BACKEND in ("cython", "python")


@needs_kernel
@pytest.mark.parametrize("seed", range(40))
def test_kernels_agree(seed):
    rng = random.Random(seed)
    if seed % 2:
        tmpl, sig = rng.choice([complete_graph(2), complete_graph(3), cycle(5)]), GRAPH
    else:
        tmpl, sig = one_in_three(), ONE_IN_THREE_SIG
    inst = random_structure(rng, sig, rng.randint(1, 7), max_tuples=6)
    a = [h.mapping for h in enumerate_homomorphisms(inst, tmpl, backend="cython")]
    b = [h.mapping for h in enumerate_homomorphisms(inst, tmpl, backend="python")]
    assert a == b
