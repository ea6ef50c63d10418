"""Pick the search kernel at import time.

The compiled kernel is used when it was built; ``ANTCSP_PURE=1`` forces the
pure-Python one.  The compiled kernel stores domains in 64-bit masks and
falls back to Python for larger templates or wider constraints.
"""
import os

from . import _pysearch

PySearch = _pysearch.Search
CSearch = None
if os.environ.get("ANTCSP_PURE") != "1":
    try:
        from ._kernel import Search as CSearch
    except ImportError:
        CSearch = None

BACKEND = "cython" if CSearch is not None else "python"


def make_search(n, scopes, cons_rel, tables, domains, limit=-1, dom_size=0, backend=None):
    choice = backend or BACKEND
    if choice == "cython" and CSearch is not None and dom_size <= 64:
        if all(len(sc) <= 64 for sc in scopes):
            return CSearch(n, scopes, cons_rel, tables, domains, limit)
    return PySearch(n, scopes, cons_rel, tables, domains, limit)
