"""Reduction results with element and hyperedge provenance."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..core import RelationalStructure

OPEN = "open"
EXISTENTIAL = "exists"


@dataclass
class ReductionOutput:
    """A produced structure plus where each element and hyperedge came from.

    ``element_provenance[e]`` is ``("open", source_element)`` or
    ``("exists", source_hyperedge, position)``.  ``hyperedge_provenance`` lists
    ``(symbol, tuple, source_hyperedge, conjunct)`` in generation order, so a
    hyperedge produced twice appears twice.
    """

    structure: RelationalStructure
    element_provenance: list
    hyperedge_provenance: list
    source_edges: list = field(default_factory=list)   # (symbol, tuple) per source hyperedge id
    clauses: object = None        # SignedClauseInstance view, for SAT outputs
    pre_map: list | None = None   # quotient applied to the source before reducing
    copy_map: list | None = None  # template element -> element of an adjoined template copy

    def opens(self) -> list[int]:
        return [e for e, p in enumerate(self.element_provenance) if p[0] == OPEN]

    def existentials(self) -> list[int]:
        return [e for e, p in enumerate(self.element_provenance) if p[0] == EXISTENTIAL]

    def open_of(self) -> dict:
        """source element -> produced element"""
        return {p[1]: e for e, p in enumerate(self.element_provenance) if p[0] == OPEN}

    def family(self, source_edge: int) -> list:
        """Produced hyperedges replacing one source hyperedge, in conjunct order."""
        rows = [(c, s, t) for s, t, src, c in self.hyperedge_provenance if src == source_edge]
        return [(s, t) for c, s, t in sorted(rows)]

    def to_json(self):
        out = self.structure.to_json()
        out["element_provenance"] = [list(p) for p in self.element_provenance]
        out["hyperedge_provenance"] = [[s, list(t), src, c] for s, t, src, c in self.hyperedge_provenance]
        if self.pre_map is not None:
            out["pre_map"] = list(self.pre_map)
        if self.copy_map is not None:
            out["copy_map"] = list(self.copy_map)
        return out
