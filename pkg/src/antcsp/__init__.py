"""Finite-template constraint satisfaction: robust satisfiability, implied
constraints, reductions, local consistency and polymorphism search."""
from ._backend import BACKEND
from .budget import BudgetExceeded, budget_scope
from .core import (
    Homomorphism,
    RelationalStructure,
    Signature,
    enumerate_homomorphisms,
    find_homomorphism,
    load_structure,
    quotient,
    structure_from_json,
)

__all__ = [
    "BACKEND",
    "BudgetExceeded",
    "budget_scope",
    "Homomorphism",
    "RelationalStructure",
    "Signature",
    "enumerate_homomorphisms",
    "find_homomorphism",
    "load_structure",
    "quotient",
    "structure_from_json",
]
