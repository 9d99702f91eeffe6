"""Contextuality of Pauli measurements on qudits: covers, empirical models,
Wigner functions, exact LP verdicts and the topology of context complexes."""

__version__ = "0.1.0"

from .gfp import PrimeConfig, Subspace, span
from .presheaf import ContextCover, empirical_model, global_sections, make_cover
from .covers import load_cover, named_cover
from .quantum import DensityMatrix, named_state, wigner

__all__ = [
    "PrimeConfig",
    "Subspace",
    "span",
    "ContextCover",
    "make_cover",
    "empirical_model",
    "global_sections",
    "named_cover",
    "load_cover",
    "DensityMatrix",
    "named_state",
    "wigner",
]
