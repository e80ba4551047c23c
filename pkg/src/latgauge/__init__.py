"""Finite-group lattice gauge theory on box lattices.

Exact desk-scale machinery (enumeration, homomorphism reformulation, knot
decompositions, swapping maps, Peierls bounds, Higgs extensions) plus a
compiled heat-bath sampler for Monte Carlo correlation-decay runs.
"""

from .groups import (
    GroupTable,
    UnitaryRep,
    beta_threshold,
    builtin_group,
    conjugacy_classes,
    delta_G,
    phi_beta,
)
from .lattice import Box, CellComplex, build_complex, spanning_tree
from .gibbs import GibbsSpec, Loop, make_loop

__all__ = [
    "GroupTable",
    "UnitaryRep",
    "beta_threshold",
    "builtin_group",
    "conjugacy_classes",
    "delta_G",
    "phi_beta",
    "Box",
    "CellComplex",
    "build_complex",
    "spanning_tree",
    "GibbsSpec",
    "Loop",
    "make_loop",
]

__version__ = "0.1.0"
