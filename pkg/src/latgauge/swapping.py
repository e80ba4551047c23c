"""Split bijections, the pair-swapping involution, and Peierls calculators.

The split bijection Theta identifies a homomorphism whose support lies in
a decomposed plaquette set with the tuple of its per-knot components; it
is realized by walking the decomposition's separator chain, gauge fixing
against a spanning tree adapted to each separator, splitting the
configuration across the separator's two complexes, and re-encoding both
halves. The swapping map T exchanges the component of the knot containing
the second observable's rectangle; it preserves the product measure
exactly, which the calculators here turn into covariance bounds.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .groups import GroupTable, UnitaryRep, class_of, delta_G, phi_beta_table
from .homomorphism import (
    GeneratorBasis,
    Homomorphism,
    gauge_fix,
    psi_of_config,
    solve_support_constraints,
)
from .knots import KnotDecomposition, knot_decomposition
from .lattice import Box, CellComplex, constrained_spanning_tree


class SwapError(ValueError):
    pass


# -- configuration-level split (one separator) -----------------------------------


def split_config(cx: CellComplex, group: GroupTable, config, B: Box):
    """Split sigma in GF(T_B) into sigma1 * sigma2 across the rectangle B.

    sigma1 carries sigma's values on edges lying only in S2(B), sigma2 on
    edges lying only in S2c(B); sigma must vanish on the shared edges
    (those of the boundary layer), which is verified and is an error
    otherwise.
    """
    pieces = cx.rectangle_pieces(B)
    shared = pieces.s2_edges & pieces.s2c_edges
    for eid in shared:
        if config[eid] != group.identity:
            raise SwapError(
                f"configuration is nonidentity on boundary-layer edge {eid}"
            )
    s1 = np.zeros_like(config)
    s2 = np.zeros_like(config)
    for eid in pieces.s2_edges - shared:
        s1[eid] = config[eid]
    for eid in pieces.s2c_edges - shared:
        s2[eid] = config[eid]
    leftovers = set(range(cx.n_edges)) - pieces.s2_edges - pieces.s2c_edges
    for eid in leftovers:
        if config[eid] != group.identity:
            raise SwapError(f"edge {eid} lies in neither side complex")
    return s1, s2


def split_pair(spec_like, config, B: Box, P1, P2):
    """The public split with the full support contract.

    ``spec_like`` needs .complex, .group and a support() method (GibbsSpec
    qualifies). Requires supp(sigma) = P1 u P2 with B well separating
    (P1, P2); returns (sigma1, sigma2) with supp(sigma_i) = P_i.
    """
    cx, group = spec_like.complex, spec_like.group
    P1, P2 = frozenset(P1), frozenset(P2)
    if not cx.well_separates(B, P1, P2):
        raise SwapError("B does not well separate (P1, P2)")
    supp = spec_like.support(config)
    if supp != P1 | P2:
        raise SwapError("support of sigma is not P1 u P2")
    s1, s2 = split_config(cx, group, config, B)
    if spec_like.support(s1) != P1 or spec_like.support(s2) != P2:
        raise SwapError("split supports do not match (P1, P2)")
    return s1, s2


# -- Theta -----------------------------------------------------------------------


class ThetaBijection:
    """The fixed bijection psi <-> (psi_1 .. psi_m) along a decomposition.

    Constrained spanning trees are cached per separator; the construction
    is deterministic, so T built from the same decomposition is well
    defined.
    """

    def __init__(self, basis: GeneratorBasis, group: GroupTable, decomposition: KnotDecomposition):
        self.basis = basis
        self.group = group
        self.decomposition = decomposition
        cx = basis.complex
        self.trees = [
            constrained_spanning_tree(cx, B, root=basis.root)
            for B in decomposition.separators
        ]

    @property
    def m(self) -> int:
        return self.decomposition.m

    def forward(self, psi: Homomorphism) -> tuple[Homomorphism, ...]:
        group = self.group
        cx = self.basis.complex
        allowed = frozenset().union(*self.decomposition.parts) if self.m else frozenset()
        if not psi.support(group) <= allowed:
            raise SwapError("support of psi is not contained in the decomposed set")
        if self.m == 0:
            return ()
        comps = []
        rest = psi
        for i, B in enumerate(self.decomposition.separators):
            sigma = gauge_fix(rest, group, self.trees[i])
            s1, s2 = split_config(cx, group, sigma, B)
            comps.append(psi_of_config(self.basis, group, s1))
            rest = psi_of_config(self.basis, group, s2)
        comps.append(rest)
        for i, comp in enumerate(comps):
            if not comp.support(group) <= self.decomposition.parts[i]:
                raise SwapError(f"component {i} leaks outside its knot")
        return tuple(comps)

    def backward(self, comps) -> Homomorphism:
        comps = list(comps)
        if len(comps) != self.m:
            raise SwapError("wrong number of components")
        if self.m == 0:
            from .homomorphism import trivial_homomorphism

            return trivial_homomorphism(self.basis)
        group = self.group
        rest = comps[-1]
        for i in range(self.m - 2, -1, -1):
            s1 = gauge_fix(comps[i], group, self.trees[i])
            s2 = gauge_fix(rest, group, self.trees[i])
            sigma = group.mult[s1, s2]
            rest = psi_of_config(self.basis, group, sigma)
        return rest


def theta(basis: GeneratorBasis, group: GroupTable, P) -> ThetaBijection:
    """Theta for the knot decomposition of P."""
    decomposition = knot_decomposition(basis.complex, P)
    return ThetaBijection(basis, group, decomposition)


# -- the event E and the swap map T ------------------------------------------------


@dataclass(frozen=True)
class PairState:
    """A pair of homomorphisms with its joint-support knot decomposition."""

    psi1: Homomorphism
    psi2: Homomorphism
    joint_support: frozenset
    decomposition: KnotDecomposition
    j1: int
    j2: int

    @property
    def in_event(self) -> bool:
        return self.j1 != self.j2


def pair_state(
    basis: GeneratorBasis,
    group: GroupTable,
    psi1: Homomorphism,
    psi2: Homomorphism,
    B1: Box,
    B2: Box,
) -> PairState:
    cx = basis.complex
    b1 = cx.plaquette_set_of_box(B1)
    b2 = cx.plaquette_set_of_box(B2)
    if not b1 or not b2:
        raise SwapError("observable rectangles must contain plaquettes")
    joint = psi1.support(group) | psi2.support(group) | b1 | b2
    decomposition = knot_decomposition(cx, joint)
    j1 = decomposition.part_containing(b1)
    j2 = decomposition.part_containing(b2)
    return PairState(psi1, psi2, frozenset(joint), decomposition, j1, j2)


def in_E(basis, group, psi1, psi2, B1: Box, B2: Box) -> bool:
    """True iff B1 and B2 fall in different knots of the joint support."""
    return pair_state(basis, group, psi1, psi2, B1, B2).in_event


def swap_T(basis, group, psi1, psi2, B1: Box, B2: Box):
    """Exchange the knot component containing B2 between the two homomorphisms."""
    state = pair_state(basis, group, psi1, psi2, B1, B2)
    if not state.in_event:
        raise SwapError("pair is not in E(B1, B2)")
    th = ThetaBijection(basis, group, state.decomposition)
    t1 = list(th.forward(psi1))
    t2 = list(th.forward(psi2))
    j = state.j2
    t1[j], t2[j] = t2[j], t1[j]
    return th.backward(t1), th.backward(t2)


def pair_class_multiset(group: GroupTable, *psis) -> Counter:
    """Multiset of nonidentity conjugacy classes of all plaquette images.

    Two pairs with equal multisets have exactly equal unnormalized product
    weights for every beta, so measure preservation is checked without
    floating-point comparisons.
    """
    classes = class_of(group)
    counter: Counter = Counter()
    for psi in psis:
        for p in range(psi.basis.complex.n_plaquettes):
            g = psi.xi_image(p, group)
            if g != group.identity:
                counter[int(classes[g])] += 1
    return counter


# -- covariance and Peierls bounds -------------------------------------------------


def covariance_bound(h1_sup: float, h2_sup: float, p_out: float) -> float:
    """|Cov| <= 2 ||h1|| ||h2|| P(pair outside E)."""
    if h1_sup < 0 or h2_sup < 0:
        raise SwapError("sup norms must be nonnegative")
    if not 0 <= p_out <= 1:
        raise SwapError("p_out must be a probability")
    return 2.0 * h1_sup * h2_sup * p_out


def phi2(
    basis: GeneratorBasis,
    group: GroupTable,
    rep: UnitaryRep,
    beta: float,
    P0,
    P,
    cap: int = 2**20,
) -> float:
    """Exact pair polymer weight: sum over (psi1, psi2) with
    supp(psi1) u supp(psi2) u P0 = P of the product plaquette weights."""
    P0 = frozenset(int(p) for p in P0)
    P = frozenset(int(p) for p in P)
    if not P0 <= P:
        return 0.0
    phis = phi_beta_table(rep, beta)
    sols = solve_support_constraints(basis, group, P, cap)
    entries = []
    for psi in sols:
        supp = set()
        w = 1.0
        for p in P:
            g = psi.xi_image(p, group)
            if g != group.identity:
                supp.add(p)
            w *= float(phis[g])
        entries.append((frozenset(supp), w))
    target = P
    total = 0.0
    for supp1, w1 in entries:
        for supp2, w2 in entries:
            if supp1 | supp2 | P0 == target:
                total += w1 * w2
    return total


def phi2_upper(group: GroupTable, rep: UnitaryRep, beta: float, P0, P) -> float:
    """Closed-form bound 4^|P| |G|^{2|P|} exp(-beta Delta_G |P \\ P0|)."""
    P0 = frozenset(P0)
    P = frozenset(P)
    n = len(P)
    excess = len(P - P0)
    log_val = (
        n * math.log(4.0)
        + 2 * n * math.log(group.order)
        - beta * delta_G(group, rep) * excess
    )
    return math.exp(log_val)


def knot_probability_bound(group, rep, beta: float, P0, K) -> float:
    """Bound on P(K appears in the joint-support decomposition)."""
    return phi2_upper(group, rep, beta, P0, K)


KNOT_COUNT_BASE = 1e24


def percolation_and_theorem_bounds(
    group: GroupTable,
    rep: UnitaryRep,
    beta: float,
    b1_plaquettes: int,
    b2_plaquettes: int,
    L: int,
    f1_sup: float = 1.0,
    f2_sup: float = 1.0,
):
    """Closed-form P(not in E) and covariance bounds of the main theorem.

    Returns (p_out_bound, covariance_bound, below_threshold). Below the
    coupling threshold the formulas are still evaluated (the geometric
    series they come from may then diverge); callers get a flag instead of
    a refusal.
    """
    from .groups import beta_threshold

    delta = delta_G(group, rep)
    m0 = b1_plaquettes + b2_plaquettes
    log_base = math.log(4.0 * KNOT_COUNT_BASE * group.order**2)
    exponent = -(beta / 2.0) * delta * (L - 1)
    log_p = math.log(2.0) + m0 * log_base + exponent
    p_out = math.exp(log_p) if log_p < 709 else math.inf
    log_cov = math.log(4.0) + m0 * log_base + exponent
    if f1_sup > 0 and f2_sup > 0:
        log_cov += math.log(f1_sup) + math.log(f2_sup)
        cov = math.exp(log_cov) if log_cov < 709 else math.inf
    else:
        cov = 0.0
    return p_out, cov, beta < beta_threshold(group, rep)
