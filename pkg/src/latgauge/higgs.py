"""Gauge-Higgs extensions: circle-valued charges coupled to the gauge field.

Two regimes with different swap constructions:

* Large coupling (ordered charges): configurations (sigma, phi) with phi a
  map into the quotient H/H_t of the charge group by the trace kernel.
  Excitations are edges where phi jumps or sigma is nonidentity; swapping
  exchanges the content of the vortex holding the second observable box,
  with phase boundaries transported by explicit charge-flip maps.
  The Hamiltonian here counts both orientations of every cell, matching
  the per-edge constant c_frak = 2 max Re[a chi(b) - chi(1)] in its bound.

* Small coupling: the charge interaction is expanded in integer currents
  I(e) >= 0 per unoriented edge, giving reduced configurations
  (psi, phi, I) whose weight is a gauge-fiber average. The per-edge factor
  is (kappa w_e)^{I(e)} / I(e)! with w_e = 2 Re[phi_x chi(sigma_e)
  phi_y^-1] + c, so marginalizing the current recovers exp(kappa w_e)
  exactly. The gauge part stays the single-orientation plaquette weight
  phi_beta, meshing with the pure-gauge machinery: trivial currents reduce
  the swap to the knot-level map T.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .groups import GroupTable, UnitaryRep, phi_beta_table
from .homomorphism import (
    GeneratorBasis,
    Homomorphism,
    gauge_fix,
    psi_of_config,
    solve_support_constraints,
)
from .knots import KnotDecomposition, knot_decomposition, vortex_decomposition
from .lattice import Box, CellComplex
from .swapping import ThetaBijection

SCALAR_TOL = 1e-9


class HiggsError(ValueError):
    pass


@dataclass(frozen=True)
class QuotientCharges:
    """The cyclic quotient H/H_t as unit-circle coset representatives.

    H is cyclic of order ``h_order`` inside the circle; H_t collects the
    circle elements realized by scalar representation matrices. The
    representatives are the first q powers of exp(2 pi i / h), a transversal
    of H_t. The key property (a charge mismatch or a nonidentity gauge
    element is always visible in the trace) is validated exhaustively at
    construction.
    """

    h_order: int
    ht_order: int
    order: int
    values: np.ndarray  # complex128, the coset representatives

    def value(self, k: int) -> complex:
        return complex(self.values[k])

    def mul(self, a: int, b: int) -> int:
        # Used only for the order-2 quotient flip algebra.
        return (a + b) % self.order

    def inv(self, a: int) -> int:
        return (-a) % self.order


def quotient_by_Ht(h_order: int, group: GroupTable, rep: UnitaryRep) -> QuotientCharges:
    """Compute H_t = {h in H : rho(g) = h I for some g} and return H/H_t.

    Raises HiggsError when the quotient is trivial (the model degenerates:
    a charge flip can be absorbed into the gauge field) or when the key
    property fails for the representation.
    """
    if h_order < 2:
        raise HiggsError("charge group must have order >= 2")
    omega = cmath.exp(2j * math.pi / h_order)
    ht = set()
    eye = np.eye(rep.dim)
    for g in range(group.order):
        m = rep.matrices[g]
        scalar = m[0, 0]
        if np.allclose(m, scalar * eye, atol=SCALAR_TOL):
            for k in range(h_order):
                if abs(omega**k - scalar) < SCALAR_TOL:
                    ht.add(k)
    # H_t is a subgroup of Z_h: close under addition.
    ht_sub = {0}
    frontier = set(ht)
    while frontier:
        new = set()
        for a in ht_sub | frontier:
            for b in frontier:
                c = (a + b) % h_order
                if c not in ht_sub and c not in frontier:
                    new.add(c)
        ht_sub |= frontier
        frontier = new
    ht_order = len(ht_sub)
    q = h_order // ht_order
    if q == 1:
        raise HiggsError("H/H_t is trivial: the Higgs charge is invisible")
    values = np.array([omega**j for j in range(q)])
    quotient = QuotientCharges(h_order, ht_order, q, values)
    _validate_key_property(quotient, group, rep)
    return quotient


def _validate_key_property(quotient: QuotientCharges, group, rep) -> None:
    d = float(np.real(rep.character[0]))
    for a in range(quotient.order):
        for b in range(quotient.order):
            ratio = quotient.value(a) * quotient.value(b).conjugate()
            for g in range(group.order):
                val = ratio * complex(rep.character[g])
                if abs(val - d) < SCALAR_TOL and not (a == b and g == 0):
                    raise HiggsError(
                        f"key property fails: charges ({a},{b}) with gauge {g} "
                        "mimic the vacuum trace"
                    )


@dataclass(frozen=True)
class HiggsConfig:
    """A gauge field plus a vertex charge field (quotient indices)."""

    sigma: np.ndarray  # int32 per positive edge
    phi: np.ndarray  # int8 per vertex, index into QuotientCharges


def excited_edges(cx: CellComplex, config: HiggsConfig) -> frozenset:
    out = []
    for eid in range(cx.n_edges):
        x, y = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        if config.sigma[eid] != 0 or config.phi[x] != config.phi[y]:
            out.append(eid)
    return frozenset(out)


def higgs_support(cx: CellComplex, config: HiggsConfig) -> frozenset:
    ee = excited_edges(cx, config)
    out = set()
    for eid in ee:
        out.update(cx.edge_plaquettes[eid])
    return frozenset(out)


def higgs_hamiltonian(
    cx: CellComplex,
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    config: HiggsConfig,
    beta: float,
    kappa: float,
) -> float:
    """Gauge + charge energy, counting both orientations of each cell.

    Always <= 0, with equality exactly at sigma = 1, phi constant.
    """
    chi = rep.character
    d = float(np.real(chi[0]))
    gauge = 0.0
    mult = group.mult
    inv = group.inv
    for p in range(cx.n_plaquettes):
        g = 0
        for eid, sign in zip(cx.plq_loop_edges[p], cx.plq_loop_signs[p]):
            v = config.sigma[eid]
            g = mult[g, v if sign > 0 else inv[v]]
        gauge += 2.0 * (float(np.real(chi[g])) - d)
    charge = 0.0
    for eid in range(cx.n_edges):
        x, y = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        val = (
            quotient.value(int(config.phi[x]))
            * complex(chi[int(config.sigma[eid])])
            * quotient.value(int(config.phi[y])).conjugate()
        )
        charge += 2.0 * (val.real - d)
    return beta * gauge + kappa * charge


# -- phase boundaries (order-2 quotient) ---------------------------------------


def charge_jump_edges(cx: CellComplex, phi) -> frozenset:
    return frozenset(
        eid
        for eid in range(cx.n_edges)
        if phi[int(cx.edge_tail[eid])] != phi[int(cx.edge_head[eid])]
    )


def phase_boundaries(cx: CellComplex, phi) -> list[frozenset]:
    """Connected components of the charge-jump edge set.

    Adjacency is sharing a plaquette, the edge-level counterpart of the
    3-cell adjacency used for vortices. Deterministic ordering by least
    edge index.
    """
    jumps = sorted(charge_jump_edges(cx, phi))
    parent = {e: e for e in jumps}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    jumpset = set(jumps)
    for e in jumps:
        for p in cx.edge_plaquettes[e]:
            for f in cx.plq_loop_edges[p]:
                f = int(f)
                if f in jumpset and f != e:
                    ra, rb = find(e), find(f)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, set] = {}
    for e in jumps:
        comps.setdefault(find(e), set()).add(e)
    return [frozenset(comps[r]) for r in sorted(comps)]


def flip_map(cx: CellComplex, quotient: QuotientCharges, phi, selected) -> np.ndarray:
    """A vertex flip chi such that phi*chi keeps exactly the unselected
    boundaries. Order-2 quotient only.

    chi must jump across every selected-boundary edge and stay constant
    across all other edges; the unique 2-coloring (up to global flip) is
    found by BFS and anchored at vertex 0. An inconsistent selection (not
    a union of whole components, or a geometrically non-flippable set)
    raises HiggsError.
    """
    if quotient.order != 2:
        raise HiggsError("flip maps are defined for an order-2 quotient")
    selected_edges = set()
    boundaries = set(map(frozenset, phase_boundaries(cx, phi)))
    for b in selected:
        b = frozenset(b)
        if b not in boundaries:
            raise HiggsError("selected set is not a union of whole phase boundaries")
        selected_edges |= b
    chi = np.full(cx.n_vertices, -1, dtype=np.int8)
    chi[0] = 0
    stack = [0]
    adj = [[] for _ in range(cx.n_vertices)]
    for eid in range(cx.n_edges):
        x, y = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        flip = 1 if eid in selected_edges else 0
        adj[x].append((y, flip))
        adj[y].append((x, flip))
    while stack:
        v = stack.pop()
        for w, flip in adj[v]:
            want = (chi[v] + flip) % 2
            if chi[w] == -1:
                chi[w] = want
                stack.append(w)
            elif chi[w] != want:
                raise HiggsError("selected boundaries cannot be removed by a flip")
    return chi


# -- large-kappa swap -------------------------------------------------------------


def _boundary_vortex(cx, boundary_edges, parts) -> int:
    """Index of the vortex containing the plaquette star of a boundary."""
    star = set()
    for e in boundary_edges:
        star.update(cx.edge_plaquettes[e])
    owners = {i for i, part in enumerate(parts) for p in star if p in part}
    if len(owners) != 1:
        raise HiggsError("phase boundary straddles vortices")
    return owners.pop()


def higgs_swap_large_kappa(
    cx: CellComplex,
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    c1: HiggsConfig,
    c2: HiggsConfig,
    B1: Box,
    B2: Box,
):
    """Exchange the vortex content around B2 between two configurations.

    Requires B1 and B2 to lie in distinct vortices of the joint support;
    raises HiggsError otherwise. The gauge fields are exchanged on the
    edges of the B2 vortex; the charge fields exchange their phase
    boundaries there via flip maps.
    """
    b1 = cx.plaquette_set_of_box(B1)
    b2 = cx.plaquette_set_of_box(B2)
    joint = higgs_support(cx, c1) | higgs_support(cx, c2) | b1 | b2
    vortices = vortex_decomposition(cx, joint)

    def owner(plaqs):
        owners = {i for i, v in enumerate(vortices) for p in plaqs if p in v}
        if len(owners) != 1:
            raise HiggsError("observable box straddles vortices")
        return owners.pop()

    v1, v2 = owner(b1), owner(b2)
    if v1 == v2:
        raise HiggsError("B1 and B2 lie in the same vortex")
    v2_edges = set()
    for p in vortices[v2]:
        v2_edges.update(int(e) for e in cx.plq_loop_edges[p])

    sigma1 = c1.sigma.copy()
    sigma2 = c2.sigma.copy()
    for e in v2_edges:
        sigma1[e], sigma2[e] = c2.sigma[e], c1.sigma[e]

    def boundaries_in_v2(phi):
        out = []
        for b in phase_boundaries(cx, phi):
            if _boundary_vortex(cx, b, vortices) == v2:
                out.append(b)
        return out

    chi1 = flip_map(cx, quotient, c1.phi, boundaries_in_v2(c1.phi))
    chi2 = flip_map(cx, quotient, c2.phi, boundaries_in_v2(c2.phi))
    # phi1 * chi1 * chi2^-1: in the order-2 quotient all flips are their own
    # inverses, so this is an xor of flip patterns.
    phi1 = (c1.phi + chi1 + chi2) % 2
    phi2 = (c2.phi + chi2 + chi1) % 2
    return HiggsConfig(sigma1, phi1.astype(np.int8)), HiggsConfig(
        sigma2, phi2.astype(np.int8)
    )


# -- large-kappa polymer function and bound ---------------------------------------


def interior_edges(cx: CellComplex, P) -> list[int]:
    """Edges whose entire plaquette star lies inside P (the only edges a
    configuration supported in P may excite)."""
    P = frozenset(P)
    return [
        e
        for e in range(cx.n_edges)
        if cx.edge_plaquettes[e] and set(cx.edge_plaquettes[e]) <= P
    ]


def _phi_patterns(cx: CellComplex, free_edges, quotient):
    """All charge fields constant on the components of the lattice minus
    ``free_edges``; yields int8 arrays."""
    parent = list(range(cx.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    free = set(free_edges)
    for eid in range(cx.n_edges):
        if eid in free:
            continue
        x, y = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)
    roots = sorted({find(v) for v in range(cx.n_vertices)})
    for assignment in product(range(quotient.order), repeat=len(roots)):
        by_root = dict(zip(roots, assignment))
        yield np.array([by_root[find(v)] for v in range(cx.n_vertices)], dtype=np.int8)


def higgs_phi2_large(
    cx: CellComplex,
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    P0,
    P,
    beta: float,
    kappa: float,
    cap: int = 200_000,
) -> float:
    """Exhaustive pair polymer weight for the ordered-charge model.

    Sums exp[H(C1)] exp[H(C2)] over configuration pairs whose joint support
    (with P0 adjoined) is exactly P, each config obeying the positive-
    majority charge constraint. Only edges interior to P can be excited,
    which keeps the enumeration finite; ``cap`` guards the blowup.
    """
    P0 = frozenset(int(p) for p in P0)
    P = frozenset(int(p) for p in P)
    if not P0 <= P:
        return 0.0
    edges = interior_edges(cx, P)
    n_sigma = group.order ** len(edges)
    if n_sigma > cap:
        raise HiggsError(f"|G|^{len(edges)} = {n_sigma} exceeds cap {cap}")
    entries = []
    n_half = cx.n_vertices / 2.0
    for phi in _phi_patterns(cx, interior_edges(cx, P), quotient):
        # positive majority: quotient value +1 must strictly dominate
        if quotient.order == 2 and (cx.n_vertices - phi.sum()) <= n_half:
            continue
        for sigma_vals in product(range(group.order), repeat=len(edges)):
            sigma = np.zeros(cx.n_edges, dtype=np.int32)
            for e, v in zip(edges, sigma_vals):
                sigma[e] = v
            config = HiggsConfig(sigma, phi)
            supp = higgs_support(cx, config)
            if not supp <= P:
                continue
            h = higgs_hamiltonian(cx, group, rep, quotient, config, beta, kappa)
            entries.append((supp, math.exp(h)))
            if len(entries) > cap:
                raise HiggsError(f"configuration family exceeds cap {cap}")
    buckets: dict[frozenset, float] = {}
    for supp, w in entries:
        buckets[supp] = buckets.get(supp, 0.0) + w
    total = 0.0
    for s1, w1 in buckets.items():
        for s2, w2 in buckets.items():
            if s1 | s2 | P0 == P:
                total += w1 * w2
    return total


def c_frak_large(rep: UnitaryRep, quotient: QuotientCharges) -> float:
    """2 max_{(a,b) != (1,1)} Re[a chi(b) - chi(1)]; strictly negative when
    the quotient key property holds."""
    d = float(np.real(rep.character[0]))
    best = None
    for a in range(quotient.order):
        for b in range(rep.order):
            if a == 0 and b == 0:
                continue
            val = 2.0 * ((quotient.value(a) * complex(rep.character[b])).real - d)
            if best is None or val > best:
                best = val
    return float(best)


def higgs_phi2_large_bound(
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    P0,
    P,
    kappa: float,
) -> float:
    """Closed-form bound 4^|P| |G|^{8|P|} q^{8|P|} exp(kappa c_frak / 6)^{|P\\P0|}.

    c_frak is negative, so the last factor decays; read in that decaying
    form.
    """
    P0, P = frozenset(P0), frozenset(P)
    n = len(P)
    excess = len(P - P0)
    cf = c_frak_large(rep, quotient)
    log_val = (
        n * math.log(4.0)
        + 8 * n * math.log(group.order)
        + 8 * n * math.log(quotient.order)
        + (kappa * cf / 6.0) * excess
    )
    return math.exp(log_val)


# -- small-kappa: random currents and reduced configurations -----------------------


def c_constant(rep: UnitaryRep) -> float:
    """Positivity offset for the current expansion: 2 dim(rho) + 1."""
    return 2.0 * rep.dim + 1.0


@dataclass(frozen=True)
class ReducedConfig:
    """(psi, phi, I): gauge class, charge field, and edge currents."""

    psi: Homomorphism
    phi: np.ndarray  # int8 per vertex
    current: np.ndarray  # int64 per positive edge, >= 0

    def activated_edges(self) -> frozenset:
        return frozenset(int(e) for e in np.where(self.current != 0)[0])

    def activated_vertices(self, cx: CellComplex) -> frozenset:
        out = set()
        for e in self.activated_edges():
            out.add(int(cx.edge_tail[e]))
            out.add(int(cx.edge_head[e]))
        return frozenset(out)


def reduced_support(cx: CellComplex, group: GroupTable, rc: ReducedConfig) -> frozenset:
    """Plaquettes with a boundary vertex among the activated vertices, plus
    the plaquettes where psi's holonomy is nonidentity."""
    av = rc.activated_vertices(cx)
    out = set()
    for p in range(cx.n_plaquettes):
        if cx.plq_vertices[p] & av:
            out.add(p)
    out |= rc.psi.support(group)
    return frozenset(out)


def current_edge_weight(
    rep: UnitaryRep,
    quotient: QuotientCharges,
    phi_x: int,
    g: int,
    phi_y: int,
) -> float:
    """w_e = 2 Re[phi_x chi(g) phi_y^-1] + c; strictly positive."""
    val = (
        quotient.value(phi_x)
        * complex(rep.character[g])
        * quotient.value(phi_y).conjugate()
    )
    return 2.0 * val.real + c_constant(rep)


def current_weight(
    cx: CellComplex,
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    sigma,
    phi,
    current,
    beta: float,
    kappa: float,
) -> float:
    """Full unreduced weight of (sigma, phi, I).

    Gauge part: product of single-orientation plaquette weights phi_beta.
    Current part: product over activated edges of (kappa w_e)^I / I!.
    """
    phis = phi_beta_table(rep, beta)
    mult, inv = group.mult, group.inv
    w = 1.0
    for p in range(cx.n_plaquettes):
        g = 0
        for eid, sign in zip(cx.plq_loop_edges[p], cx.plq_loop_signs[p]):
            v = sigma[eid]
            g = mult[g, v if sign > 0 else inv[v]]
        w *= float(phis[g])
    for eid in np.where(np.asarray(current) != 0)[0]:
        x, y = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        we = current_edge_weight(rep, quotient, int(phi[x]), int(sigma[eid]), int(phi[y]))
        if we <= 0:
            raise HiggsError("positivity of the current weight failed")
        i_e = int(current[eid])
        w *= (kappa * we) ** i_e / math.factorial(i_e)
    return w


def reduced_weight(
    basis: GeneratorBasis,
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    rc: ReducedConfig,
    beta: float,
    kappa: float,
    method: str = "components",
    mc_samples: int = 20_000,
    rng=None,
    sigma0=None,
) -> float:
    """Gauge-class weight: the fiber average of the full weight over all
    configurations mapping to psi.

    methods:
      components -- exact: the auxiliary-field average factorizes over the
        connected components of the activated-edge graph, so only component
        vertices are summed.
      fiber -- exact by brute force over the whole gauge fiber (tiny
        lattices only).
      mc -- Monte Carlo average over the auxiliary field.
    """
    cx = basis.complex
    phis = phi_beta_table(rep, beta)
    gauge = 1.0
    for p in range(cx.n_plaquettes):
        gauge *= float(phis[rc.psi.xi_image(p, group)])
    if sigma0 is None:
        sigma0 = gauge_fix(rc.psi, group)
    ae = sorted(rc.activated_edges())
    if not ae:
        return gauge

    def edge_factor(eta, eid):
        x, y = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        g = group.mul(group.mul(eta[x], int(sigma0[eid])), group.invert(eta[y]))
        we = current_edge_weight(rep, quotient, int(rc.phi[x]), g, int(rc.phi[y]))
        i_e = int(rc.current[eid])
        return (kappa * we) ** i_e / math.factorial(i_e)

    if method == "fiber":
        verts = [v for v in range(cx.n_vertices) if v != basis.root]
        total = 0.0
        eta = np.zeros(cx.n_vertices, dtype=np.int64)
        for assign in product(range(group.order), repeat=len(verts)):
            for v, a in zip(verts, assign):
                eta[v] = a
            f = 1.0
            for eid in ae:
                f *= edge_factor(eta, eid)
            total += f
        return gauge * total / group.order ** len(verts)
    if method == "components":
        comp_of = _edge_components(cx, ae)
        total = 1.0
        for comp_edges in comp_of:
            verts = sorted({int(cx.edge_tail[e]) for e in comp_edges}
                           | {int(cx.edge_head[e]) for e in comp_edges})
            eta = np.zeros(cx.n_vertices, dtype=np.int64)
            acc = 0.0
            for assign in product(range(group.order), repeat=len(verts)):
                for v, a in zip(verts, assign):
                    eta[v] = a
                f = 1.0
                for eid in comp_edges:
                    f *= edge_factor(eta, eid)
                acc += f
            total *= acc / group.order ** len(verts)
        return gauge * total
    if method == "mc":
        rng = rng if rng is not None else np.random.default_rng(0)
        total = 0.0
        for _ in range(mc_samples):
            eta = rng.integers(0, group.order, cx.n_vertices)
            f = 1.0
            for eid in ae:
                f *= edge_factor(eta, eid)
            total += f
        return gauge * total / mc_samples
    raise HiggsError(f"unknown reduced-weight method {method!r}")


def _edge_components(cx: CellComplex, edge_ids):
    """Vertex-sharing connected components of an edge set."""
    parent = {e: e for e in edge_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_vertex: dict[int, list] = {}
    for e in edge_ids:
        for v in (int(cx.edge_tail[e]), int(cx.edge_head[e])):
            by_vertex.setdefault(v, []).append(e)
    for edges in by_vertex.values():
        for f in edges[1:]:
            ra, rb = find(edges[0]), find(f)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, list] = {}
    for e in edge_ids:
        comps.setdefault(find(e), []).append(e)
    return [sorted(v) for _, v in sorted(comps.items())]


def higgs_swap_small_kappa(
    basis: GeneratorBasis,
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    rc1: ReducedConfig,
    rc2: ReducedConfig,
    B1: Box,
    B2: Box,
):
    """Knot-level swap of reduced configurations.

    The homomorphism parts go through the pure-gauge split bijection along
    the knot decomposition of the joint reduced support; currents and
    charges are switched on the activated edges/vertices of the knot
    containing B2. Raises HiggsError when B1 and B2 share a knot.
    """
    cx = basis.complex
    b1 = cx.plaquette_set_of_box(B1)
    b2 = cx.plaquette_set_of_box(B2)
    joint = (
        reduced_support(cx, group, rc1)
        | reduced_support(cx, group, rc2)
        | b1
        | b2
    )
    kd = knot_decomposition(cx, joint)
    j1 = kd.part_containing(b1)
    j2 = kd.part_containing(b2)
    if j1 == j2:
        raise HiggsError("B1 and B2 lie in the same knot")

    th = ThetaBijection(basis, group, kd)
    t1 = list(th.forward(rc1.psi))
    t2 = list(th.forward(rc2.psi))
    t1[j2], t2[j2] = t2[j2], t1[j2]
    psi1_new = th.backward(t1)
    psi2_new = th.backward(t2)

    def edge_knot(e) -> int:
        star = set()
        for v in (int(cx.edge_tail[e]), int(cx.edge_head[e])):
            for p in range(cx.n_plaquettes):
                if v in cx.plq_vertices[p]:
                    star.add(p)
        owners = {i for i, part in enumerate(kd.parts) for p in star if p in part}
        if len(owners) != 1:
            raise HiggsError("activated edge straddles knots")
        return owners.pop()

    cur1 = rc1.current.copy()
    cur2 = rc2.current.copy()
    switched_vertices = set()
    for e in sorted(rc1.activated_edges() | rc2.activated_edges()):
        if edge_knot(e) == j2:
            cur1[e], cur2[e] = rc2.current[e], rc1.current[e]
            switched_vertices.add(int(cx.edge_tail[e]))
            switched_vertices.add(int(cx.edge_head[e]))
    phi1 = rc1.phi.copy()
    phi2 = rc2.phi.copy()
    for v in switched_vertices:
        phi1[v], phi2[v] = rc2.phi[v], rc1.phi[v]
    return (
        ReducedConfig(psi1_new, phi1, cur1),
        ReducedConfig(psi2_new, phi2, cur2),
    )


# -- small-kappa polymer function and bound ----------------------------------------


def vertex_star_edges(cx: CellComplex, P) -> list[int]:
    """Edges whose activation keeps the support inside P: every plaquette
    having one of the edge's endpoints on its boundary must lie in P."""
    P = frozenset(P)
    out = []
    for e in range(cx.n_edges):
        star = set()
        for v in (int(cx.edge_tail[e]), int(cx.edge_head[e])):
            for p in range(cx.n_plaquettes):
                if v in cx.plq_vertices[p]:
                    star.add(p)
        if star <= P:
            out.append(e)
    return out


def higgs_phi2_small_buckets(
    basis: GeneratorBasis,
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    P,
    beta: float,
    kappa: float,
    i_max: int = 1,
    max_activated: int = 2,
    cap: int = 100_000,
):
    """Aggregated reduced weights by support, for supports inside P.

    Returns {support: sum of effective weights}, the effective weight of a
    reduced class being q^{-|AV|} reduced_weight: the charge field is free
    off the activated vertices, and the polymer normalization here is
    q^{|lattice vertices|} per configuration, which sums out the global
    charge freedom (the counting behind the closed-form bound assumes
    exactly this; a q^{|vertices|-1} normalization would leave a spurious
    global factor q per configuration and already break the bound at
    P = empty set).
    """
    cx = basis.complex
    P = frozenset(int(p) for p in P)
    psis = solve_support_constraints(basis, group, P, cap)
    edges = vertex_star_edges(cx, P)
    buckets: dict[frozenset, float] = {}
    count = 0
    for n_act in range(0, max_activated + 1):
        for chosen in combinations(edges, n_act):
            for levels in product(range(1, i_max + 1), repeat=n_act):
                current = np.zeros(cx.n_edges, dtype=np.int64)
                for e, i_e in zip(chosen, levels):
                    current[e] = i_e
                av = set()
                for e in chosen:
                    av.add(int(cx.edge_tail[e]))
                    av.add(int(cx.edge_head[e]))
                av = sorted(av)
                for phi_vals in product(range(quotient.order), repeat=len(av)):
                    phi = np.zeros(cx.n_vertices, dtype=np.int8)
                    for v, val in zip(av, phi_vals):
                        phi[v] = val
                    for psi in psis:
                        rc = ReducedConfig(psi, phi, current)
                        supp = reduced_support(cx, group, rc)
                        if not supp <= P:
                            continue
                        count += 1
                        if count > cap:
                            raise HiggsError(f"enumeration exceeds cap {cap}")
                        w = reduced_weight(
                            basis, group, rep, quotient, rc, beta, kappa
                        )
                        eff = w * float(quotient.order) ** (-len(av))
                        buckets[supp] = buckets.get(supp, 0.0) + eff
    return buckets


def higgs_phi2_small(
    basis: GeneratorBasis,
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    P0,
    P,
    beta: float,
    kappa: float,
    **caps,
) -> float:
    """Capped exhaustive pair polymer weight for the current expansion."""
    P0 = frozenset(int(p) for p in P0)
    P = frozenset(int(p) for p in P)
    if not P0 <= P:
        return 0.0
    buckets = higgs_phi2_small_buckets(
        basis, group, rep, quotient, P, beta, kappa, **caps
    )
    total = 0.0
    for s1, w1 in buckets.items():
        for s2, w2 in buckets.items():
            if s1 | s2 | P0 == P:
                total += w1 * w2
    return total


def c_frak_small(
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    beta: float,
    kappa: float,
) -> float:
    """max(exp[beta max_{g != 1} 2 Re(chi(g) - chi(1))],
    (kappa/24) exp[max_{(a,b) != (1,1)} (2 Re[a chi(b)] + c)])."""
    chi = rep.character
    d = float(np.real(chi[0]))
    gauge_max = max(2.0 * (float(np.real(chi[g])) - d) for g in range(1, group.order))
    cur_max = None
    for a in range(quotient.order):
        for b in range(group.order):
            if a == 0 and b == 0:
                continue
            val = 2.0 * (quotient.value(a) * complex(chi[b])).real + c_constant(rep)
            if cur_max is None or val > cur_max:
                cur_max = val
    return max(math.exp(beta * gauge_max), (kappa / 24.0) * math.exp(cur_max))


def higgs_phi2_small_bound(
    group: GroupTable,
    rep: UnitaryRep,
    quotient: QuotientCharges,
    P0,
    P,
    beta: float,
    kappa: float,
):
    """Closed form 16^|P| |G|^{2|P|} 2^{8|P|} c_frak^{|P \\ P0|}.

    Returns (bound, c_frak); the bound only decays in |P| when c_frak < 1,
    which callers should check.
    """
    P0, P = frozenset(P0), frozenset(P)
    n = len(P)
    excess = len(P - P0)
    cf = c_frak_small(group, rep, quotient, beta, kappa)
    log_val = (
        n * math.log(16.0)
        + 2 * n * math.log(group.order)
        + 8 * n * math.log(2.0)
        + excess * math.log(cf)
    )
    return math.exp(log_val), cf
