"""Edge configurations as homomorphisms of the lattice fundamental group.

The fundamental group of the 1-skeleton is free on the loops a_e =
w_x e w_y^{-1}, one per co-tree edge of a fixed spanning tree, so a
homomorphism into G is just an assignment of one group element per co-tree
edge. This module provides the translation in both directions (psi of a
configuration, gauge fixing back to a configuration), loop words, plaquette
supports, the induced measure nu with its exact enumeration, and a solver
for support constraints (all homomorphisms whose support avoids a given
plaquette complement).

A GeneratorBasis pins the base point and spanning tree; its co-tree
ordering makes homomorphism images canonical tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .groups import GroupTable, UnitaryRep, phi_beta_table
from .lattice import CellComplex, SpanningTree, spanning_tree


class HomomorphismError(ValueError):
    pass


# A generator word is a tuple of (co-tree position, +-1) letters, freely reduced.
Word = tuple[tuple[int, int], ...]


def _reduce(letters) -> Word:
    out = []
    for gen, sign in letters:
        if out and out[-1][0] == gen and out[-1][1] == -sign:
            out.pop()
        else:
            out.append((gen, sign))
    return tuple(out)


class GeneratorBasis:
    """Base point, spanning tree, and cached plaquette words xi_p."""

    def __init__(self, cx: CellComplex, tree: SpanningTree | None = None, root: int = 0):
        self.complex = cx
        self.tree = tree if tree is not None else spanning_tree(cx, root)
        self.root = self.tree.root
        self.n_generators = self.tree.n_cotree
        self._path_cache: dict[int, list] = {}
        self.xi_words: tuple[Word, ...] = tuple(
            self.xi_of_edges(cx.plaquette_loop(p)) for p in range(cx.n_plaquettes)
        )

    def word_of_edges(self, oriented_edges) -> Word:
        """Project an edge path to its co-tree letters, freely reduced."""
        pos = self.tree.cotree_pos
        letters = []
        for eid, sign in oriented_edges:
            gen = pos.get(int(eid))
            if gen is not None:
                letters.append((gen, int(sign)))
        return _reduce(letters)

    def _path(self, x: int):
        path = self._path_cache.get(x)
        if path is None:
            path = self.tree.path_edges(x)
            self._path_cache[x] = path
        return path

    def xi_of_edges(self, oriented_edges) -> Word:
        """Word of l(x0,x) gamma l(x0,x)^{-1} with l the spanning-tree path.

        Tree edges contribute no letters, so this equals the word of the
        loop's own edges; the conjugating path is kept for fidelity to the
        construction (and costs nothing after reduction).
        """
        edges = list(oriented_edges)
        if not edges:
            return ()
        tail, _ = self.complex.oriented_endpoints(*edges[0])
        path = self._path(tail)
        full = path + edges + [(e, -s) for e, s in reversed(path)]
        return self.word_of_edges(full)

    def cotree_edge(self, position: int) -> int:
        return int(self.tree.cotree[position])


@dataclass(frozen=True)
class Homomorphism:
    """Images of the co-tree generators; extends freely to all loops."""

    basis: GeneratorBasis
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.basis.n_generators:
            raise HomomorphismError("wrong number of generator images")

    def evaluate(self, word: Word, group: GroupTable) -> int:
        g = group.identity
        for gen, sign in word:
            v = self.images[gen]
            g = group.mul(g, v if sign > 0 else group.invert(v))
        return g

    def xi_image(self, p: int, group: GroupTable) -> int:
        return self.evaluate(self.basis.xi_words[p], group)

    def support(self, group: GroupTable) -> frozenset:
        return frozenset(
            p
            for p in range(self.basis.complex.n_plaquettes)
            if self.xi_image(p, group) != group.identity
        )

    def is_trivial(self) -> bool:
        return all(v == 0 for v in self.images)


def trivial_homomorphism(basis: GeneratorBasis) -> Homomorphism:
    return Homomorphism(basis, (0,) * basis.n_generators)


def psi_of_config(basis: GeneratorBasis, group: GroupTable, config) -> Homomorphism:
    """The homomorphism induced by an edge configuration.

    The image of the generator a_e = w_x e w_y^{-1} is the holonomy of the
    configuration around that loop; tree edges need no special casing since
    the loop is explicit.
    """
    cx = basis.complex
    images = []
    for pos in range(basis.n_generators):
        eid = basis.cotree_edge(pos)
        x, y = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        g = group.identity
        for e2, s2 in basis._path(x):
            g = group.mul(g, _oriented(group, config, e2, s2))
        g = group.mul(g, int(config[eid]))
        for e2, s2 in reversed(basis._path(y)):
            g = group.mul(g, _oriented(group, config, e2, -s2))
        images.append(g)
    return Homomorphism(basis, tuple(images))


def _oriented(group: GroupTable, config, eid: int, sign: int) -> int:
    v = int(config[eid])
    return v if sign > 0 else group.invert(v)


def gauge_fix(psi: Homomorphism, group: GroupTable, tree: SpanningTree | None = None):
    """The unique configuration in GF(tree) mapping to psi.

    Tree edges carry the identity; a co-tree edge e = (x, y) carries the
    image of the loop w_x e w_y^{-1} (paths taken in ``tree``), evaluated
    through psi's own basis.
    """
    basis = psi.basis
    cx = basis.complex
    if tree is None or tree is basis.tree:
        config = np.zeros(cx.n_edges, dtype=np.int32)
        for pos in range(basis.n_generators):
            config[basis.cotree_edge(pos)] = psi.images[pos]
        return config
    config = np.zeros(cx.n_edges, dtype=np.int32)
    path_cache: dict[int, list] = {}

    def path(x):
        if x not in path_cache:
            path_cache[x] = tree.path_edges(x)
        return path_cache[x]

    for eid in tree.cotree:
        eid = int(eid)
        x, y = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        loop = path(x) + [(eid, 1)] + [(e, -s) for e, s in reversed(path(y))]
        word = basis.word_of_edges(loop)
        config[eid] = psi.evaluate(word, group)
    return config


def nu_weight(psi: Homomorphism, rep: UnitaryRep, beta: float, group: GroupTable) -> float:
    phis = phi_beta_table(rep, beta)
    w = 1.0
    for p in range(psi.basis.complex.n_plaquettes):
        w *= float(phis[psi.xi_image(p, group)])
    return w


@dataclass(frozen=True)
class NuDistribution:
    """Exact law of the random homomorphism Psi under the Gibbs pushforward."""

    basis: GeneratorBasis
    homs: tuple[Homomorphism, ...]
    weights: np.ndarray
    z: float
    index: dict

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.z

    def prob_of(self, psi: Homomorphism) -> float:
        return float(self.weights[self.index[psi.images]] / self.z)


def enumerate_nu(
    basis: GeneratorBasis,
    group: GroupTable,
    rep: UnitaryRep,
    beta: float,
    cap: int = 2**24,
) -> NuDistribution:
    """All of Omega with nu weights; |Omega| = |G|^(co-tree count)."""
    k = basis.n_generators
    total = group.order**k
    if total > cap:
        raise HomomorphismError(f"|Omega| = {total} exceeds cap {cap}")
    phis = phi_beta_table(rep, beta)
    homs = []
    weights = np.empty(total)
    index = {}
    for i, images in enumerate(product(range(group.order), repeat=k)):
        psi = Homomorphism(basis, images)
        w = 1.0
        for p in range(basis.complex.n_plaquettes):
            w *= float(phis[psi.xi_image(p, group)])
        homs.append(psi)
        weights[i] = w
        index[images] = i
    return NuDistribution(basis, tuple(homs), weights, float(weights.sum()), index)


# -- support-constraint solving -------------------------------------------------


def solve_support_constraints(
    basis: GeneratorBasis,
    group: GroupTable,
    P,
    cap: int = 2**20,
) -> list[Homomorphism]:
    """All psi with supp(psi) inside P, i.e. psi(xi_p) = 1 for every p not in P.

    Cyclic groups go through exact linear algebra on the generator exponents
    (integer diagonalization of the constraint matrix, solved mod n); other
    groups use depth-first search with unit propagation over the short
    plaquette words. Output is sorted by image tuple.
    """
    P = frozenset(P)
    constraints = [
        basis.xi_words[p]
        for p in range(basis.complex.n_plaquettes)
        if p not in P
    ]
    if group.name == "cyclic":
        sols = _solve_cyclic(basis, group.order, constraints, cap)
    else:
        sols = _solve_dfs(basis, group, constraints, cap)
    sols.sort()
    return [Homomorphism(basis, images) for images in sols]


def _solve_cyclic(basis, n, constraints, cap):
    k = basis.n_generators
    rows = []
    for word in constraints:
        row = [0] * k
        for gen, sign in word:
            row[gen] += sign
        rows.append(row)
    diag, Q = _diagonalize(rows, k)
    free_choices = []
    from math import gcd

    count = 1
    for i in range(k):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            choices = list(range(n))
        else:
            g = gcd(abs(d), n)
            step = n // g
            choices = [t * step for t in range(g)]
        count *= len(choices)
        if count > cap:
            raise HomomorphismError(f"solution count exceeds cap {cap}")
        free_choices.append(choices)
    sols = []
    for y in product(*free_choices):
        x = tuple(sum(Q[i][j] * y[j] for j in range(k)) % n for i in range(k))
        sols.append(x)
    return sorted(set(sols))


def _diagonalize(rows, k):
    """Integer diagonalization by row/column operations; returns the diagonal
    and the accumulated column transform Q (solutions are x = Q y)."""
    A = [list(r) for r in rows]
    m = len(A)
    Q = [[1 if i == j else 0 for j in range(k)] for i in range(k)]

    def col_swap(a, b):
        for row in A:
            row[a], row[b] = row[b], row[a]
        for row in Q:
            row[a], row[b] = row[b], row[a]

    def col_axpy(dst, src, q):
        for row in A:
            row[dst] -= q * row[src]
        for row in Q:
            row[dst] -= q * row[src]

    t = 0
    while t < min(m, k):
        piv, best = None, None
        for i in range(t, m):
            for j in range(t, k):
                if A[i][j] != 0 and (best is None or abs(A[i][j]) < best):
                    best, piv = abs(A[i][j]), (i, j)
        if piv is None:
            break
        pi, pj = piv
        A[t], A[pi] = A[pi], A[t]
        if pj != t:
            col_swap(t, pj)
        while True:
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        dirty = True
            for j in range(t + 1, k):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    col_axpy(j, t, q)
                    if A[t][j]:
                        col_swap(t, j)
                        dirty = True
            if not dirty:
                break
        t += 1
    return [A[i][i] for i in range(min(m, k))], Q


def _solve_dfs(basis, group, constraints, cap):
    k = basis.n_generators
    words = [w for w in constraints]
    occurs = [{} for _ in range(k)]  # generator -> {constraint: multiplicity}
    for ci, word in enumerate(words):
        for gen, _ in word:
            occurs[gen][ci] = occurs[gen].get(ci, 0) + 1
    unassigned = [len(w) for w in words]
    assignment = [-1] * k
    sols = []

    def word_value_with_hole(word):
        """(forced position, prefix product, suffix product) for one unassigned letter."""
        hole = None
        for i, (gen, _) in enumerate(word):
            if assignment[gen] == -1:
                hole = i
                break
        left = group.identity
        for gen, sign in word[:hole]:
            v = assignment[gen]
            left = group.mul(left, v if sign > 0 else group.invert(v))
        right = group.identity
        for gen, sign in word[hole + 1 :]:
            v = assignment[gen]
            right = group.mul(right, v if sign > 0 else group.invert(v))
        return hole, left, right

    def check(word) -> bool:
        g = group.identity
        for gen, sign in word:
            v = assignment[gen]
            g = group.mul(g, v if sign > 0 else group.invert(v))
        return g == group.identity

    def assign(gen, value, trail) -> bool:
        # Counter updates are unconditional per assigned generator so that
        # undo() is exactly symmetric even when a check fails mid-way.
        queue = [(gen, value)]
        ok = True
        while queue and ok:
            g0, v0 = queue.pop()
            if assignment[g0] != -1:
                if assignment[g0] != v0:
                    ok = False
                continue
            assignment[g0] = v0
            trail.append(g0)
            for ci, mult in occurs[g0].items():
                unassigned[ci] -= mult
            for ci in occurs[g0]:
                if unassigned[ci] == 0:
                    if not check(words[ci]):
                        ok = False
                        break
                elif unassigned[ci] == 1:
                    hole, left, right = word_value_with_hole(words[ci])
                    hg, hs = words[ci][hole]
                    # left * h^hs * right = 1  =>  h^hs = left^-1 right^-1
                    target = group.mul(group.invert(left), group.invert(right))
                    forced = target if hs > 0 else group.invert(target)
                    queue.append((hg, forced))
        return ok

    def undo(trail):
        for g0 in trail:
            for ci, mult in occurs[g0].items():
                unassigned[ci] += mult
            assignment[g0] = -1

    def rec():
        try:
            gen = assignment.index(-1)
        except ValueError:
            sols.append(tuple(assignment))
            if len(sols) > cap:
                raise HomomorphismError(f"solution count exceeds cap {cap}")
            return
        for value in range(group.order):
            trail = []
            if assign(gen, value, trail):
                rec()
            undo(trail)

    rec()
    return sols
