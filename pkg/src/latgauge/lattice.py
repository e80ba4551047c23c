"""Box lattices as cell complexes in dimensions 2-4.

Vertices, positively oriented edges, plaquettes (with ordered counter-
clockwise boundary loops), and unit 3-cells are indexed lexicographically,
so rebuilding the same box always yields identical indices. On top of the
raw complex this module provides the sub-rectangle plaquette sets S2(B),
dS2(B), S2c(B), spanning trees (optionally constrained to contain forests
of those pieces), the good-rectangle classifier, and the well-separation
predicate.

Plaquette sets are passed around as frozensets of plaquette indices at the
API level; internally the rectangle machinery uses integer bitmasks over
the plaquette index space, which the knot code shares.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np


class LatticeError(ValueError):
    """Invalid box, dimension, or sub-rectangle."""


@dataclass(frozen=True)
class Box:
    """An axis-aligned integer rectangle; degenerate axes are allowed."""

    ranges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for lo, hi in self.ranges:
            if hi < lo:
                raise LatticeError(f"empty range [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.ranges)

    @property
    def sides(self) -> tuple[int, ...]:
        return tuple(hi - lo for lo, hi in self.ranges)

    def contains_point(self, point) -> bool:
        return all(lo <= x <= hi for x, (lo, hi) in zip(point, self.ranges))

    def contains_box(self, other: "Box") -> bool:
        return all(
            lo <= olo and ohi <= hi
            for (lo, hi), (olo, ohi) in zip(self.ranges, other.ranges)
        )

    @staticmethod
    def cube(dim: int, side: int, corner=None) -> "Box":
        corner = tuple(corner) if corner is not None else (0,) * dim
        return Box(tuple((c, c + side) for c in corner))


def _as_mask(ids) -> int:
    mask = 0
    for i in ids:
        mask |= 1 << int(i)
    return mask


def _mask_ids(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class RectanglePieces:
    """Plaquette/edge/vertex content of S2(B), dS2(B), S2c(B) for one B."""

    box: Box
    s2: int  # plaquette bitmask: all plaquettes contained in B
    bd: int  # plaquettes on the boundary of B but not on the boundary of the lattice
    s2c: int  # plaquettes not in B, plus bd
    s2_edges: frozenset
    bd_edges: frozenset
    s2c_edges: frozenset
    s2_vertices: frozenset
    bd_vertices: frozenset
    s2c_vertices: frozenset

    @property
    def inner(self) -> int:
        """S2(B) \\ dS2(B) at the plaquette level."""
        return self.s2 & ~self.bd

    @property
    def outer(self) -> int:
        """S2c(B) \\ dS2(B) at the plaquette level."""
        return self.s2c & ~self.bd


class CellComplex:
    """The full cell complex of a box lattice (dim 2, 3, or 4)."""

    def __init__(self, box: Box):
        dim = box.dim
        if dim not in (2, 3, 4):
            raise LatticeError("dimension must be 2, 3, or 4")
        if any(s < 1 for s in box.sides):
            raise LatticeError("ambient lattice must have side length >= 1 on every axis")
        self.box = box
        self.dim = dim

        los = [lo for lo, _ in box.ranges]
        his = [hi for _, hi in box.ranges]
        axes_vals = [range(lo, hi + 1) for lo, hi in box.ranges]
        self.vertices = [tuple(v) for v in product(*axes_vals)]
        self.vindex = {v: i for i, v in enumerate(self.vertices)}
        self.vcoords = np.array(self.vertices, dtype=np.int64)
        self.n_vertices = len(self.vertices)

        # Positively oriented edges (x, x + e_axis), lexicographic in (x, axis).
        edges = []
        self.eindex = {}
        for vi, v in enumerate(self.vertices):
            for axis in range(dim):
                if v[axis] + 1 > his[axis]:
                    continue
                w = list(v)
                w[axis] += 1
                wi = self.vindex[tuple(w)]
                self.eindex[(vi, axis)] = len(edges)
                edges.append((vi, wi, axis))
        self.n_edges = len(edges)
        self.edge_tail = np.array([e[0] for e in edges], dtype=np.int32)
        self.edge_head = np.array([e[1] for e in edges], dtype=np.int32)
        self.edge_axis = np.array([e[2] for e in edges], dtype=np.int32)

        # Plaquettes: corner x and axis pair i < j, boundary loop counter-
        # clockwise from the (lexicographically least) corner:
        # x -> x+ei -> x+ei+ej -> x+ej -> x.
        plq_loop_edges = []
        plq_loop_signs = []
        plq_corner = []
        plq_axes = []
        for vi, v in enumerate(self.vertices):
            for i, j in combinations(range(dim), 2):
                if v[i] + 1 > his[i] or v[j] + 1 > his[j]:
                    continue
                vei = list(v)
                vei[i] += 1
                vej = list(v)
                vej[j] += 1
                e0 = self.eindex[(vi, i)]
                e1 = self.eindex[(self.vindex[tuple(vei)], j)]
                e2 = self.eindex[(self.vindex[tuple(vej)], i)]
                e3 = self.eindex[(vi, j)]
                plq_loop_edges.append((e0, e1, e2, e3))
                plq_loop_signs.append((1, 1, -1, -1))
                plq_corner.append(vi)
                plq_axes.append((i, j))
        self.n_plaquettes = len(plq_loop_edges)
        self.plq_loop_edges = np.array(plq_loop_edges, dtype=np.int32).reshape(-1, 4)
        self.plq_loop_signs = np.array(plq_loop_signs, dtype=np.int8).reshape(-1, 4)
        self.plq_corner = np.array(plq_corner, dtype=np.int32)
        self.plq_axes = tuple(plq_axes)

        # Per-plaquette bounding boxes drive all the S2/boundary set logic.
        corners = self.vcoords[self.plq_corner]
        self.plq_min = corners.copy()
        self.plq_max = corners.copy()
        for p, (i, j) in enumerate(self.plq_axes):
            self.plq_max[p, i] += 1
            self.plq_max[p, j] += 1

        self.plq_vertices = []
        for p in range(self.n_plaquettes):
            vs = set()
            for eid in self.plq_loop_edges[p]:
                vs.add(int(self.edge_tail[eid]))
                vs.add(int(self.edge_head[eid]))
            self.plq_vertices.append(frozenset(vs))

        # 3-cells: corner x and axis triple, with their 6 boundary plaquettes.
        self._pindex = {}
        for p in range(self.n_plaquettes):
            self._pindex[(int(self.plq_corner[p]), self.plq_axes[p])] = p
        cells3 = []
        if dim >= 3:
            for vi, v in enumerate(self.vertices):
                for tri in combinations(range(dim), 3):
                    if any(v[a] + 1 > his[a] for a in tri):
                        continue
                    faces = []
                    for i, j in combinations(tri, 2):
                        (k,) = [a for a in tri if a not in (i, j)]
                        faces.append(self._pindex[(vi, (i, j))])
                        shifted = list(v)
                        shifted[k] += 1
                        faces.append(self._pindex[(self.vindex[tuple(shifted)], (i, j))])
                    cells3.append(tuple(sorted(faces)))
        self.cells3 = tuple(cells3)
        self.n_cells3 = len(cells3)

        self.plq_cells = [[] for _ in range(self.n_plaquettes)]
        for ci, faces in enumerate(self.cells3):
            for p in faces:
                self.plq_cells[p].append(ci)

        # Edge -> containing plaquettes (the heat-bath kernel's star).
        self.edge_plaquettes = [[] for _ in range(self.n_edges)]
        for p in range(self.n_plaquettes):
            for eid in self.plq_loop_edges[p]:
                self.edge_plaquettes[int(eid)].append(p)

        self._on_boundary_lattice = self._boundary_flags(box)
        self._pieces_cache: dict = {}
        self._separators_cache = None

    # -- basic cell queries -------------------------------------------------

    def plaquette_loop(self, p: int) -> tuple[tuple[int, int], ...]:
        """Ordered boundary loop of plaquette p as (edge index, sign) pairs."""
        return tuple(
            (int(e), int(s))
            for e, s in zip(self.plq_loop_edges[p], self.plq_loop_signs[p])
        )

    def oriented_endpoints(self, eid: int, sign: int) -> tuple[int, int]:
        if sign > 0:
            return int(self.edge_tail[eid]), int(self.edge_head[eid])
        return int(self.edge_head[eid]), int(self.edge_tail[eid])

    def _boundary_flags(self, box: Box) -> np.ndarray:
        """For each plaquette: is it on the boundary of ``box``?

        A plaquette lies on the boundary of a rectangle iff it is flat in
        some axis at one of the rectangle's extreme values, i.e. it is
        contained in a facet.
        """
        flags = np.zeros(self.n_plaquettes, dtype=bool)
        for axis, (lo, hi) in enumerate(box.ranges):
            flat = self.plq_min[:, axis] == self.plq_max[:, axis]
            at_face = (self.plq_min[:, axis] == lo) | (self.plq_min[:, axis] == hi)
            flags |= flat & at_face
        return flags

    def plaquettes_in_box(self, B: Box) -> np.ndarray:
        if B.dim != self.dim:
            raise LatticeError("dimension mismatch")
        lo = np.array([r[0] for r in B.ranges])
        hi = np.array([r[1] for r in B.ranges])
        return np.all(self.plq_min >= lo, axis=1) & np.all(self.plq_max <= hi, axis=1)

    def plaquette_set_of_box(self, B: Box) -> frozenset:
        return frozenset(int(p) for p in np.where(self.plaquettes_in_box(B))[0])

    def mask_of(self, plaquettes) -> int:
        return _as_mask(plaquettes)

    def ids_of(self, mask: int) -> frozenset:
        return frozenset(_mask_ids(mask))

    # -- sub-rectangle complexes ---------------------------------------------

    def rectangle_pieces(self, B: Box) -> RectanglePieces:
        """S2(B), dS2(B), S2c(B) with their edge and vertex closures."""
        key = B.ranges
        cached = self._pieces_cache.get(key)
        if cached is not None:
            return cached
        if not self.box.contains_box(B):
            raise LatticeError(f"{B} is not a sub-rectangle of the lattice box")
        in_b = self.plaquettes_in_box(B)
        on_bd_b = self._boundary_flags(B)
        bd = in_b & on_bd_b & ~self._on_boundary_lattice
        s2c = ~in_b | bd

        def closure(flags):
            edges, verts = set(), set()
            for p in np.where(flags)[0]:
                for eid in self.plq_loop_edges[p]:
                    edges.add(int(eid))
                verts |= self.plq_vertices[p]
            return frozenset(edges), frozenset(verts)

        s2_e, s2_v = closure(in_b)
        bd_e, bd_v = closure(bd)
        s2c_e, s2c_v = closure(s2c)
        pieces = RectanglePieces(
            box=B,
            s2=_as_mask(np.where(in_b)[0]),
            bd=_as_mask(np.where(bd)[0]),
            s2c=_as_mask(np.where(s2c)[0]),
            s2_edges=s2_e,
            bd_edges=bd_e,
            s2c_edges=s2c_e,
            s2_vertices=s2_v,
            bd_vertices=bd_v,
            s2c_vertices=s2c_v,
        )
        self._pieces_cache[key] = pieces
        return pieces

    # -- good rectangles and separation ---------------------------------------

    def is_good_rectangle(self, B: Box):
        """Sufficient-condition classifier for good rectangles.

        Returns True iff B matches one of the two certified shapes:
        (a) every side of B is strictly shorter than the lattice side, or
        (b) B is the intersection of the lattice with a half space cutting
        strictly between the lattice walls. Additionally B must not have a
        nonempty plaquette interior with an empty boundary layer dS2(B):
        such rectangles (flat boxes lying inside a lattice wall) lose their
        protective boundary to the lattice boundary and the split bijection
        genuinely fails for them. Returns None in dimension 2 (unsupported);
        the whole box always returns False.
        """
        if self.dim == 2:
            return None
        if not self.box.contains_box(B):
            return False
        side = self.box.sides[0]
        case_a = all(s < side for s in B.sides)
        case_b = False
        diff_axes = [
            ax
            for ax in range(self.dim)
            if B.ranges[ax] != self.box.ranges[ax]
        ]
        if len(diff_axes) == 1:
            ax = diff_axes[0]
            lo, hi = self.box.ranges[ax]
            blo, bhi = B.ranges[ax]
            lower_half = blo == lo and lo < bhi < hi  # {x_ax <= bhi}
            upper_half = bhi == hi and lo < blo < hi  # {x_ax >= blo}
            case_b = lower_half or upper_half
        if not (case_a or case_b):
            return False
        pieces = self.rectangle_pieces(B)
        if pieces.s2 != 0 and pieces.bd == 0:
            return False
        return True

    def well_separates(self, B: Box, P1, P2) -> bool:
        """True iff B is good, P1 lives in S2(B), P2 in S2c(B), and neither
        touches the boundary layer dS2(B). Asymmetric in (P1, P2)."""
        if self.is_good_rectangle(B) is not True:
            return False
        pieces = self.rectangle_pieces(B)
        m1 = _as_mask(P1)
        m2 = _as_mask(P2)
        if m1 & ~pieces.s2 or m2 & ~pieces.s2c:
            return False
        return not ((m1 | m2) & pieces.bd)

    def candidate_separators(self):
        """All classifier-good rectangles, in lexicographic range order.

        The list is the working set for knot decompositions and maximality
        certificates; it is cached per complex.
        """
        if self._separators_cache is not None:
            return self._separators_cache
        side = self.box.sides[0]
        boxes = []
        if self.dim >= 3:
            per_axis = []
            for lo, hi in self.box.ranges:
                opts = [
                    (a, b)
                    for a in range(lo, hi + 1)
                    for b in range(a, hi + 1)
                    if b - a < side
                ]
                per_axis.append(sorted(opts))
            for ranges in product(*per_axis):
                boxes.append(Box(tuple(ranges)))
            for ax in range(self.dim):
                lo, hi = self.box.ranges[ax]
                for k in range(lo + 1, hi):
                    lower = list(self.box.ranges)
                    lower[ax] = (lo, k)
                    boxes.append(Box(tuple(lower)))
                    upper = list(self.box.ranges)
                    upper[ax] = (k, hi)
                    boxes.append(Box(tuple(upper)))
        boxes.sort(key=lambda b: b.ranges)
        out = []
        for b in boxes:
            if self.is_good_rectangle(b) is True:
                out.append((b, self.rectangle_pieces(b)))
        self._separators_cache = tuple(out)
        return self._separators_cache

    def split_scan_candidates(self):
        """Candidate separators reordered for fast existence checks.

        Half spaces split almost everything splittable, so they go first,
        then boxes by descending plaquette count. Only for boolean "is
        there any split" scans; order-sensitive code must use
        candidate_separators().
        """
        if getattr(self, "_scan_cache", None) is None:
            cands = self.candidate_separators()

            def rank(item):
                box, pieces = item
                is_half = any(
                    box.ranges[ax] != self.box.ranges[ax] for ax in range(self.dim)
                ) and box.sides.count(self.box.sides[0]) == self.dim - 1
                return (0 if is_half else 1, -bin(pieces.s2).count("1"), box.ranges)

            self._scan_cache = tuple(sorted(cands, key=rank))
        return self._scan_cache


def build_complex(box: Box) -> CellComplex:
    """Construct the cell complex of a box lattice (see CellComplex)."""
    return CellComplex(box)


def cell_counts(box: Box) -> tuple[int, int, int, int]:
    """Closed-form (vertices, edges, plaquettes, 3-cells) counts for a box."""
    sides = box.sides
    dim = box.dim
    n_v = 1
    for s in sides:
        n_v *= s + 1

    def count_k(k):
        total = 0
        for axes in combinations(range(dim), k):
            term = 1
            for ax in range(dim):
                term *= sides[ax] if ax in axes else sides[ax] + 1
            total += term
        return total

    return n_v, count_k(1), count_k(2), count_k(3) if dim >= 3 else 0


@dataclass
class SpanningTree:
    """A rooted spanning tree of the lattice 1-skeleton.

    ``parent_*`` arrays give, for every non-root vertex, the tree edge
    towards the root; ``path_edges`` returns the word w_x from the root to
    x. Co-tree edges are indexed by their position in ``cotree``.
    """

    complex: CellComplex
    root: int
    in_tree: np.ndarray  # bool per edge
    parent_vertex: np.ndarray
    parent_edge: np.ndarray
    parent_sign: np.ndarray  # +1 if the tree edge is traversed positively root->x
    cotree: np.ndarray = field(init=False)
    cotree_pos: dict = field(init=False)

    def __post_init__(self):
        self.cotree = np.where(~self.in_tree)[0].astype(np.int32)
        self.cotree_pos = {int(e): i for i, e in enumerate(self.cotree)}

    @property
    def n_tree_edges(self) -> int:
        return int(self.in_tree.sum())

    @property
    def n_cotree(self) -> int:
        return len(self.cotree)

    def path_edges(self, x: int) -> list[tuple[int, int]]:
        """Oriented edges of the unique tree path from the root to x."""
        rev = []
        v = x
        while v != self.root:
            rev.append((int(self.parent_edge[v]), int(self.parent_sign[v])))
            v = int(self.parent_vertex[v])
        rev.reverse()
        return rev


def _tree_from_edges(cx: CellComplex, root: int, edge_ids) -> SpanningTree:
    """Orient a given spanning edge set from the root via BFS."""
    adj = [[] for _ in range(cx.n_vertices)]
    for eid in edge_ids:
        t, h = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        adj[t].append((h, eid, 1))
        adj[h].append((t, eid, -1))
    in_tree = np.zeros(cx.n_edges, dtype=bool)
    in_tree[list(edge_ids)] = True
    parent_vertex = np.full(cx.n_vertices, -1, dtype=np.int32)
    parent_edge = np.full(cx.n_vertices, -1, dtype=np.int32)
    parent_sign = np.zeros(cx.n_vertices, dtype=np.int8)
    seen = np.zeros(cx.n_vertices, dtype=bool)
    seen[root] = True
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for w, eid, sign in sorted(adj[v]):
                if not seen[w]:
                    seen[w] = True
                    parent_vertex[w] = v
                    parent_edge[w] = eid
                    parent_sign[w] = sign
                    nxt.append(w)
        frontier = nxt
    if not seen.all():
        raise LatticeError("edge set does not span the lattice")
    return SpanningTree(cx, root, in_tree, parent_vertex, parent_edge, parent_sign)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def spanning_tree(cx: CellComplex, root: int = 0) -> SpanningTree:
    """Lexicographic breadth-first spanning tree rooted at ``root``."""
    adj = [[] for _ in range(cx.n_vertices)]
    for eid in range(cx.n_edges):
        t, h = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
        adj[t].append((h, eid))
        adj[h].append((t, eid))
    seen = np.zeros(cx.n_vertices, dtype=bool)
    seen[root] = True
    chosen = []
    frontier = [root]
    while frontier:
        nxt = []
        for v in sorted(frontier):
            for w, eid in sorted(adj[v]):
                if not seen[w]:
                    seen[w] = True
                    chosen.append(eid)
                    nxt.append(w)
        frontier = nxt
    return _tree_from_edges(cx, root, chosen)


def constrained_spanning_tree(cx: CellComplex, B: Box, root: int | None = None) -> SpanningTree:
    """Spanning tree containing forests of dS2(B), S2(B), and S2c(B).

    Built Kruskal-style in four stages (boundary edges, then S2 edges, then
    S2c edges, then any remainder), each stage scanning edges in index
    order, so the restriction of the tree to each piece is a maximal
    spanning forest of that piece's 1-skeleton.
    """
    pieces = cx.rectangle_pieces(B)
    uf = _UnionFind(cx.n_vertices)
    chosen = []

    def absorb(edge_ids):
        for eid in sorted(edge_ids):
            if uf.union(int(cx.edge_tail[eid]), int(cx.edge_head[eid])):
                chosen.append(eid)

    absorb(pieces.bd_edges)
    absorb(pieces.s2_edges)
    absorb(pieces.s2c_edges)
    absorb(range(cx.n_edges))
    if root is None:
        root = 0
    return _tree_from_edges(cx, root, chosen)


def tree_restriction_is_spanning_forest(
    cx: CellComplex, tree: SpanningTree, edge_set
) -> bool:
    """Structural check: tree edges inside ``edge_set`` form a forest with
    the same connected components as the subgraph induced by ``edge_set``."""
    sub = _UnionFind(cx.n_vertices)
    n_sub_edges = 0
    for eid in edge_set:
        sub.union(int(cx.edge_tail[eid]), int(cx.edge_head[eid]))
    tre = _UnionFind(cx.n_vertices)
    for eid in edge_set:
        if tree.in_tree[eid]:
            if not tre.union(int(cx.edge_tail[eid]), int(cx.edge_head[eid])):
                return False  # cycle inside the piece
            n_sub_edges += 1
    verts = set()
    for eid in edge_set:
        verts.add(int(cx.edge_tail[eid]))
        verts.add(int(cx.edge_head[eid]))
    for v in verts:
        for w in verts:
            if sub.find(v) == sub.find(w) and tre.find(v) != tre.find(w):
                return False
    return True


def plaquette_set_distance(cx: CellComplex, P1, P2) -> int:
    """Minimal l-infinity distance between vertices of P1 and vertices of P2."""
    if not P1 or not P2:
        raise LatticeError("distance of empty plaquette sets")
    best = None
    for p in P1:
        for q in P2:
            gaps = []
            for ax in range(cx.dim):
                lo1, hi1 = cx.plq_min[p, ax], cx.plq_max[p, ax]
                lo2, hi2 = cx.plq_min[q, ax], cx.plq_max[q, ax]
                gaps.append(max(0, lo2 - hi1, lo1 - hi2))
            d = max(gaps)
            if best is None or d < best:
                best = d
    return int(best)
