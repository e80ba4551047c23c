"""Vortex and knot decompositions of plaquette sets.

A vortex is a cluster of plaquettes connected through shared 3-cells. A
knot decomposition is a maximal ordered partition P = K_1 u ... u K_m such
that each prefix part is well separated from the union of the later parts
by a good rectangle, and no part can be split further by any candidate
good rectangle.

The decomposition is computed deterministically: starting from the whole
set, parts are split greedily against the lattice's candidate-separator
list (lexicographic order) until no candidate splits any part; the chain
order and its separators are then recovered by greedily peeling parts that
a candidate separates from everything else. Both the maximality
certificate and the chain property are checkable outputs, not silent
assumptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

from .lattice import Box, CellComplex, plaquette_set_distance


class KnotError(ValueError):
    pass


class KnotChainError(KnotError):
    """A maximal partition was found but no prefix-separator ordering exists
    within the candidate list. Never observed on classified-good candidates;
    raised rather than silently returning an invalid decomposition."""


def vortex_decomposition(cx: CellComplex, P) -> list[frozenset]:
    """Partition P into vortices (3-cell-connected clusters).

    Deterministic: clusters ordered by least plaquette index.
    """
    P = sorted({int(p) for p in P})
    parent = {p: p for p in P}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pset = set(P)
    for p in P:
        for c in cx.plq_cells[p]:
            for q in cx.cells3[c]:
                if q in pset and q != p:
                    ra, rb = find(p), find(q)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
    clusters: dict[int, set] = {}
    for p in P:
        clusters.setdefault(find(p), set()).add(p)
    return [frozenset(clusters[r]) for r in sorted(clusters)]


@dataclass(frozen=True)
class KnotDecomposition:
    """Ordered knots K_1..K_m with separators B_1..B_{m-1}.

    separator i well-separates parts[i] from the union of parts[i+1:].
    """

    complex: CellComplex
    parts: tuple[frozenset, ...]
    separators: tuple[Box, ...]

    @property
    def m(self) -> int:
        return len(self.parts)

    def part_of(self, p: int) -> int:
        for i, part in enumerate(self.parts):
            if p in part:
                return i
        raise KnotError(f"plaquette {p} is not in the decomposed set")

    def part_containing(self, plaquettes) -> int:
        """Index of the single part containing all given plaquettes."""
        idxs = {self.part_of(p) for p in plaquettes}
        if len(idxs) != 1:
            raise KnotError("plaquette set straddles knots")
        return idxs.pop()

    def verify_chain(self) -> bool:
        cx = self.complex
        for i, B in enumerate(self.separators):
            rest = frozenset().union(*self.parts[i + 1 :])
            if not cx.well_separates(B, self.parts[i], rest):
                return False
        return True

    def verify_maximal(self) -> bool:
        for part in self.parts:
            mask = self.complex.mask_of(part)
            if _find_split(self.complex, mask) is not None:
                return False
        return True


def _find_split(cx: CellComplex, mask: int, scan_order: bool = False):
    """First candidate rectangle splitting ``mask``, with the split masks.

    ``scan_order`` switches to the fast existence-scan ordering; only the
    canonical lexicographic order is deterministic for decompositions.
    """
    candidates = (
        cx.split_scan_candidates() if scan_order else cx.candidate_separators()
    )
    for box, pieces in candidates:
        if mask & pieces.bd:
            continue
        lo = mask & pieces.inner
        hi = mask & pieces.outer
        if lo and hi and (lo | hi) == mask:
            return box, lo, hi
    return None


def knot_decomposition(cx: CellComplex, P) -> KnotDecomposition:
    """Deterministic maximal partition with certified chain separators."""
    if cx.dim < 3:
        raise KnotError("knot decomposition needs dimension >= 3")
    P = frozenset(int(p) for p in P)
    if not P:
        return KnotDecomposition(cx, (), ())
    masks = [cx.mask_of(P)]
    while True:
        for i, mask in enumerate(masks):
            found = _find_split(cx, mask)
            if found is not None:
                _, lo, hi = found
                masks[i : i + 1] = [lo, hi]
                break
        else:
            break
    masks.sort(key=lambda m: m & -m)  # by least plaquette index

    # Recover the chain order: peel off any part some candidate separates
    # from the union of the remaining parts.
    parts: list[int] = []
    separators: list[Box] = []
    remaining = list(masks)
    while len(remaining) > 1:
        total = 0
        for m in remaining:
            total |= m
        peeled = None
        for box, pieces in cx.candidate_separators():
            if total & pieces.bd:
                continue
            for i, m in enumerate(remaining):
                if (m & pieces.inner) == m and ((total & ~m) & pieces.outer) == (
                    total & ~m
                ):
                    peeled = (i, box)
                    break
            if peeled:
                break
        if peeled is None:
            raise KnotChainError(
                f"no chain separator peels any of {len(remaining)} parts"
            )
        i, box = peeled
        parts.append(remaining.pop(i))
        separators.append(box)
    parts.extend(remaining)
    return KnotDecomposition(
        cx,
        tuple(frozenset(cx.ids_of(m)) for m in parts),
        tuple(separators),
    )


def is_knot(cx: CellComplex, K) -> bool:
    """A nonempty plaquette set is a knot iff no candidate rectangle splits it."""
    K = frozenset(int(p) for p in K)
    if not K:
        return False
    return _find_split(cx, cx.mask_of(K), scan_order=True) is None


# -- minimal cubes and the linkage relation J ------------------------------------


def minimal_cube(cx: CellComplex, P) -> Box:
    """Minimal-side cube B(P) whose S2 contains P clear of the boundary layer.

    Side length first, then lexicographically least corner. The whole
    lattice is itself an admissible cube, so the search always terminates;
    an explicit error covers the (unreachable) inadmissible case.
    """
    P = frozenset(int(p) for p in P)
    if not P:
        raise KnotError("minimal cube of an empty set")
    mask = cx.mask_of(P)
    lats = cx.box.sides[0]
    los = [r[0] for r in cx.box.ranges]
    his = [r[1] for r in cx.box.ranges]
    for side in range(lats + 1):
        corners = [range(los[a], his[a] - side + 1) for a in range(cx.dim)]
        for corner in product(*corners):
            B = Box.cube(cx.dim, side, corner)
            pieces = cx.rectangle_pieces(B)
            if (mask & pieces.s2) == mask and not (mask & pieces.bd):
                return B
    raise KnotError("no admissible cube contains the set off its boundary layer")


def linked(cx: CellComplex, P, Pp) -> int:
    """J(P, P') = 1 iff P meets B(P') or P' meets B(P)."""
    P = frozenset(int(p) for p in P)
    Pp = frozenset(int(p) for p in Pp)
    bp = cx.plaquette_set_of_box(minimal_cube(cx, P))
    bpp = cx.plaquette_set_of_box(minimal_cube(cx, Pp))
    return 1 if (P & bpp) or (Pp & bp) else 0


@dataclass(frozen=True)
class HierarchyLevels:
    """The merge hierarchy G^0(P), G^1(P), ... up to the level cap."""

    levels: tuple[tuple[frozenset, ...], ...]
    edges: tuple[tuple[tuple[int, int], ...], ...]
    s_star: int | None  # min s with a single vertex, or None if not reached


def hierarchy_graphs(cx: CellComplex, P) -> HierarchyLevels:
    """Iterated J-linkage merging, seeded with the vortex decomposition.

    Level s+1 vertices are the unions of the connected components of level
    s under the J relation. Stops at floor(log2 |P|) + 1 levels or at a
    fixpoint with more than one vertex (s* unreachable).
    """
    if cx.dim < 3:
        raise KnotError("hierarchy graphs need dimension >= 3")
    P = frozenset(int(p) for p in P)
    if not P:
        raise KnotError("hierarchy of an empty set")
    cap = math.floor(math.log2(len(P))) + 1
    current = [frozenset(v) for v in vortex_decomposition(cx, P)]
    levels = [tuple(current)]
    all_edges = []
    s_star = 0 if len(current) == 1 else None
    s = 0
    while s_star is None and s < cap:
        n = len(current)
        cubes = [cx.plaquette_set_of_box(minimal_cube(cx, v)) for v in current]
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if (current[i] & cubes[j]) or (current[j] & cubes[i]):
                    edges.append((i, j))
        all_edges.append(tuple(edges))
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in edges:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
        groups: dict[int, set] = {}
        for i in range(n):
            groups.setdefault(find(i), set()).add(i)
        merged = [
            frozenset().union(*(current[i] for i in members))
            for _, members in sorted(groups.items())
        ]
        if len(merged) == len(current):
            break  # fixpoint without reaching a single vertex
        current = sorted(merged, key=min)
        s += 1
        levels.append(tuple(current))
        if len(current) == 1:
            s_star = s
    return HierarchyLevels(tuple(levels), tuple(all_edges), s_star)


# -- knot enumeration and size bounds ---------------------------------------------


def enumerate_knots_containing(
    cx: CellComplex, p: int, m: int, also_containing=()
) -> list[frozenset]:
    """All knots of size exactly m containing plaquette p (m <= 4).

    Grows candidate sets within the distance horizon allowed by the knot
    size floor (any two plaquettes of a size-m knot are within l-infinity
    distance m - 1) and keeps those no candidate rectangle splits.
    ``also_containing`` restricts the enumeration to knots that contain the
    extra plaquettes as well.
    """
    if m < 1:
        raise KnotError("knot size must be >= 1")
    if m > 4:
        raise KnotError("knot enumeration is capped at size 4")
    base = frozenset({int(p)} | {int(q) for q in also_containing})
    if len(base) > m:
        return []
    if len(base) == m:
        return [base] if is_knot(cx, base) else []
    horizon = m - 1
    pool = [
        q
        for q in range(cx.n_plaquettes)
        if q not in base
        and all(plaquette_set_distance(cx, {b}, {q}) <= horizon for b in base)
    ]
    dist = {}
    for i, a in enumerate(pool):
        for b in pool[i + 1 :]:
            dist[(a, b)] = plaquette_set_distance(cx, {a}, {b})
    out = []
    for extra in combinations(pool, m - len(base)):
        if any(dist[(a, b)] > horizon for a, b in combinations(extra, 2)):
            continue
        K = base | frozenset(extra)
        if is_knot(cx, K):
            out.append(K)
    return out


def knot_size_floor(P1, P2, L: int, K) -> bool:
    """Check |K| >= |P1| + |P2| + L - 1 (K must contain P1 and P2)."""
    P1, P2, K = frozenset(P1), frozenset(P2), frozenset(K)
    if not (P1 <= K and P2 <= K):
        raise KnotError("K must contain both plaquette sets")
    return len(K) >= len(P1) + len(P2) + L - 1
