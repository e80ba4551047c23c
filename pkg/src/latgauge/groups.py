"""Finite groups as dense lookup tables, plus unitary representations.

Group elements are integer indices and index 0 is always the identity, so
every downstream consumer (enumeration, sampling kernels, homomorphism
solvers) works purely with table lookups. A representation carries one
unitary matrix per element and caches its character; the weight function
``phi_beta`` and the gap ``delta_G`` are derived from the character only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

GAP_TOL = 1e-12
UNITARY_TOL = 1e-12


class GroupError(ValueError):
    """Invalid group family, parameter, or representation."""


@dataclass(frozen=True)
class GroupTable:
    """A finite group given by its multiplication and inverse tables.

    ``mult[a, b]`` is the index of the product a*b and ``inv[a]`` the index
    of a^-1. Element 0 is the identity. Instances are immutable and safe to
    share between threads/processes.
    """

    name: str
    params: tuple[int, ...]
    order: int
    mult: np.ndarray  # int32, shape (order, order)
    inv: np.ndarray  # int32, shape (order,)

    identity: int = 0

    def __post_init__(self):
        self.mult.setflags(write=False)
        self.inv.setflags(write=False)

    def mul(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def invert(self, a: int) -> int:
        return int(self.inv[a])

    def product(self, elems) -> int:
        g = self.identity
        for h in elems:
            g = int(self.mult[g, h])
        return g

    def conjugate(self, g: int, h: int) -> int:
        """h^-1 g h."""
        return int(self.mult[self.mult[self.inv[h], g], h])

    def label(self) -> str:
        if self.params:
            return f"{self.name} {' '.join(str(p) for p in self.params)}"
        return self.name


@dataclass(frozen=True)
class UnitaryRep:
    """A unitary matrix representation with cached character."""

    dim: int
    matrices: np.ndarray  # complex128, shape (order, dim, dim)
    character: np.ndarray = field(init=False)  # complex128, shape (order,)

    def __post_init__(self):
        chars = np.trace(self.matrices, axis1=1, axis2=2)
        object.__setattr__(self, "character", chars)
        self.matrices.setflags(write=False)
        self.character.setflags(write=False)

    @property
    def order(self) -> int:
        return self.matrices.shape[0]

    def validate(self, table: GroupTable, tol: float = UNITARY_TOL) -> None:
        """Check unitarity and the homomorphism property entrywise."""
        n, d = self.order, self.dim
        if n != table.order:
            raise GroupError("representation size does not match group order")
        eye = np.eye(d)
        for g in range(n):
            m = self.matrices[g]
            if not np.allclose(m @ m.conj().T, eye, atol=tol):
                raise GroupError(f"matrix for element {g} is not unitary")
        for a in range(n):
            for b in range(n):
                prod = self.matrices[a] @ self.matrices[b]
                if not np.allclose(prod, self.matrices[table.mult[a, b]], atol=tol):
                    raise GroupError(f"rho({a})rho({b}) != rho({a}*{b})")


def _table_from_mult(name: str, params: tuple[int, ...], mult: np.ndarray) -> GroupTable:
    order = mult.shape[0]
    inv = np.empty(order, dtype=np.int32)
    for g in range(order):
        hits = np.where(mult[g] == 0)[0]
        if len(hits) != 1:
            raise GroupError(f"element {g} has no unique inverse")
        inv[g] = hits[0]
    return GroupTable(name=name, params=params, order=order, mult=mult, inv=inv)


def _cyclic(n: int) -> tuple[GroupTable, UnitaryRep]:
    if n < 2:
        raise GroupError("cyclic group needs order >= 2")
    idx = np.arange(n)
    mult = (idx[:, None] + idx[None, :]) % n
    table = _table_from_mult("cyclic", (n,), mult.astype(np.int32))
    mats = np.array([[[cmath.exp(2j * math.pi * k / n)]] for k in range(n)])
    return table, UnitaryRep(dim=1, matrices=mats)


def _dihedral(n: int) -> tuple[GroupTable, UnitaryRep]:
    # Element (f, j) = r^j s^f, indexed f*n + j; r^{j1}s^{f1} r^{j2}s^{f2}
    # = r^{j1 + (-1)^{f1} j2} s^{f1+f2}.
    if n < 3:
        raise GroupError("dihedral group needs n >= 3")
    order = 2 * n
    mult = np.empty((order, order), dtype=np.int32)
    for f1 in range(2):
        for j1 in range(n):
            for f2 in range(2):
                for j2 in range(n):
                    j = (j1 + (j2 if f1 == 0 else -j2)) % n
                    f = (f1 + f2) % 2
                    mult[f1 * n + j1, f2 * n + j2] = f * n + j
    table = _table_from_mult("dihedral", (n,), mult)
    mats = np.zeros((order, 2, 2), dtype=complex)
    refl = np.array([[1.0, 0.0], [0.0, -1.0]])
    for f in range(2):
        for j in range(n):
            th = 2 * math.pi * j / n
            rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
            mats[f * n + j] = rot @ refl if f else rot
    return table, UnitaryRep(dim=2, matrices=mats)


def _symmetric3() -> tuple[GroupTable, UnitaryRep]:
    perms = sorted(permutations(range(3)))  # identity (0,1,2) sorts first
    index = {p: i for i, p in enumerate(perms)}
    order = 6
    mult = np.empty((order, order), dtype=np.int32)
    for a, pa in enumerate(perms):
        for b, pb in enumerate(perms):
            comp = tuple(pa[pb[x]] for x in range(3))  # (a*b)(x) = a(b(x))
            mult[a, b] = index[comp]
    table = _table_from_mult("symmetric", (3,), mult)
    # Standard 2-dim rep: permutation matrices projected onto the invariant
    # plane orthogonal to (1,1,1), in an orthonormal basis.
    basis = np.array([[1, -1, 0], [1, 1, -2]], dtype=float)
    basis = (basis.T / np.linalg.norm(basis, axis=1)).T  # rows orthonormal
    mats = np.zeros((order, 2, 2), dtype=complex)
    for a, pa in enumerate(perms):
        pm = np.zeros((3, 3))
        for x in range(3):
            pm[pa[x], x] = 1.0
        mats[a] = basis @ pm @ basis.T
    return table, UnitaryRep(dim=2, matrices=mats)


def _quaternion8() -> tuple[GroupTable, UnitaryRep]:
    # Elements ordered 1, -1, i, -i, j, -j, k, -k with the 2-dim rep
    # i -> diag(i, -i), j -> [[0,1],[-1,0]], k = i*j. Entries stay in
    # {0, +-1, +-i}, so products match exactly.
    one = np.eye(2, dtype=complex)
    mi = np.array([[1j, 0], [0, -1j]])
    mj = np.array([[0, 1], [-1, 0]], dtype=complex)
    mk = mi @ mj
    mats = np.array([one, -one, mi, -mi, mj, -mj, mk, -mk])
    order = 8
    mult = np.empty((order, order), dtype=np.int32)
    for a in range(order):
        for b in range(order):
            prod = mats[a] @ mats[b]
            hits = [c for c in range(order) if np.array_equal(prod, mats[c])]
            if len(hits) != 1:
                raise GroupError("quaternion table construction failed")
            mult[a, b] = hits[0]
    table = _table_from_mult("quaternion", (8,), mult)
    return table, UnitaryRep(dim=2, matrices=mats)


def builtin_group(name: str, *params: int) -> tuple[GroupTable, UnitaryRep]:
    """Build a named finite group and its canonical unitary representation.

    Families: ``cyclic n`` (n >= 2, 1-dim rep e^{2 pi i k/n}), ``dihedral n``
    (n >= 3, standard 2-dim rep), ``symmetric 3`` (standard 2-dim rep),
    ``quaternion 8`` (2-dim rep). Element ordering is deterministic.
    """
    if name == "cyclic":
        if len(params) != 1:
            raise GroupError("cyclic takes one parameter")
        return _cyclic(params[0])
    if name == "dihedral":
        if len(params) != 1:
            raise GroupError("dihedral takes one parameter")
        return _dihedral(params[0])
    if name == "symmetric":
        if params not in ((), (3,)):
            raise GroupError("only symmetric 3 is built in")
        return _symmetric3()
    if name == "quaternion":
        if params not in ((), (8,)):
            raise GroupError("only quaternion 8 is built in")
        return _quaternion8()
    raise GroupError(f"unknown group family {name!r}")


def conjugacy_classes(table: GroupTable) -> list[tuple[int, ...]]:
    """Partition element indices into conjugacy classes.

    Classes are sorted internally and ordered by least member, so the
    output is deterministic. Brute force over all conjugators.
    """
    seen = [False] * table.order
    classes = []
    for g in range(table.order):
        if seen[g]:
            continue
        orbit = {table.conjugate(g, h) for h in range(table.order)}
        for x in orbit:
            seen[x] = True
        classes.append(tuple(sorted(orbit)))
    classes.sort(key=lambda c: c[0])
    return classes


def class_of(table: GroupTable) -> np.ndarray:
    """Map each element index to the index of its conjugacy class."""
    out = np.empty(table.order, dtype=np.int32)
    for ci, cls in enumerate(conjugacy_classes(table)):
        for g in cls:
            out[g] = ci
    return out


def is_class_function(table: GroupTable, values, tol: float = 1e-12) -> bool:
    """True iff ``values`` (one complex per element) is conjugation invariant."""
    vals = np.asarray(values, dtype=complex)
    if vals.shape != (table.order,):
        return False
    for cls in conjugacy_classes(table):
        if np.max(np.abs(vals[list(cls)] - vals[cls[0]])) > tol:
            return False
    return True


def gap_values(rep: UnitaryRep) -> np.ndarray:
    """Re(chi(1) - chi(g)) for every element, as float64."""
    chi = rep.character
    return np.real(chi[0] - chi)


def delta_G(table: GroupTable, rep: UnitaryRep) -> float:
    """Minimal character gap min_{g != 1} Re(chi(1) - chi(g)).

    Raises GroupError when the gap is below tolerance: such a representation
    cannot distinguish some nonidentity element and the large-beta bounds
    all degenerate.
    """
    if table.order < 2:
        raise GroupError("delta_G needs |G| >= 2")
    gaps = gap_values(rep)[1:]
    value = float(np.min(gaps))
    if value <= GAP_TOL:
        raise GroupError(f"representation has no character gap (min {value:g})")
    return value


def phi_beta(rep: UnitaryRep, beta: float, g: int) -> float:
    """Per-plaquette weight exp(-beta Re(chi(1) - chi(g))); 1 at the identity."""
    if beta < 0:
        raise GroupError("beta must be nonnegative")
    return math.exp(-beta * float(np.real(rep.character[0] - rep.character[g])))


def phi_beta_table(rep: UnitaryRep, beta: float) -> np.ndarray:
    """phi_beta for all elements at once (float64 vector)."""
    if beta < 0:
        raise GroupError("beta must be nonnegative")
    return np.exp(-beta * gap_values(rep))


def beta_threshold(table: GroupTable, rep: UnitaryRep) -> float:
    """Coupling above which the correlation-decay bound applies.

    (114 + 4 ln|G|) / delta_G, natural logarithm.
    """
    return (114.0 + 4.0 * math.log(table.order)) / delta_G(table, rep)
