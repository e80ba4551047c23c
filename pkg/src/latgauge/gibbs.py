"""Edge configurations, the Wilson action, and the finite Gibbs measure.

An edge configuration assigns a group-element index to every positively
oriented edge; traversing an edge backwards reads the inverse. The action
sums the character gap Re(chi(1) - chi(sigma_p)) over plaquettes, and the
Gibbs weight exp(-beta * action) factors as a product of per-plaquette
weights phi_beta(sigma_p).

Desk-scale lattices admit exact enumeration of the measure, which is the
oracle for everything in the homomorphism and swapping layers. Larger runs
go through the heat-bath sampler in :mod:`latgauge.mcmc`.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .groups import (
    GroupTable,
    UnitaryRep,
    delta_G,
    gap_values,
    is_class_function,
    phi_beta_table,
)
from .lattice import Box, CellComplex

DEFAULT_ENUM_CAP = 2**24


class GibbsError(ValueError):
    pass


@dataclass(frozen=True)
class Loop:
    """A closed chain of oriented edges (edge index, sign)."""

    edges: tuple[tuple[int, int], ...]
    start: int

    def __len__(self):
        return len(self.edges)


def make_loop(cx: CellComplex, oriented_edges) -> Loop:
    """Validate head-to-tail chaining and closure, then freeze the loop."""
    edges = tuple((int(e), int(s)) for e, s in oriented_edges)
    if not edges:
        raise GibbsError("empty loop")
    start, cursor = None, None
    for eid, sign in edges:
        tail, head = cx.oriented_endpoints(eid, sign)
        if cursor is None:
            start = tail
        elif tail != cursor:
            raise GibbsError("loop edges do not chain head-to-tail")
        cursor = head
    if cursor != start:
        raise GibbsError("loop does not close")
    return Loop(edges=edges, start=start)


def plaquette_loop(cx: CellComplex, p: int) -> Loop:
    return make_loop(cx, cx.plaquette_loop(p))


@dataclass(frozen=True)
class GibbsSpec:
    """Lattice + group + representation + coupling; immutable and shareable."""

    complex: CellComplex
    group: GroupTable
    rep: UnitaryRep
    beta: float

    def __post_init__(self):
        if self.beta < 0:
            raise GibbsError("beta must be nonnegative")
        delta_G(self.group, self.rep)  # rejects gapless representations

    def identity_config(self) -> np.ndarray:
        return np.zeros(self.complex.n_edges, dtype=np.int32)

    def random_config(self, rng) -> np.ndarray:
        return rng.integers(0, self.group.order, self.complex.n_edges).astype(np.int32)

    # -- holonomies -----------------------------------------------------------

    def oriented_value(self, config, eid: int, sign: int) -> int:
        v = int(config[eid])
        return v if sign > 0 else self.group.invert(v)

    def holonomy(self, config, loop: Loop) -> int:
        g = self.group.identity
        for eid, sign in loop.edges:
            g = self.group.mul(g, self.oriented_value(config, eid, sign))
        return g

    def plaquette_value(self, config, p: int) -> int:
        g = self.group.identity
        mult = self.group.mult
        inv = self.group.inv
        for eid, sign in zip(
            self.complex.plq_loop_edges[p], self.complex.plq_loop_signs[p]
        ):
            v = config[eid]
            g = mult[g, v if sign > 0 else inv[v]]
        return int(g)

    def plaquette_values(self, config) -> np.ndarray:
        out = np.empty(self.complex.n_plaquettes, dtype=np.int32)
        for p in range(self.complex.n_plaquettes):
            out[p] = self.plaquette_value(config, p)
        return out

    def wilson(self, config, loop: Loop, chi0) -> complex:
        """Wilson observable chi0(sigma_gamma); chi0 must be a class function."""
        vals = np.asarray(chi0, dtype=complex)
        if not is_class_function(self.group, vals):
            raise GibbsError("chi0 is not constant on conjugacy classes")
        return complex(vals[self.holonomy(config, loop)])

    # -- action and weight ------------------------------------------------------

    def action(self, config) -> float:
        gaps = gap_values(self.rep)
        return float(gaps[self.plaquette_values(config)].sum())

    def weight(self, config) -> float:
        phis = phi_beta_table(self.rep, self.beta)
        return float(np.prod(phis[self.plaquette_values(config)]))

    def support(self, config) -> frozenset:
        """Plaquettes with nonidentity value (the excitation set of sigma)."""
        vals = self.plaquette_values(config)
        return frozenset(int(p) for p in np.where(vals != 0)[0])

    # -- exact enumeration -------------------------------------------------------

    def enumerate_mu(self, cap: int = DEFAULT_ENUM_CAP) -> "ExactDistribution":
        n = self.group.order
        n_e = self.complex.n_edges
        total = n**n_e
        if total > cap:
            raise GibbsError(
                f"enumeration of {n}^{n_e} = {total} configurations exceeds cap {cap}"
            )
        configs = _all_configs(n, n_e)
        weights = self.weights_of(configs)
        z = float(weights.sum())
        return ExactDistribution(self, configs, weights, z)

    def weights_of(self, configs: np.ndarray) -> np.ndarray:
        """Gibbs weights (unnormalized) for a batch of configurations."""
        phis = phi_beta_table(self.rep, self.beta)
        vals = self.plaquette_values_batch(configs)
        return np.prod(phis[vals], axis=1)

    def plaquette_values_batch(self, configs: np.ndarray) -> np.ndarray:
        """Plaquette holonomies for a batch: shape (N, n_plaquettes)."""
        mult = self.group.mult
        inv = self.group.inv
        N = configs.shape[0]
        out = np.empty((N, self.complex.n_plaquettes), dtype=np.int32)
        for p in range(self.complex.n_plaquettes):
            acc = np.zeros(N, dtype=np.int32)
            for eid, sign in zip(
                self.complex.plq_loop_edges[p], self.complex.plq_loop_signs[p]
            ):
                col = configs[:, eid]
                if sign < 0:
                    col = inv[col]
                acc = mult[acc, col]
            out[:, p] = acc
        return out


def _all_configs(n: int, n_e: int) -> np.ndarray:
    """All n^n_e configurations as an (N, n_e) int32 array, mixed-radix order
    with the last edge fastest (config index = row index)."""
    total = n**n_e
    idx = np.arange(total)
    out = np.empty((total, n_e), dtype=np.int32)
    for e in range(n_e - 1, -1, -1):
        out[:, e] = idx % n
        idx //= n
    return out


@dataclass(frozen=True)
class ExactDistribution:
    """The exact finite Gibbs distribution on all edge configurations."""

    spec: GibbsSpec
    configs: np.ndarray
    weights: np.ndarray
    z: float

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.z

    def expectation(self, values: np.ndarray):
        return (self.probabilities * values).sum()


# -- covariance estimation -------------------------------------------------------


def estimate_cov(f1, f2, stream, batch_size: int):
    """Batch-means covariance of two observables over a sample stream.

    The stream yields edge configurations; both observables are evaluated on
    every sample. The point estimate is the plug-in covariance over all
    samples (computed after shifting by the first value, so a constant
    observable gives exactly zero); the standard error is a delete-one-batch
    jackknife over ``n // batch_size`` batches. Requires at least 10 batches.
    """
    xs, ys = [], []
    for config in stream:
        xs.append(f1(config))
        ys.append(f2(config))
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    return estimate_cov_values(x, y, batch_size)


def estimate_cov_values(x: np.ndarray, y: np.ndarray, batch_size: int):
    n_batches = len(x) // batch_size
    if n_batches < 10:
        raise GibbsError(f"need >= 10 batches, got {n_batches}")
    n = n_batches * batch_size
    x = np.asarray(x, dtype=float)[:n] - x[0]
    y = np.asarray(y, dtype=float)[:n] - y[0]

    def cov_of(xa, ya):
        return float(np.mean(xa * ya) - np.mean(xa) * np.mean(ya))

    estimate = cov_of(x, y)
    xb = x.reshape(n_batches, batch_size)
    yb = y.reshape(n_batches, batch_size)
    mask = np.ones(n_batches, dtype=bool)
    deletions = np.empty(n_batches)
    for k in range(n_batches):
        mask[k] = False
        deletions[k] = cov_of(xb[mask].ravel(), yb[mask].ravel())
        mask[k] = True
    centre = deletions.mean()
    se = float(np.sqrt((n_batches - 1) / n_batches * np.sum((deletions - centre) ** 2)))
    return estimate, se


# -- sample stream persistence -------------------------------------------------
#
# Binary layout (little endian):
#   magic   4 bytes  b"LGS1"
#   dim     u32
#   ranges  dim x (i64 lo, i64 hi)
#   group   u32 name length, name utf-8, u32 param count, params as i64
#   beta    f64
#   seed    u64
#   n_edges u64
#   n_samples u64
#   data    n_samples rows of n_edges u16 element indices

STREAM_MAGIC = b"LGS1"


def save_stream(path, spec: GibbsSpec, seed: int, samples: np.ndarray) -> None:
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[1] != spec.complex.n_edges:
        raise GibbsError("samples must be (n_samples, n_edges)")
    name = spec.group.name.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(STREAM_MAGIC)
        fh.write(struct.pack("<I", spec.complex.dim))
        for lo, hi in spec.complex.box.ranges:
            fh.write(struct.pack("<qq", lo, hi))
        fh.write(struct.pack("<I", len(name)))
        fh.write(name)
        fh.write(struct.pack("<I", len(spec.group.params)))
        for p in spec.group.params:
            fh.write(struct.pack("<q", p))
        fh.write(struct.pack("<d", spec.beta))
        fh.write(struct.pack("<Q", seed))
        fh.write(struct.pack("<QQ", samples.shape[1], samples.shape[0]))
        fh.write(np.ascontiguousarray(samples, dtype="<u2").tobytes())


def load_stream(path):
    """Read a sample stream; returns (header dict, samples int32 array)."""
    with open(path, "rb") as fh:
        if fh.read(4) != STREAM_MAGIC:
            raise GibbsError(f"{path}: not a latgauge sample stream")
        (dim,) = struct.unpack("<I", fh.read(4))
        ranges = tuple(struct.unpack("<qq", fh.read(16)) for _ in range(dim))
        (name_len,) = struct.unpack("<I", fh.read(4))
        name = fh.read(name_len).decode("utf-8")
        (n_params,) = struct.unpack("<I", fh.read(4))
        params = tuple(struct.unpack("<q", fh.read(8))[0] for _ in range(n_params))
        (beta,) = struct.unpack("<d", fh.read(8))
        (seed,) = struct.unpack("<Q", fh.read(8))
        n_edges, n_samples = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(2 * n_edges * n_samples), dtype="<u2")
    header = {
        "box": Box(ranges),
        "group": name,
        "params": params,
        "beta": beta,
        "seed": seed,
    }
    return header, data.reshape(n_samples, n_edges).astype(np.int32)
