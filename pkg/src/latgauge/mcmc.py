"""Single-edge heat-bath Markov chain for the lattice Gibbs measure.

The sampler resamples each edge from its exact conditional distribution
given all plaquettes containing it, sweeping the edges in fixed index
order. Randomness comes from a counter-based Philox generator keyed by
(seed, chain id), so chains are reproducible and independently seedable;
the kernel consumes one uniform per edge update, and the compiled and
pure-Python kernels consume the identical stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .gibbs import GibbsSpec
from .groups import phi_beta_table

MAX_PLAQUETTES_PER_EDGE = 6  # 2(d-1) for d <= 4


@dataclass(frozen=True)
class HeatBathTables:
    """Precomputed lookups consumed by the sweep kernels.

    For edge e and its t-th containing plaquette, the boundary loop is
    rotated so that e is traversed last; ``ctx_edges``/``ctx_signs`` hold
    the three other oriented edges in rotated order and ``e_signs`` the
    orientation of e itself in the loop.
    """

    mult: np.ndarray
    inv: np.ndarray
    phi: np.ndarray
    ctx_edges: np.ndarray
    ctx_signs: np.ndarray
    e_signs: np.ndarray
    n_plq: np.ndarray


def build_tables(spec: GibbsSpec) -> HeatBathTables:
    cx = spec.complex
    n_e = cx.n_edges
    ctx_edges = np.zeros((n_e, MAX_PLAQUETTES_PER_EDGE, 3), dtype=np.int32)
    ctx_signs = np.zeros((n_e, MAX_PLAQUETTES_PER_EDGE, 3), dtype=np.int8)
    e_signs = np.zeros((n_e, MAX_PLAQUETTES_PER_EDGE), dtype=np.int8)
    n_plq = np.zeros(n_e, dtype=np.int32)
    for e in range(n_e):
        for p in cx.edge_plaquettes[e]:
            loop = cx.plaquette_loop(p)
            pos = next(i for i, (eid, _) in enumerate(loop) if eid == e)
            rotated = loop[pos + 1 :] + loop[: pos + 1]  # e last
            t = n_plq[e]
            for l in range(3):
                ctx_edges[e, t, l] = rotated[l][0]
                ctx_signs[e, t, l] = rotated[l][1]
            e_signs[e, t] = rotated[3][1]
            n_plq[e] += 1
    # fresh copies: the group tables are frozen read-only, but the kernel
    # memoryviews need writable buffers
    return HeatBathTables(
        mult=spec.group.mult.astype(np.int32, copy=True),
        inv=spec.group.inv.astype(np.int32, copy=True),
        phi=phi_beta_table(spec.rep, spec.beta),
        ctx_edges=ctx_edges,
        ctx_signs=ctx_signs,
        e_signs=e_signs,
        n_plq=n_plq,
    )


def conditional_weights(tables: HeatBathTables, values: np.ndarray, e: int) -> np.ndarray:
    """Unnormalized conditional distribution of edge e given the rest."""
    n = tables.phi.shape[0]
    gs = np.arange(n)
    w = np.ones(n)
    for t in range(tables.n_plq[e]):
        pre = 0
        for l in range(3):
            v = values[tables.ctx_edges[e, t, l]]
            if tables.ctx_signs[e, t, l] < 0:
                v = tables.inv[v]
            pre = tables.mult[pre, v]
        adj = gs if tables.e_signs[e, t] > 0 else tables.inv[gs]
        w *= tables.phi[tables.mult[pre, adj]]
    return w


class HeatBathSampler:
    """Owns one chain's mutable state; chains with distinct ids are independent."""

    def __init__(
        self,
        spec: GibbsSpec,
        seed: int,
        chain_id: int = 0,
        start: np.ndarray | None = None,
        kernel: str | None = None,
    ):
        self.spec = spec
        self.tables = build_tables(spec)
        order = spec.group.order
        impl = kernel
        if impl is None and order > _kernels.COMPILED_MAX_ORDER:
            impl = "python"
        self._sweep_fn, self.kernel = _kernels.get_sweep(impl)
        self.state = (
            spec.identity_config() if start is None else np.array(start, dtype=np.int32)
        )
        key = np.array([seed, chain_id], dtype=np.uint64)
        self._rng = np.random.Generator(np.random.Philox(key=key))
        self.sweeps_done = 0

    def sweep(self) -> np.ndarray:
        uniforms = self._rng.random(self.spec.complex.n_edges)
        self._sweep_fn(
            self.state,
            uniforms,
            self.tables.mult,
            self.tables.inv,
            self.tables.phi,
            self.tables.ctx_edges,
            self.tables.ctx_signs,
            self.tables.e_signs,
            self.tables.n_plq,
        )
        self.sweeps_done += 1
        return self.state

    def run(self, n_sweeps: int) -> np.ndarray:
        for _ in range(n_sweeps):
            self.sweep()
        return self.state


def mcmc_chain(spec: GibbsSpec, steps: int, seed: int, chain_id: int = 0, kernel=None):
    """Yield the chain state after each of ``steps`` sweeps.

    The yielded array is the sampler's live state; copy it if you keep it.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    sampler = HeatBathSampler(spec, seed, chain_id, kernel=kernel)
    for _ in range(steps):
        yield sampler.sweep()
