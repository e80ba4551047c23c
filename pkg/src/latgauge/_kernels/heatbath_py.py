"""Reference heat-bath sweep, pure numpy.

One sweep resamples every edge once, in index order, from its exact
conditional given the plaquettes containing it. For edge e inside
plaquette p the boundary loop is rotated so e comes last; phi is a class
function, so the rotated holonomy pre * g^(sign) has the same weight as
sigma_p. The tables are built in :func:`latgauge.mcmc.build_tables`.

Float operations mirror the compiled kernel exactly (same multiplication
and summation order), so both produce identical samples from identical
uniforms.
"""

import numpy as np


def sweep(values, uniforms, mult, inv, phi, ctx_edges, ctx_signs, e_signs, n_plq):
    n_edges = values.shape[0]
    n = phi.shape[0]
    gs = np.arange(n)
    inv_gs = inv[gs]
    for e in range(n_edges):
        w = np.ones(n)
        for t in range(n_plq[e]):
            pre = 0
            for l in range(3):
                v = values[ctx_edges[e, t, l]]
                if ctx_signs[e, t, l] < 0:
                    v = inv[v]
                pre = mult[pre, v]
            if e_signs[e, t] > 0:
                w *= phi[mult[pre, gs]]
            else:
                w *= phi[mult[pre, inv_gs]]
        cdf = np.cumsum(w)
        g = int(np.searchsorted(cdf, uniforms[e] * cdf[-1], side="right"))
        if g >= n:  # guards the u*total == total rounding corner
            g = n - 1
        values[e] = g
