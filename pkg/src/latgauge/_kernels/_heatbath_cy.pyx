# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled heat-bath sweep; see heatbath_py for the reference semantics."""


def sweep(int[::1] values, double[::1] uniforms, int[:, ::1] mult, int[::1] inv,
          double[::1] phi, int[:, :, ::1] ctx_edges, signed char[:, :, ::1] ctx_signs,
          signed char[:, ::1] e_signs, int[::1] n_plq):
    cdef Py_ssize_t n_edges = values.shape[0]
    cdef int n = <int> phi.shape[0]
    cdef double[64] w
    cdef Py_ssize_t e
    cdef int t, l, g, v, pre, npe, picked
    cdef double total, target, acc
    if n > 64:
        raise ValueError("compiled kernel supports group order <= 64")
    for e in range(n_edges):
        npe = n_plq[e]
        for g in range(n):
            w[g] = 1.0
        for t in range(npe):
            pre = 0
            for l in range(3):
                v = values[ctx_edges[e, t, l]]
                if ctx_signs[e, t, l] < 0:
                    v = inv[v]
                pre = mult[pre, v]
            if e_signs[e, t] > 0:
                for g in range(n):
                    w[g] = w[g] * phi[mult[pre, g]]
            else:
                for g in range(n):
                    w[g] = w[g] * phi[mult[pre, inv[g]]]
        total = 0.0
        for g in range(n):
            total += w[g]
        target = uniforms[e] * total
        acc = 0.0
        picked = n - 1
        for g in range(n):
            acc += w[g]
            if target < acc:
                picked = g
                break
        values[e] = picked
