import math

import numpy as np
import pytest

from latgauge.groups import builtin_group
from latgauge.higgs import (
    HiggsConfig,
    HiggsError,
    ReducedConfig,
    c_constant,
    c_frak_large,
    c_frak_small,
    charge_jump_edges,
    current_edge_weight,
    current_weight,
    excited_edges,
    flip_map,
    higgs_hamiltonian,
    higgs_phi2_large,
    higgs_phi2_large_bound,
    higgs_phi2_small,
    higgs_phi2_small_bound,
    higgs_support,
    higgs_swap_large_kappa,
    higgs_swap_small_kappa,
    phase_boundaries,
    quotient_by_Ht,
    reduced_support,
    reduced_weight,
)
from latgauge.homomorphism import (
    GeneratorBasis,
    gauge_fix,
    psi_of_config,
    solve_support_constraints,
    trivial_homomorphism,
)
from latgauge.lattice import Box, build_complex


@pytest.fixture(scope="module")
def s3_setup():
    S3, rho = builtin_group("symmetric", 3)
    quotient = quotient_by_Ht(2, S3, rho)
    cx = build_complex(Box(((0, 2),) * 3))
    return cx, S3, rho, quotient


@pytest.fixture(scope="module")
def z2_setup():
    Z2, rho = builtin_group("cyclic", 2)
    quotient = quotient_by_Ht(4, Z2, rho)
    return Z2, rho, quotient


def test_quotient_s3(s3_setup):
    _, S3, rho, q = s3_setup
    assert q.order == 2 and q.ht_order == 1
    assert q.value(0) == pytest.approx(1.0)
    assert q.value(1) == pytest.approx(-1.0)


def test_quotient_degenerate():
    Z2, rho = builtin_group("cyclic", 2)
    with pytest.raises(HiggsError):
        quotient_by_Ht(2, Z2, rho)  # rho(g) = -1 * I absorbs the whole charge group


def test_quotient_z4_over_z2(z2_setup):
    _, _, q = z2_setup
    assert q.h_order == 4 and q.ht_order == 2 and q.order == 2
    assert q.value(1) == pytest.approx(1j)


def test_trivial_config(s3_setup):
    cx, S3, rho, q = s3_setup
    c = HiggsConfig(
        np.zeros(cx.n_edges, dtype=np.int32), np.zeros(cx.n_vertices, dtype=np.int8)
    )
    assert higgs_hamiltonian(cx, S3, rho, q, c, 2.0, 3.0) == 0.0
    assert excited_edges(cx, c) == frozenset()
    assert higgs_support(cx, c) == frozenset()


def test_hamiltonian_nonpositive_and_flip_value(s3_setup):
    cx, S3, rho, q = s3_setup
    rng = np.random.default_rng(0)
    for _ in range(10):
        c = HiggsConfig(
            rng.integers(0, 6, cx.n_edges).astype(np.int32),
            rng.integers(0, 2, cx.n_vertices).astype(np.int8),
        )
        assert higgs_hamiltonian(cx, S3, rho, q, c, 1.5, 2.5) <= 1e-12
    phi = np.zeros(cx.n_vertices, dtype=np.int8)
    phi[0] = 1
    c = HiggsConfig(np.zeros(cx.n_edges, dtype=np.int32), phi)
    deg = sum(
        1 for e in range(cx.n_edges) if 0 in (int(cx.edge_tail[e]), int(cx.edge_head[e]))
    )
    kappa = 3.0
    # both orientations counted: each cut edge costs 2 * 2d
    expect = kappa * 2.0 * (-2 * rho.dim) * deg
    assert higgs_hamiltonian(cx, S3, rho, q, c, 1.5, kappa) == pytest.approx(expect)
    assert excited_edges(cx, c) == frozenset(
        e for e in range(cx.n_edges) if 0 in (int(cx.edge_tail[e]), int(cx.edge_head[e]))
    )


def test_hamiltonian_global_shift_invariance(s3_setup):
    cx, S3, rho, q = s3_setup
    rng = np.random.default_rng(1)
    sigma = rng.integers(0, 6, cx.n_edges).astype(np.int32)
    phi = rng.integers(0, 2, cx.n_vertices).astype(np.int8)
    h1 = higgs_hamiltonian(cx, S3, rho, q, HiggsConfig(sigma, phi), 1.0, 2.0)
    h2 = higgs_hamiltonian(
        cx, S3, rho, q, HiggsConfig(sigma, ((phi + 1) % 2).astype(np.int8)), 1.0, 2.0
    )
    assert h1 == pytest.approx(h2, abs=1e-9)


def test_support_from_single_gauge_edge(s3_setup):
    cx, S3, rho, q = s3_setup
    sigma = np.zeros(cx.n_edges, dtype=np.int32)
    sigma[0] = 1
    c = HiggsConfig(sigma, np.zeros(cx.n_vertices, dtype=np.int8))
    assert excited_edges(cx, c) == frozenset({0})
    assert higgs_support(cx, c) == frozenset(cx.edge_plaquettes[0])


def test_phase_boundaries_and_flip(s3_setup):
    cx, S3, rho, q = s3_setup
    phi = np.zeros(cx.n_vertices, dtype=np.int8)
    assert phase_boundaries(cx, phi) == []
    phi[0] = 1
    pbs = phase_boundaries(cx, phi)
    assert len(pbs) == 1
    chi = flip_map(cx, q, phi, pbs)
    assert phase_boundaries(cx, ((phi + chi) % 2).astype(np.int8)) == []
    # keeping the boundary: empty selection gives a constant chi
    chi0 = flip_map(cx, q, phi, [])
    assert len(set(chi0.tolist())) == 1


def test_flip_map_nested_islands(s3_setup):
    _, S3, rho, q = s3_setup
    # needs room for two genuinely separated boundaries: a 5^3 lattice with
    # an annulus of flipped charge around an unflipped center
    cx = build_complex(Box(((0, 4),) * 3))
    center = (2, 2, 2)
    phi = np.zeros(cx.n_vertices, dtype=np.int8)
    for vid, v in enumerate(cx.vertices):
        if max(abs(a - b) for a, b in zip(v, center)) <= 1:
            phi[vid] = 1
    phi[cx.vindex[center]] = 0
    pbs = phase_boundaries(cx, phi)
    assert len(pbs) == 2
    # removing only the outer boundary flips the annulus region
    outer = max(pbs, key=len)
    chi = flip_map(cx, q, phi, [outer])
    new_phi = ((phi + chi) % 2).astype(np.int8)
    new_pbs = phase_boundaries(cx, new_phi)
    assert len(new_pbs) == 1
    assert charge_jump_edges(cx, new_phi) == min(pbs, key=len)


def test_flip_map_rejects_partial_boundary(s3_setup):
    cx, S3, rho, q = s3_setup
    phi = np.zeros(cx.n_vertices, dtype=np.int8)
    phi[0] = 1
    (pb,) = phase_boundaries(cx, phi)
    with pytest.raises(HiggsError):
        flip_map(cx, q, phi, [frozenset(list(pb)[:1])])


def _corner_configs(cx, far=False):
    v = cx.n_vertices - 1 if far else 0
    phi = np.zeros(cx.n_vertices, dtype=np.int8)
    phi[v] = 1
    sigma = np.zeros(cx.n_edges, dtype=np.int32)
    c_charge = HiggsConfig(sigma.copy(), phi)
    eid = next(
        e for e in range(cx.n_edges) if v in (int(cx.edge_tail[e]), int(cx.edge_head[e]))
    )
    sigma2 = sigma.copy()
    sigma2[eid] = 3
    c_gauge = HiggsConfig(sigma2, np.zeros(cx.n_vertices, dtype=np.int8))
    return [c_charge, c_gauge]


def test_large_kappa_swap_properties(s3_setup):
    cx, S3, rho, q = s3_setup
    beta, kappa = 1.5, 2.0
    fam1 = _corner_configs(cx)
    fam2 = _corner_configs(cx, far=True)
    p1 = min(higgs_support(cx, fam1[0]))
    p2 = max(higgs_support(cx, fam2[0]))
    B1 = Box(tuple((int(cx.plq_min[p1, a]), int(cx.plq_max[p1, a])) for a in range(3)))
    B2 = Box(tuple((int(cx.plq_min[p2, a]), int(cx.plq_max[p2, a])) for a in range(3)))
    b1s, b2s = cx.plaquette_set_of_box(B1), cx.plaquette_set_of_box(B2)
    for c1 in fam1:
        for c2 in fam2:
            t1, t2 = higgs_swap_large_kappa(cx, S3, rho, q, c1, c2, B1, B2)
            u1, u2 = higgs_swap_large_kappa(cx, S3, rho, q, t1, t2, B1, B2)
            assert np.array_equal(u1.sigma, c1.sigma) and np.array_equal(u1.phi, c1.phi)
            assert np.array_equal(u2.sigma, c2.sigma) and np.array_equal(u2.phi, c2.phi)
            before = higgs_support(cx, c1) | higgs_support(cx, c2) | b1s | b2s
            after = higgs_support(cx, t1) | higgs_support(cx, t2) | b1s | b2s
            assert before == after
            hb = higgs_hamiltonian(cx, S3, rho, q, c1, beta, kappa) + higgs_hamiltonian(
                cx, S3, rho, q, c2, beta, kappa
            )
            ha = higgs_hamiltonian(cx, S3, rho, q, t1, beta, kappa) + higgs_hamiltonian(
                cx, S3, rho, q, t2, beta, kappa
            )
            assert hb == pytest.approx(ha, abs=1e-9)
            # the swap really moves the content of the B2 vortex
            assert np.array_equal(t2.sigma[c2.sigma != 0], c1.sigma[c2.sigma != 0])


def test_large_kappa_swap_same_vortex_rejected(s3_setup):
    cx, S3, rho, q = s3_setup
    c = _corner_configs(cx)[0]
    p = min(higgs_support(cx, c))
    B = Box(tuple((int(cx.plq_min[p, a]), int(cx.plq_max[p, a])) for a in range(3)))
    with pytest.raises(HiggsError):
        higgs_swap_large_kappa(cx, S3, rho, q, c, c, B, B)


def test_c_frak_large_value(s3_setup):
    _, S3, rho, q = s3_setup
    # max over nontrivial (a, b) of 2 Re[a chi(b) - 2] is at a = -1, chi = -1
    assert c_frak_large(rho, q) == pytest.approx(-2.0, abs=1e-12)


def test_higgs_phi2_large_vs_bound(s3_setup):
    cx, S3, rho, q = s3_setup
    corner_edges = [
        e for e in range(cx.n_edges) if 0 in (int(cx.edge_tail[e]), int(cx.edge_head[e]))
    ]
    P = frozenset(p for e in corner_edges for p in cx.edge_plaquettes[e])
    for kappa in (2.0, 4.0):
        val = higgs_phi2_large(cx, S3, rho, q, frozenset(), P, 2.0, kappa)
        bnd = higgs_phi2_large_bound(S3, rho, q, frozenset(), P, kappa)
        assert 0 < val <= bnd
    # P0 = P: exponential factor is 1, pure counting
    bnd0 = higgs_phi2_large_bound(S3, rho, q, P, P, 2.0)
    assert bnd0 == pytest.approx(
        4.0 ** len(P) * 6.0 ** (8 * len(P)) * 2.0 ** (8 * len(P)), rel=1e-9
    )


def test_c_constant(z2_setup):
    Z2, rho, q = z2_setup
    assert c_constant(rho) == 3.0  # dim 1
    _, rho2 = builtin_group("symmetric", 3)
    assert c_constant(rho2) == 5.0  # dim 2 -> 2*2+1


def test_current_marginalization(z2_setup):
    Z2, rho, q = z2_setup
    kappa = 0.3
    for a in range(2):
        for b in range(2):
            w = current_edge_weight(rho, q, a, b, 0)
            s = sum((kappa * w) ** i / math.factorial(i) for i in range(41))
            assert s == pytest.approx(math.exp(kappa * w), rel=1e-12)


def test_current_weight_trivial_current(z2_setup):
    Z2, rho, q = z2_setup
    cx = build_complex(Box(((0, 2), (0, 2))))
    sigma = np.zeros(cx.n_edges, dtype=np.int32)
    phi = np.zeros(cx.n_vertices, dtype=np.int8)
    cur = np.zeros(cx.n_edges, dtype=np.int64)
    assert current_weight(cx, Z2, rho, q, sigma, phi, cur, 1.0, 0.1) == 1.0
    sigma[0] = 1  # two plaquettes excited at gap 2
    w = current_weight(cx, Z2, rho, q, sigma, phi, cur, 1.0, 0.1)
    n_exc = len(cx.edge_plaquettes[0])
    assert w == pytest.approx(math.exp(-2.0 * n_exc), rel=1e-12)


def test_reduced_weight_methods_agree(z2_setup):
    Z2, rho, q = z2_setup
    cx = build_complex(Box(((0, 2), (0, 2))))
    basis = GeneratorBasis(cx)
    sols = solve_support_constraints(basis, Z2, frozenset({0, 1}))
    psi = sols[-1]
    phi = np.zeros(cx.n_vertices, dtype=np.int8)
    phi[4] = 1
    cur = np.zeros(cx.n_edges, dtype=np.int64)
    cur[0] = 1
    cur[5] = 2
    rc = ReducedConfig(psi, phi, cur)
    wf = reduced_weight(basis, Z2, rho, q, rc, 0.7, 0.05, method="fiber")
    wc = reduced_weight(basis, Z2, rho, q, rc, 0.7, 0.05, method="components")
    assert wf == pytest.approx(wc, rel=1e-10)
    wm = reduced_weight(
        basis, Z2, rho, q, rc, 0.7, 0.05, method="mc", mc_samples=40_000,
        rng=np.random.default_rng(0),
    )
    assert wm == pytest.approx(wc, rel=0.05)


def test_reduced_weight_trivial(z2_setup):
    Z2, rho, q = z2_setup
    cx = build_complex(Box(((0, 2), (0, 2))))
    basis = GeneratorBasis(cx)
    rc = ReducedConfig(
        trivial_homomorphism(basis),
        np.zeros(cx.n_vertices, dtype=np.int8),
        np.zeros(cx.n_edges, dtype=np.int64),
    )
    assert reduced_weight(basis, Z2, rho, q, rc, 1.0, 0.1) == 1.0


def test_reduced_weight_fiber_invariance(z2_setup):
    Z2, rho, q = z2_setup
    cx = build_complex(Box(((0, 2), (0, 2))))
    basis = GeneratorBasis(cx)
    sols = solve_support_constraints(basis, Z2, frozenset({0}))
    psi = sols[-1]
    cur = np.zeros(cx.n_edges, dtype=np.int64)
    cur[3] = 1
    phi = np.zeros(cx.n_vertices, dtype=np.int8)
    phi[0] = 1
    rc = ReducedConfig(psi, phi, cur)
    base = reduced_weight(basis, Z2, rho, q, rc, 0.6, 0.04)
    rng = np.random.default_rng(5)
    sigma0 = gauge_fix(psi, Z2)
    for _ in range(5):
        h = rng.integers(0, 2, cx.n_vertices)
        h[basis.root] = 0
        tau = sigma0.copy()
        for e in range(cx.n_edges):
            x, y = int(cx.edge_tail[e]), int(cx.edge_head[e])
            tau[e] = Z2.mult[Z2.mult[h[x], sigma0[e]], Z2.inv[h[y]]]
        alt = reduced_weight(basis, Z2, rho, q, rc, 0.6, 0.04, sigma0=tau)
        assert alt == pytest.approx(base, rel=1e-10)


def test_small_kappa_swap_reduces_to_pure_gauge(z2_setup):
    Z2, rho, q = z2_setup
    cx = build_complex(Box(((0, 2),) * 3))
    basis = GeneratorBasis(cx)
    W1 = cx.plaquette_set_of_box(Box(((0, 1),) * 3))
    W2 = cx.plaquette_set_of_box(Box(((1, 2),) * 3))
    fam = solve_support_constraints(basis, Z2, frozenset(W1 | W2), cap=2**16)
    h1 = next(h for h in fam if h.support(Z2) and h.support(Z2) <= W1)
    h2 = next(h for h in fam if h.support(Z2) and h.support(Z2) <= W2)
    p1 = min(p for p in W1 if cx.plq_min[p, 0] == 0 == cx.plq_max[p, 0])
    p2 = max(p for p in W2 if cx.plq_min[p, 0] == 2 == cx.plq_max[p, 0])
    B1 = Box(tuple((int(cx.plq_min[p1, a]), int(cx.plq_max[p1, a])) for a in range(3)))
    B2 = Box(tuple((int(cx.plq_min[p2, a]), int(cx.plq_max[p2, a])) for a in range(3)))
    zero_phi = np.zeros(cx.n_vertices, dtype=np.int8)
    zero_cur = np.zeros(cx.n_edges, dtype=np.int64)
    rc1 = ReducedConfig(h1, zero_phi, zero_cur)
    rc2 = ReducedConfig(h2, zero_phi, zero_cur)
    t1, t2 = higgs_swap_small_kappa(basis, Z2, rho, q, rc1, rc2, B1, B2)
    from latgauge.swapping import swap_T

    s1, s2 = swap_T(basis, Z2, h1, h2, B1, B2)
    assert t1.psi.images == s1.images and t2.psi.images == s2.images
    assert not t1.activated_edges() and not t2.activated_edges()


def test_small_kappa_swap_same_knot_rejected(z2_setup):
    Z2, rho, q = z2_setup
    cx = build_complex(Box(((0, 2),) * 3))
    basis = GeneratorBasis(cx)
    triv = trivial_homomorphism(basis)
    zero_phi = np.zeros(cx.n_vertices, dtype=np.int8)
    zero_cur = np.zeros(cx.n_edges, dtype=np.int64)
    rc = ReducedConfig(triv, zero_phi, zero_cur)
    p = 0
    B = Box(tuple((int(cx.plq_min[p, a]), int(cx.plq_max[p, a])) for a in range(3)))
    with pytest.raises(HiggsError):
        higgs_swap_small_kappa(basis, Z2, rho, q, rc, rc, B, B)


def test_reduced_support_definition(z2_setup):
    Z2, rho, q = z2_setup
    cx = build_complex(Box(((0, 2),) * 3))
    basis = GeneratorBasis(cx)
    cur = np.zeros(cx.n_edges, dtype=np.int64)
    cur[0] = 1
    rc = ReducedConfig(
        trivial_homomorphism(basis), np.zeros(cx.n_vertices, dtype=np.int8), cur
    )
    av = rc.activated_vertices(cx)
    assert av == {int(cx.edge_tail[0]), int(cx.edge_head[0])}
    supp = reduced_support(cx, Z2, rc)
    assert supp == frozenset(
        p for p in range(cx.n_plaquettes) if cx.plq_vertices[p] & av
    )


def test_higgs_phi2_small_and_bound(z2_setup):
    Z2, rho, q = z2_setup
    cx = build_complex(Box(((0, 1),) * 3))
    basis = GeneratorBasis(cx)
    beta, kappa = 3.0, 0.01
    P = frozenset(range(cx.n_plaquettes))
    val = higgs_phi2_small(
        basis, Z2, rho, q, frozenset(), P, beta, kappa, i_max=1, max_activated=2
    )
    bnd, cf = higgs_phi2_small_bound(Z2, rho, q, frozenset(), P, beta, kappa)
    assert cf < 1
    assert 0 <= val <= bnd
    # P = P0 = empty: only the fully trivial pair contributes, weight 1
    empty = higgs_phi2_small(
        basis, Z2, rho, q, frozenset(), frozenset(), beta, kappa, i_max=1, max_activated=1
    )
    assert empty == pytest.approx(1.0, rel=1e-12)


def test_c_frak_small_formula(z2_setup):
    Z2, rho, q = z2_setup
    beta, kappa = 3.0, 0.01
    cf = c_frak_small(Z2, rho, q, beta, kappa)
    gauge_term = math.exp(beta * 2 * (-1 - 1))
    # quotient representatives are {1, i}; the best nontrivial Re[a chi(b)]
    # is 0 (any pair involving i), so the current term is (kappa/24) e^c
    current_term = (kappa / 24.0) * math.exp(0 + 3)
    assert cf == pytest.approx(max(gauge_term, current_term), rel=1e-12)
