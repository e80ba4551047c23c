from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latgauge.gibbs import GibbsSpec
from latgauge.groups import builtin_group, class_of
from latgauge.homomorphism import (
    GeneratorBasis,
    Homomorphism,
    HomomorphismError,
    _reduce,
    enumerate_nu,
    gauge_fix,
    nu_weight,
    psi_of_config,
    solve_support_constraints,
    trivial_homomorphism,
)
from latgauge.lattice import Box, build_complex, spanning_tree


@pytest.fixture(scope="module")
def plane():
    G, rho = builtin_group("cyclic", 2)
    cx = build_complex(Box(((0, 2), (0, 2))))
    return cx, GeneratorBasis(cx), G, rho


def test_free_reduction():
    assert _reduce([(0, 1), (0, -1)]) == ()
    assert _reduce([(0, 1), (1, 1), (1, -1), (0, 1)]) == ((0, 1), (0, 1))
    assert _reduce([(2, -1), (2, -1)]) == ((2, -1), (2, -1))


@settings(max_examples=50, deadline=None)
@given(
    letters=st.lists(
        st.tuples(st.integers(0, 3), st.sampled_from([1, -1])), max_size=20
    )
)
def test_free_reduction_is_reduced(letters):
    word = _reduce(letters)
    for (g1, s1), (g2, s2) in zip(word, word[1:]):
        assert not (g1 == g2 and s1 == -s2)


def test_tree_loops_give_empty_words(plane):
    cx, basis, G, _ = plane
    tree = basis.tree
    # a loop walking down a tree path and back is entirely tree edges
    x = cx.n_vertices - 1
    path = tree.path_edges(x)
    loop = path + [(e, -s) for e, s in reversed(path)]
    assert basis.word_of_edges(loop) == ()


def test_cotree_loop_single_letter(plane):
    cx, basis, G, _ = plane
    eid = basis.cotree_edge(0)
    x, y = int(cx.edge_tail[eid]), int(cx.edge_head[eid])
    tree = basis.tree
    loop = tree.path_edges(x) + [(eid, 1)] + [(e, -s) for e, s in reversed(tree.path_edges(y))]
    assert basis.xi_of_edges(loop) == ((0, 1),)


def test_loop_concatenation_word(plane):
    cx, basis, G, _ = plane
    l0 = list(cx.plaquette_loop(0))
    l1 = list(cx.plaquette_loop(1))
    # close each through tree paths so they concatenate at the base point
    w0 = basis.xi_of_edges(l0)
    w1 = basis.xi_of_edges(l1)
    # direct concatenation of the conjugated loops
    from latgauge.homomorphism import _reduce as red

    assert red(w0 + w1) == basis.word_of_edges(
        list(basis._path(cx.oriented_endpoints(*l0[0])[0]))
        + l0
        + [(e, -s) for e, s in reversed(basis._path(cx.oriented_endpoints(*l0[0])[0]))]
        + list(basis._path(cx.oriented_endpoints(*l1[0])[0]))
        + l1
        + [(e, -s) for e, s in reversed(basis._path(cx.oriented_endpoints(*l1[0])[0]))]
    )


def test_fiber_cardinality_exhaustive(plane):
    cx, basis, G, rho = plane
    spec = GibbsSpec(cx, G, rho, 1.0)
    dist = spec.enumerate_mu()
    fibers = Counter()
    for cfg in dist.configs:
        fibers[psi_of_config(basis, G, cfg).images] += 1
    assert len(fibers) == 16
    assert set(fibers.values()) == {2**8}


def test_psi_on_gauge_fixed_config_reads_cotree(plane):
    cx, basis, G, _ = plane
    rng = np.random.default_rng(0)
    for _ in range(10):
        images = tuple(rng.integers(0, 2, basis.n_generators))
        psi = Homomorphism(basis, images)
        cfg = gauge_fix(psi, G)
        for pos in range(basis.n_generators):
            assert cfg[basis.cotree_edge(pos)] == images[pos]
        assert psi_of_config(basis, G, cfg).images == images


def test_gauge_fix_other_tree_round_trip(plane):
    cx, basis, G, _ = plane
    other = spanning_tree(cx, root=cx.n_vertices - 1)
    other_basis = GeneratorBasis(cx, tree=other)
    rng = np.random.default_rng(1)
    for _ in range(10):
        images = tuple(rng.integers(0, 2, basis.n_generators))
        psi = Homomorphism(basis, images)
        cfg = gauge_fix(psi, G, other)
        # identity on the other tree, and psi recovered through the basis
        assert all(cfg[e] == 0 for e in np.where(other.in_tree)[0])
        assert psi_of_config(basis, G, cfg).images == images


def test_support_matches_plaquette_excitations(plane):
    cx, basis, G, rho = plane
    spec = GibbsSpec(cx, G, rho, 1.0)
    nu = enumerate_nu(basis, G, rho, 1.0)
    for h in nu.homs:
        cfg = gauge_fix(h, G)
        assert h.support(G) == spec.support(cfg)


def test_support_base_point_independence(plane):
    cx, _, G, rho = plane
    basis_a = GeneratorBasis(cx, root=0)
    basis_b = GeneratorBasis(cx, tree=spanning_tree(cx, root=4), root=4)
    spec = GibbsSpec(cx, G, rho, 1.0)
    dist = spec.enumerate_mu()
    for cfg in dist.configs[:: 64]:
        pa = psi_of_config(basis_a, G, cfg)
        pb = psi_of_config(basis_b, G, cfg)
        assert pa.support(G) == pb.support(G)


def test_xi_image_matches_plaquette_class():
    G, rho = builtin_group("cyclic", 3)
    cx = build_complex(Box(((0, 2), (0, 2))))
    basis = GeneratorBasis(cx)
    spec = GibbsSpec(cx, G, rho, 0.5)
    cls = class_of(G)
    dist = spec.enumerate_mu()
    for cfg in dist.configs[:: 997]:
        psi = psi_of_config(basis, G, cfg)
        for p in range(cx.n_plaquettes):
            assert cls[psi.xi_image(p, G)] == cls[spec.plaquette_value(cfg, p)]


def test_pushforward_total_variation(plane):
    cx, basis, G, rho = plane
    for beta in (0.0, 0.3, 1.0):
        spec = GibbsSpec(cx, G, rho, beta)
        dist = spec.enumerate_mu()
        nu = enumerate_nu(basis, G, rho, beta)
        push = np.zeros(len(nu.homs))
        for cfg, pr in zip(dist.configs, dist.probabilities):
            push[nu.index[psi_of_config(basis, G, cfg).images]] += pr
        tv = 0.5 * float(np.abs(push - nu.probabilities).sum())
        assert tv < 1e-12


def test_nu_uniform_at_beta_zero(plane):
    cx, basis, G, rho = plane
    nu = enumerate_nu(basis, G, rho, 0.0)
    assert np.allclose(nu.probabilities, 1.0 / len(nu.homs))


def test_nu_weight_function(plane):
    cx, basis, G, rho = plane
    nu = enumerate_nu(basis, G, rho, 0.8)
    for i, h in enumerate(nu.homs):
        assert nu_weight(h, rho, 0.8, G) == pytest.approx(float(nu.weights[i]), rel=1e-12)


def test_enumerate_nu_cap(plane):
    cx, basis, G, rho = plane
    with pytest.raises(HomomorphismError):
        enumerate_nu(basis, G, rho, 1.0, cap=3)


@pytest.mark.parametrize(
    "family", [("cyclic", (2,)), ("cyclic", (4,)), ("symmetric", (3,)), ("quaternion", (8,))]
)
def test_solver_matches_enumeration(family):
    name, params = family
    G, rho = builtin_group(name, *params)
    cx = build_complex(Box(((0, 2), (0, 2))))
    basis = GeneratorBasis(cx)
    nu = enumerate_nu(basis, G, rho, 0.5, cap=2**22)
    for P in (frozenset(), frozenset({0}), frozenset({1, 2}), frozenset({0, 1, 2, 3})):
        direct = sorted(h.images for h in nu.homs if h.support(G) <= P)
        solved = sorted(h.images for h in solve_support_constraints(basis, G, P, cap=2**22))
        assert direct == solved


def test_solver_trivial_and_full(plane):
    cx, basis, G, _ = plane
    only_trivial = solve_support_constraints(basis, G, frozenset())
    assert len(only_trivial) == 1 and only_trivial[0].is_trivial()
    everything = solve_support_constraints(basis, G, frozenset(range(cx.n_plaquettes)))
    assert len(everything) == G.order**basis.n_generators


def test_support_count_bound_exhaustive():
    # |{psi : supp(psi) = P}| <= |G|^|P| for every P on the 2-cube lattice
    G, rho = builtin_group("cyclic", 2)
    cx = build_complex(Box(((0, 1),) * 3))
    basis = GeneratorBasis(cx)
    nu = enumerate_nu(basis, G, rho, 1.0)
    by_supp = Counter()
    for h in nu.homs:
        by_supp[h.support(G)] += 1
    for supp, n in by_supp.items():
        assert n <= G.order ** len(supp)


def test_gauge_orbit_characterization(plane):
    # psi(sigma) == psi(tau) iff tau is a gauge transform of sigma with
    # h(root) = 1; both directions on the full configuration space.
    cx, basis, G, rho = plane
    spec = GibbsSpec(cx, G, rho, 1.0)
    dist = spec.enumerate_mu()
    psis = [psi_of_config(basis, G, cfg).images for cfg in dist.configs]
    rng = np.random.default_rng(7)
    # forward: gauge transforms preserve psi
    for _ in range(50):
        i = rng.integers(0, len(dist.configs))
        sigma = dist.configs[i]
        h = rng.integers(0, 2, cx.n_vertices)
        h[basis.root] = 0
        tau = sigma.copy()
        for e in range(cx.n_edges):
            x, y = int(cx.edge_tail[e]), int(cx.edge_head[e])
            tau[e] = G.mult[G.mult[h[x], sigma[e]], G.inv[h[y]]]
        j = int(np.dot(tau, 2 ** np.arange(cx.n_edges - 1, -1, -1)))
        assert psis[j] == psis[i]
    # backward: equal psi implies equal orbit size |G|^(V-1), so the orbit
    # of gauge transforms exhausts the fiber
    orbit_size = G.order ** (cx.n_vertices - 1)
    fibers = Counter(psis)
    assert set(fibers.values()) == {orbit_size}
