import numpy as np
import pytest

from latgauge import _kernels
from latgauge.gibbs import GibbsSpec, plaquette_loop
from latgauge.groups import builtin_group
from latgauge.lattice import Box, build_complex
from latgauge.mcmc import HeatBathSampler, build_tables, conditional_weights, mcmc_chain

HAVE_COMPILED = _kernels._HAVE_COMPILED


@pytest.fixture(scope="module")
def z2_cube_spec():
    G, rho = builtin_group("cyclic", 2)
    cx = build_complex(Box(((0, 2),) * 3))
    return GibbsSpec(cx, G, rho, 0.9)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel unavailable")
def test_kernels_bitwise_identical(z2_cube_spec):
    a = HeatBathSampler(z2_cube_spec, seed=3, chain_id=1, kernel="cython")
    b = HeatBathSampler(z2_cube_spec, seed=3, chain_id=1, kernel="python")
    for _ in range(25):
        assert np.array_equal(a.sweep(), b.sweep())


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel unavailable")
def test_kernels_identical_nonabelian():
    G, rho = builtin_group("symmetric", 3)
    cx = build_complex(Box(((0, 2), (0, 2), (0, 2))))
    spec = GibbsSpec(cx, G, rho, 0.5)
    a = HeatBathSampler(spec, seed=11, kernel="cython")
    b = HeatBathSampler(spec, seed=11, kernel="python")
    for _ in range(10):
        assert np.array_equal(a.sweep(), b.sweep())


def test_chains_reproducible(z2_cube_spec):
    a = HeatBathSampler(z2_cube_spec, seed=7, chain_id=2)
    b = HeatBathSampler(z2_cube_spec, seed=7, chain_id=2)
    a.run(20)
    b.run(20)
    assert np.array_equal(a.state, b.state)
    c = HeatBathSampler(z2_cube_spec, seed=7, chain_id=3)
    c.run(20)
    assert not np.array_equal(a.state, c.state)


def test_mcmc_chain_generator(z2_cube_spec):
    states = []
    for s in mcmc_chain(z2_cube_spec, steps=5, seed=1):
        states.append(s.copy())
    assert len(states) == 5
    with pytest.raises(ValueError):
        next(iter(mcmc_chain(z2_cube_spec, steps=0, seed=1)))


def test_detailed_balance_exhaustive():
    # Single-plaquette toy complex: mu(x) K_e(x -> y) == mu(y) K_e(y -> x)
    # for every edge kernel and every one-move pair.
    G, rho = builtin_group("cyclic", 3)
    cx = build_complex(Box(((0, 1), (0, 1))))
    spec = GibbsSpec(cx, G, rho, 0.8)
    tables = build_tables(spec)
    dist = spec.enumerate_mu()
    mu = dist.probabilities
    index = {tuple(c): i for i, c in enumerate(dist.configs)}
    worst = 0.0
    for i, cfg in enumerate(dist.configs):
        for e in range(cx.n_edges):
            w = conditional_weights(tables, cfg, e)
            w = w / w.sum()
            for g in range(G.order):
                other = cfg.copy()
                other[e] = g
                j = index[tuple(other)]
                wb = conditional_weights(tables, other, e)
                wb = wb / wb.sum()
                worst = max(worst, abs(mu[i] * w[g] - mu[j] * wb[cfg[e]]))
    assert worst < 1e-12


def test_single_plaquette_excitation_frequency():
    # Z2 on the single-plaquette complex: P(plaquette excited) is exactly
    # (4 states excited... ) -- compare against the enumerated value.
    G, rho = builtin_group("cyclic", 2)
    cx = build_complex(Box(((0, 1), (0, 1))))
    spec = GibbsSpec(cx, G, rho, 0.7)
    dist = spec.enumerate_mu()
    vals = spec.plaquette_values_batch(dist.configs)[:, 0]
    exact = float(dist.probabilities[vals != 0].sum())
    sampler = HeatBathSampler(spec, seed=21)
    sampler.run(200)
    n = 60_000
    hits = 0
    for _ in range(n):
        state = sampler.sweep()
        hits += spec.plaquette_value(state, 0) != 0
    freq = hits / n
    se = (exact * (1 - exact) / (n / 8)) ** 0.5  # generous autocorrelation margin
    assert abs(freq - exact) < 3 * se


def test_beta_zero_marginals_uniform():
    G, rho = builtin_group("cyclic", 2)
    cx = build_complex(Box(((0, 2), (0, 2))))
    spec = GibbsSpec(cx, G, rho, 0.0)
    sampler = HeatBathSampler(spec, seed=13)
    n = 30_000
    counts = np.zeros(cx.n_edges)
    for _ in range(n):
        counts += sampler.sweep()
    # chi-square per edge against p = 1/2
    chi2 = ((counts - n / 2) ** 2 / (n / 4)).max()
    assert chi2 < 20  # p ~ 1e-5 per edge; loose but catches real bias


def test_sampler_matches_enumeration_mean():
    G, rho = builtin_group("cyclic", 2)
    cx = build_complex(Box(((0, 2), (0, 2))))
    spec = GibbsSpec(cx, G, rho, 1.0)
    dist = spec.enumerate_mu()
    loop = plaquette_loop(cx, 0)
    chi0 = np.real(rho.character)
    exact = sum(
        p * chi0[spec.holonomy(c, loop)]
        for c, p in zip(dist.configs, dist.probabilities)
    )
    sampler = HeatBathSampler(spec, seed=5)
    sampler.run(500)
    n = 40_000
    vals = np.fromiter(
        (chi0[spec.holonomy(sampler.sweep(), loop)] for _ in range(n)), float, n
    )
    se = vals.std() / (n / 20) ** 0.5
    assert abs(vals.mean() - exact) < 3 * se
