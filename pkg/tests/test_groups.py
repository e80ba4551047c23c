import math

import numpy as np
import pytest

from latgauge.groups import (
    GroupError,
    UnitaryRep,
    beta_threshold,
    builtin_group,
    class_of,
    conjugacy_classes,
    delta_G,
    gap_values,
    is_class_function,
    phi_beta,
    phi_beta_table,
)

FAMILIES = [
    ("cyclic", (2,)),
    ("cyclic", (3,)),
    ("cyclic", (4,)),
    ("dihedral", (3,)),
    ("dihedral", (4,)),
    ("symmetric", (3,)),
    ("quaternion", (8,)),
]


@pytest.fixture(scope="module", params=FAMILIES, ids=lambda f: f"{f[0]}{f[1][0]}")
def group_and_rep(request):
    name, params = request.param
    return builtin_group(name, *params)


def test_table_axioms_exhaustive(group_and_rep):
    G, _ = group_and_rep
    n = G.order
    # two-sided identity
    assert all(G.mult[0, g] == g == G.mult[g, 0] for g in range(n))
    # inverses
    assert all(G.mult[g, G.inv[g]] == 0 == G.mult[G.inv[g], g] for g in range(n))
    # associativity over all triples
    for a in range(n):
        for b in range(n):
            ab = G.mult[a, b]
            for c in range(n):
                assert G.mult[ab, c] == G.mult[a, G.mult[b, c]]


def test_representation_is_unitary_homomorphism(group_and_rep):
    G, rho = group_and_rep
    rho.validate(G)
    eye = np.eye(rho.dim)
    for g in range(G.order):
        prod = rho.matrices[g] @ rho.matrices[G.inv[g]]
        assert np.allclose(prod, eye, atol=1e-12)
    assert abs(rho.character[0] - rho.dim) < 1e-12


def test_character_is_class_function(group_and_rep):
    G, rho = group_and_rep
    chi = rho.character
    for g in range(G.order):
        for h in range(G.order):
            assert abs(chi[G.conjugate(g, h)] - chi[g]) < 1e-12


def test_builtin_examples():
    z2, _ = builtin_group("cyclic", 2)
    assert z2.order == 2
    assert list(z2.inv) == [0, 1]  # every element self-inverse

    s3, _ = builtin_group("symmetric", 3)
    sizes = sorted(len(c) for c in conjugacy_classes(s3))
    assert s3.order == 6 and sizes == [1, 2, 3]

    q8, _ = builtin_group("quaternion", 8)
    center = [
        g
        for g in range(8)
        if all(q8.mult[g, h] == q8.mult[h, g] for h in range(8))
    ]
    assert q8.order == 8 and len(center) == 2
    assert len(conjugacy_classes(q8)) == 5


def test_builtin_errors():
    with pytest.raises(GroupError):
        builtin_group("cyclic", 1)
    with pytest.raises(GroupError):
        builtin_group("frobnicated", 5)
    with pytest.raises(GroupError):
        builtin_group("symmetric", 4)


def test_conjugacy_classes_partition(group_and_rep):
    G, _ = group_and_rep
    classes = conjugacy_classes(G)
    seen = sorted(g for c in classes for g in c)
    assert seen == list(range(G.order))
    assert classes[0] == (0,)


def test_abelian_groups_have_singleton_classes():
    z2, _ = builtin_group("cyclic", 2)
    assert conjugacy_classes(z2) == [(0,), (1,)]


def test_delta_G_values():
    z2, r2 = builtin_group("cyclic", 2)
    assert delta_G(z2, r2) == pytest.approx(2.0, abs=1e-12)
    z3, r3 = builtin_group("cyclic", 3)
    assert delta_G(z3, r3) == pytest.approx(1.0 - math.cos(2 * math.pi / 3), abs=1e-12)
    s3, rs3 = builtin_group("symmetric", 3)
    assert delta_G(s3, rs3) == pytest.approx(2.0, abs=1e-12)


def test_delta_G_rejects_gapless_rep():
    z4, _ = builtin_group("cyclic", 4)
    # character of the squared rep collides on g=0 and g=2
    mats = np.array([[[1j ** (2 * k)]] for k in range(4)])
    gapless = UnitaryRep(dim=1, matrices=mats)
    with pytest.raises(GroupError):
        delta_G(z4, gapless)


def test_phi_beta_basics(group_and_rep):
    G, rho = group_and_rep
    assert phi_beta(rho, 0.7, 0) == 1.0
    tab1 = phi_beta_table(rho, 1.0)
    tab2 = phi_beta_table(rho, 2.0)
    assert np.all(tab1 > 0) and np.all(tab1 <= 1.0)
    assert np.all(tab2[1:] <= tab1[1:] + 1e-15)  # nonincreasing in beta


def test_phi_beta_values():
    z2, r2 = builtin_group("cyclic", 2)
    assert phi_beta(r2, 1.0, 1) == pytest.approx(math.exp(-2.0), rel=1e-12)
    z3, r3 = builtin_group("cyclic", 3)
    assert phi_beta(r3, 2.0, 1) == pytest.approx(math.exp(-3.0), rel=1e-12)


def test_phi_product_depends_only_on_class_multiset():
    s3, rs3 = builtin_group("symmetric", 3)
    tab = phi_beta_table(rs3, 0.9)
    cls = class_of(s3)
    multiset = [1, 2, 3]  # a transposition twice (conjugates), one 3-cycle
    swapped = [2, 1, 4]  # same classes, different representatives
    assert [cls[g] for g in multiset] == [cls[g] for g in swapped]
    assert np.prod(tab[multiset]) == pytest.approx(np.prod(tab[swapped]), rel=1e-14)


def test_beta_threshold_values():
    z2, r2 = builtin_group("cyclic", 2)
    assert beta_threshold(z2, r2) == pytest.approx(
        (114 + 4 * math.log(2)) / 2, abs=1e-9
    )
    s3, rs3 = builtin_group("symmetric", 3)
    assert beta_threshold(s3, rs3) == pytest.approx(
        (114 + 4 * math.log(6)) / 2, abs=1e-9
    )


def test_beta_threshold_scales_inversely_with_gap():
    z2, r2 = builtin_group("cyclic", 2)
    doubled = UnitaryRep(dim=2, matrices=np.array([np.eye(2), -np.eye(2)]))
    assert delta_G(z2, doubled) == pytest.approx(4.0)
    assert beta_threshold(z2, doubled) == pytest.approx(
        beta_threshold(z2, r2) / 2, rel=1e-12
    )


def test_is_class_function():
    s3, rs3 = builtin_group("symmetric", 3)
    assert is_class_function(s3, rs3.character)
    bad = np.array(rs3.character)
    bad[1] += 1.0
    assert not is_class_function(s3, bad)
