import random

import numpy as np
import pytest

from contexta.covers import named_cover
from contexta.errors import CapacityError, DomainError
from contexta.gfp import PrimeConfig, enumerate_isotropic, span
from contexta.pauli import restricted_beta_value
from contexta.presheaf import full_cover, global_sections, make_cover
from contexta.topology import (
    FiniteGroup,
    abelian_group,
    beta_cochain,
    beta_is_coboundary,
    build_chain_complex,
    coset_poset,
    d_formula,
    euler_characteristic,
    group_for,
    homology_dims,
    pi_group,
    sphere_count,
)

CORPUS = ["square", "star", "square-open", "star-open", "full:2:1", "full:2:2", "full:3:1"]


def _random_covers(p, n, count, seed):
    """Covers generated by a few random maximal isotropic subspaces."""
    cfg = PrimeConfig(p, n)
    lag = enumerate_isotropic(cfg, exactly_dim=n)
    rng = random.Random(seed)
    return [make_cover([list(I.basis) for I in rng.sample(lag, rng.randint(1, min(5, len(lag))))], cfg) for _ in range(count)]


# --- chain complex -----------------------------------------------------------


def test_single_line_complex():
    cfg = PrimeConfig(2, 1)
    cx = build_chain_complex(make_cover([[cfg.z(1)]], cfg))
    assert cx.bases[1] == [(cfg.z(1),)]
    assert cx.bases[2] == [(cfg.z(1), cfg.z(1))]
    assert not cx.boundary(2).any()  # [z] - 0 + [z] = 0 mod 2


def test_boundary_two_simplex_formula():
    cfg = PrimeConfig(3, 1)
    cx = build_chain_complex(full_cover(cfg))
    idx1 = {s[0]: i for i, s in enumerate(cx.bases[1])}
    D = cx.boundary(2)
    for j, (v, w) in enumerate(cx.bases[2]):
        expect = np.zeros(len(cx.bases[1]), dtype=np.int64)
        expect[idx1[v]] += 1
        expect[idx1[w]] += 1
        vw = tuple((a + b) % 3 for a, b in zip(v, w))
        if any(vw):
            expect[idx1[vw]] -= 1
        assert np.array_equal(D[:, j], expect % 3)


def test_square_degree_one_basis():
    # the square's contexts only contain the 9 nonzero vectors of its 3x3 grid
    cx = build_chain_complex(named_cover("square"))
    assert len(cx.bases[1]) == 9
    assert all(len(s) == 1 for s in cx.bases[1])


@pytest.mark.parametrize("name", CORPUS)
def test_boundary_squares_to_zero_and_beta_cocycle(name):
    cx = build_chain_complex(named_cover(name))
    p = cx.p
    assert not cx.boundary(1).any()
    assert not ((cx.boundary(1) @ cx.boundary(2)) % p).any()
    assert not ((cx.boundary(2) @ cx.boundary(3)) % p).any()
    assert not ((beta_cochain(cx) @ cx.boundary(3)) % p).any()


@pytest.mark.parametrize("name", ["square", "star", "full:2:2"])
def test_cup_identity_as_cochains(name):
    cx = build_chain_complex(named_cover(name))
    n = cx.cover.cfg.n
    q = lambda v: sum(v[i] * v[n + i] for i in range(n)) % 2  # noqa: E731
    for v, w in cx.bases[2]:
        cross = sum(v[n + i] * w[i] for i in range(n))
        assert restricted_beta_value(v, w, 2) == (q(v) * q(w) + cross) % 2


def test_support_guard():
    with pytest.raises(CapacityError):
        build_chain_complex(full_cover(PrimeConfig(5, 2)))


# --- the obstruction -------------------------------------------------------------


@pytest.mark.parametrize("name", CORPUS)
def test_coboundary_iff_sections(name):
    c = named_cover(name)
    ok, s = beta_is_coboundary(c)
    assert ok == bool(global_sections(c))
    if ok:
        cx = build_chain_complex(c)
        vec = np.array([s[e[0]] for e in cx.bases[1]])
        assert np.array_equal((vec @ cx.boundary(2)) % cx.p, beta_cochain(cx))


@pytest.mark.parametrize("pn,seed", [((2, 2), 0), ((2, 2), 1), ((3, 1), 2), ((2, 3), 3)])
def test_coboundary_iff_sections_random_covers(pn, seed):
    for c in _random_covers(*pn, count=4, seed=seed):
        assert beta_is_coboundary(c)[0] == bool(global_sections(c))


def test_mermin_obstructions():
    assert beta_is_coboundary(named_cover("square")) == (False, None)
    assert beta_is_coboundary(named_cover("star")) == (False, None)


def test_full_p3_witness_is_zero():
    ok, s = beta_is_coboundary(full_cover(PrimeConfig(3, 1)))
    assert ok and set(s.values()) == {0}


def test_single_contexts_unobstructed():
    for cfg in (PrimeConfig(2, 2), PrimeConfig(3, 1), PrimeConfig(2, 3)):
        for I in enumerate_isotropic(cfg, exactly_dim=cfg.n)[:8]:
            assert beta_is_coboundary(make_cover([list(I.basis)], cfg))[0]


@pytest.mark.parametrize("name,h1", [("full:2:1", 3), ("full:2:2", 5), ("square", 4), ("star", 6)])
def test_h1(name, h1):
    assert homology_dims(named_cover(name))[0] == h1


# --- coset posets ---------------------------------------------------------------


def test_two_points():
    cfg = PrimeConfig(2, 1)
    G = abelian_group(span([cfg.z(1)], cfg))
    P = coset_poset(G, make_cover([], cfg))
    assert len(P) == 2 and P.below == ((), ())
    assert euler_characteristic(P) == 2


def test_cone_is_contractible():
    cfg = PrimeConfig(2, 1)
    G = abelian_group(span([cfg.z(1)], cfg))
    P = coset_poset(G, make_cover([[cfg.z(1)]], cfg))
    assert len(P) == 3
    assert euler_characteristic(P) == 1


@pytest.mark.parametrize("name,size,chi,spheres", [
    ("square", 112, 16, 15),
    ("star", 424, 104, 103),
    ("full:2:2", 392, 152, 151),
])
def test_named_posets(name, size, chi, spheres):
    c = named_cover(name)
    G = group_for(c)
    P = coset_poset(G, c)
    assert len(P) == size
    assert len(P) == sum(G.order // I.order for I in c)
    assert euler_characteristic(P) == chi
    assert sphere_count(P, 2) == spheres


def test_poset_order_is_inclusion():
    c = named_cover("square")
    G = group_for(c)
    P = coset_poset(G, c)
    contexts = sorted(c.contexts, key=lambda I: I.sort_key())
    els = G.elements

    def members(i):
        ci, g = P.labels[i]
        return {G.mul(els[g], G.embed(v)) for v in contexts[ci]}

    sets = [members(i) for i in range(len(P))]
    for i in range(0, len(P), 7):
        expect = {j for j in range(len(P)) if j != i and sets[j] < sets[i]}
        assert set(P.below[i]) == expect


def _relabel(G: FiniteGroup, seed: int) -> FiniteGroup:
    perm = list(range(G.order))
    random.Random(seed).shuffle(perm)
    fwd = {g: perm[i] for i, g in enumerate(G.elements)}
    back = {v: g for g, v in fwd.items()}
    return FiniteGroup(tuple(sorted(back)), lambda a, b: fwd[G.mul(back[a], back[b])],
                       lambda v: fwd[G.embed(v)], name="relabelled")


@pytest.mark.parametrize("name", ["square", "full:2:2"])
@pytest.mark.parametrize("seed", [0, 1])
def test_chi_relabel_invariant(name, seed):
    c = named_cover(name)
    G = group_for(c)
    assert euler_characteristic(coset_poset(_relabel(G, seed), c)) == euler_characteristic(coset_poset(G, c))


def test_sphere_count_checks_chain_length():
    c = named_cover("square")
    P = coset_poset(group_for(c), c)
    with pytest.raises(DomainError):
        sphere_count(P, 3)


def test_group_choice():
    assert group_for(named_cover("square")).order == 16
    assert group_for(full_cover(PrimeConfig(2, 2))).order == 32
    assert group_for(full_cover(PrimeConfig(2, 2)), "abelian").order == 16
    with pytest.raises(DomainError):
        group_for(full_cover(PrimeConfig(2, 1)))
    with pytest.raises(DomainError):
        group_for(named_cover("square"), "nonsense")


def test_non_isotropic_embedding_rejected():
    # an embedding that is not a homomorphism on some context is refused
    cfg = PrimeConfig(3, 2)
    G = pi_group(cfg)
    G.check_cover(full_cover(cfg))
    bad = FiniteGroup(G.elements, G.mul, lambda v: G.embed(v) if any(v) else G.elements[1])
    with pytest.raises(DomainError):
        bad.check_cover(full_cover(cfg))


def test_poset_guard():
    big = FiniteGroup(tuple(range(10**5)), lambda a, b: a, lambda v: 0)
    with pytest.raises(CapacityError):
        coset_poset(big, named_cover("star"))


# --- the closed formula -----------------------------------------------------------


def test_d_formula_matches_poset():
    for name, (p, n) in [("full:2:2", (2, 2)), ("full:3:2", (3, 2))]:
        c = named_cover(name)
        P = coset_poset(group_for(c), c)
        assert sphere_count(P, P.chain_length) == d_formula(p, n)
    assert d_formula(2, 2) == 151
    assert d_formula(3, 2) == 11042


@pytest.mark.parametrize("p", [2, 3, 5, 7])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_d_formula_positive_integer(p, n):
    d = d_formula(p, n)
    assert isinstance(d, int) and d > 0


def test_d_formula_rejects_r():
    with pytest.raises(DomainError):
        d_formula(2, 2, r=0)
