"""Property tests for algebraic invariants."""

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from kazext.balanced import (
    GroupAlgebraElement,
    balance_defect,
    charsum,
    multiset_avg_kazhdan,
    negate,
    rank_Tf,
    rank_Tf_poly,
)
from kazext.families import build_gamma_k2, theorem1_bound
from kazext.groups import (
    Cocycle,
    ElementaryAbelian,
    ExtensionData,
    cocycle_extension,
    element_order,
    extension_isomorphism,
    extract_cocycle,
    make_cyclic,
    make_group_algebra,
    normal_closure,
    quotient_by_normal,
    semidirect_product,
    subgroup_generated,
    verify_cocycle,
)
from kazext.spectra import (
    abelian_gap_characters,
    build_cayley,
    character_average,
    gap_dense,
    kazhdan_max_abelian,
)
from kazext.tame import tame_delta, tame_kazhdan_bound

from conftest import carry_data

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
primes = st.sampled_from([2, 3, 5])


@st.composite
def cyclic_and_gens(draw):
    m = draw(st.integers(2, 40))
    S = draw(st.lists(st.integers(1, m - 1), min_size=1, max_size=6))
    return make_cyclic(m), S


@st.composite
def elementary_and_gens(draw):
    p = draw(primes)
    d = draw(st.integers(1, 3 if p == 5 else 4))
    G = ElementaryAbelian(p, d)
    S = draw(st.lists(st.integers(1, G.order - 1), min_size=1, max_size=6))
    return G, S


abelian_cases = st.one_of(cyclic_and_gens(), elementary_and_gens())


@FAST
@given(abelian_cases)
def test_characters_agree_with_dense(case):
    G, S = case
    op = build_cayley(G, S)
    c, d = abelian_gap_characters(op), gap_dense(op)
    assert c.connected == d.connected
    assert abs(c.lambda2 - d.lambda2) <= 1e-9


@FAST
@given(abelian_cases)
def test_character_average_and_sandwich(case):
    G, S = case
    op = build_cayley(G, S)
    eps2 = abelian_gap_characters(op).avg_kazhdan
    assert abs(character_average(G, S) - eps2) <= 1e-9
    eps1 = kazhdan_max_abelian(op)
    assert eps1**2 >= eps2 - 1e-9
    assert eps2 >= eps1**2 / len(S) - 1e-9


@FAST
@given(abelian_cases)
def test_spectrum_bounds(case):
    G, S = case
    r = abelian_gap_characters(build_cayley(G, S))
    assert 0 <= r.beta <= 2 and r.avg_kazhdan == 2 * r.beta
    assert r.connected == (subgroup_generated(G, S).order == G.order)


@FAST
@given(st.integers(2, 30), st.data())
def test_subgroup_generated_closed_and_minimal(m, data):
    G = make_cyclic(m)
    gens = data.draw(st.lists(st.integers(0, m - 1), min_size=1, max_size=3))
    H = subgroup_generated(G, gens)
    prod = G.mul(H.members[:, None], H.members[None, :])
    assert H.mask[prod].all()
    assert subgroup_generated(G, H.members) == H
    # order of <g> in C_m is m / gcd(g, m)
    assert element_order(G, gens[0]) == m // np.gcd(gens[0], m)


@FAST
@given(primes, st.data())
def test_coboundary_twist_is_cocycle(p, data):
    """sigma + delta f is again a cocycle and gives an isomorphic (cyclic) group."""
    base = carry_data(p)
    f = np.array([0] + data.draw(st.lists(st.integers(0, p - 1), min_size=p - 1, max_size=p - 1)))
    i = np.arange(p)
    hh = (i[:, None] + i[None, :]) % p
    sig = (base.cocycle.values + f[:, None] + f[None, :] - f[hh]) % p
    data2 = ExtensionData(base.base, base.quotient, base.action, Cocycle(sig))
    assert verify_cocycle(data2)
    G, _ = cocycle_extension(data2)
    assert G.element_orders().max() == p * p


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([1, 2]), st.data())
def test_extract_then_rebuild_is_isomorphic(n, data):
    A, act = make_group_algebra(3, n)
    G = semidirect_product(A, act.acting, act)
    g = data.draw(st.integers(1, G.order - 1))
    N = normal_closure(G, [g])
    q = quotient_by_normal(G, N)
    if not N.as_group().is_abelian:
        return
    d = extract_cocycle(q)
    assert verify_cocycle(d)
    ext, _ = cocycle_extension(d)
    phi = extension_isomorphism(q, d, ext)
    assert np.array_equal(np.sort(phi), G.elements())


@FAST
@given(st.sampled_from([3, 5, 7]), st.data())
def test_rank_routes_agree(p, data):
    f = GroupAlgebraElement.of(p, data.draw(st.lists(st.integers(0, p - 1), min_size=p, max_size=p)))
    r = rank_Tf(f)
    assert r == rank_Tf_poly(f)
    assert r == rank_Tf(f.rotate(1)) == rank_Tf(-f)


@FAST
@given(st.sampled_from([3, 5]), st.data())
def test_charsum_and_balance_invariances(p, data):
    rows = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=p, max_size=p),
                              min_size=1, max_size=8))
    B = np.array(rows)
    f = GroupAlgebraElement.of(p, data.draw(st.lists(st.integers(0, p - 1), min_size=p, max_size=p)))
    assert abs(charsum(B, f)) <= len(B) + 1e-9
    assert charsum(B, GroupAlgebraElement.zero(p)) == len(B)
    d = balance_defect(B).delta_star
    assert 0 - 1e-12 <= d <= 1 + 1e-12
    assert abs(balance_defect(negate(B, p)).delta_star - d) <= 1e-12
    assert abs(balance_defect(np.roll(B, 1, axis=1)).delta_star - d) <= 1e-12
    assert 2 * d <= multiset_avg_kazhdan(B) + 1e-9


@FAST
@given(st.floats(0.01, 4), st.floats(0.01, 4), st.integers(1, 50), st.integers(1, 50))
def test_bound_peaks_at_equal_sizes(eh, ea, s, b):
    assert theorem1_bound(eh, ea, s, b) <= theorem1_bound(eh, ea, 1, 1) * (1 + 1e-12)
    assert abs(theorem1_bound(eh, ea, s, b) - theorem1_bound(ea, eh, b, s)) <= 1e-15


@FAST
@given(st.integers(3, 12), st.integers(1, 60))
def test_tame_properties(k, c):
    e = tame_kazhdan_bound(k, c)
    assert e.bound > 0 and np.isfinite(e.bound)
    assert tame_delta(k, c + 1) < tame_delta(k, c)
    if c <= 2 * k:
        assert abs(e.bound - tame_delta(k, c) / 2) <= 1e-15 * e.bound


def test_gamma_k2_associative_on_random_triples():
    G = build_gamma_k2(3, 3).group
    rng = np.random.default_rng(0)
    x, y, z = rng.integers(0, G.order, size=(3, 100_000))
    assert (G.mul(G.mul(x, y), z) == G.mul(x, G.mul(y, z))).all()
    assert (G.mul(x, G.inv(x)) == 0).all()
