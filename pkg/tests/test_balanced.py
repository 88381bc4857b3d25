import itertools

import numpy as np
import pytest

from kazext.balanced import (
    GroupAlgebraElement,
    all_elements,
    balance_defect,
    balance_rows,
    census_csv,
    census_formula,
    charsum,
    circulant,
    dot,
    failure_bound,
    multiset_avg_kazhdan,
    negate,
    rank_census,
    rank_mod_p,
    rank_Tf,
    rank_Tf_poly,
    required_s,
    sample_orbit_union,
)
from kazext.errors import GroupError, SizeGuardError
from kazext.groups import make_group_algebra, orbit_closure

E = GroupAlgebraElement.of


def test_dot_examples():
    assert dot(GroupAlgebraElement.zero(3), E(3, [1, 2, 1])) == 0
    assert dot(E(3, [1, 1, 1]), E(3, [1, 1, 1])) == 0
    assert dot(E(3, [1, 2, 0]), E(3, [2, 2, 1])) == 0
    assert dot(E(5, [1, 2, 3, 4, 0]), E(5, [1, 1, 1, 1, 1])) == 0
    with pytest.raises(GroupError):
        dot(E(3, [1, 0, 0]), E(5, [1, 0, 0, 0, 0]))


def test_element_validation():
    with pytest.raises(GroupError):
        GroupAlgebraElement(3, (1, 2))
    with pytest.raises(GroupError):
        GroupAlgebraElement(3, (1, 2, 3))
    f = E(3, [1, 2, 0])
    assert f.rotate(1).coeffs == (0, 1, 2)
    assert (-f).coeffs == (2, 1, 0)
    assert f.index == 1 + 2 * 3


def test_charsum_examples():
    B = [E(3, [1, 0, 0]), E(3, [0, 1, 0]), E(3, [0, 0, 1])]
    assert charsum(B, GroupAlgebraElement.zero(3)) == 3
    z = charsum(B, E(3, [1, 1, 1]))
    assert abs(z) == pytest.approx(3) and z == pytest.approx(3 * np.exp(2j * np.pi / 3))
    full = all_elements(3)
    assert abs(charsum(full, E(3, [1, 2, 0]))) < 1e-9
    with pytest.raises(GroupError):
        charsum([], E(3, [1, 0, 0]))


def test_all_elements_order():
    assert all_elements(3)[:4].tolist() == [[0, 0, 0], [0, 0, 1], [0, 0, 2], [0, 1, 0]]
    assert len({tuple(r) for r in all_elements(5)}) == 5**5


def test_balance_defect_examples():
    assert balance_defect(all_elements(3)).delta_star == pytest.approx(1.0)
    orbit = np.eye(3, dtype=int)
    rep = balance_defect(orbit)
    assert rep.delta_star == pytest.approx(0.0, abs=1e-12)
    assert len(set(rep.witness.coeffs)) == 1  # constant witness
    rep = balance_defect(np.array([[1, 2, 0]] * 5))
    assert rep.delta_star == pytest.approx(0.0, abs=1e-12)
    assert rep.multiset_size == 5


def test_balance_defect_matches_bruteforce():
    rng = np.random.default_rng(4)
    B = rng.integers(0, 3, size=(7, 3))
    best = max(abs(charsum(B, E(3, f))) for f in itertools.product(range(3), repeat=3) if any(f))
    assert balance_defect(B).delta_star == pytest.approx(1 - best / 7, abs=1e-12)


def test_balance_defect_guard():
    with pytest.raises(SizeGuardError):
        balance_defect(np.ones((2, 11), dtype=int))


def test_rank_examples():
    assert rank_Tf(GroupAlgebraElement.zero(5)) == 0
    assert rank_Tf(E(5, [1, 0, 0, 0, 0])) == 5
    assert rank_Tf(E(5, [1, 1, 1, 1, 1])) == 1
    assert rank_Tf(E(3, [1, 2, 0])) == 2  # 1 + 2x = (x - 1) * 2 up to a unit
    assert circulant([1, 2, 0]).tolist() == [[1, 2, 0], [0, 1, 2], [2, 0, 1]]


def test_rank_mod_p_general():
    assert rank_mod_p(np.array([[1, 2], [2, 4]]), 5) == 1
    assert rank_mod_p(np.array([[1, 2], [2, 4]]), 7) == 1
    assert rank_mod_p(np.array([[1, 2], [3, 4]]), 2) == 1
    assert rank_mod_p(np.array([[1, 2], [3, 4]]), 3) == 2


@pytest.mark.parametrize("p", [3, 5])
def test_rank_two_routes_all_elements(p):
    for f in all_elements(p):
        g = E(p, f)
        assert rank_Tf(g) == rank_Tf_poly(g)


@pytest.mark.parametrize("p", [3, 5])
def test_census(p):
    c = rank_census(p)
    assert c == census_formula(p)
    assert sum(c.values()) == p**p


def test_census_examples_and_csv():
    assert rank_census(3) == {0: 1, 1: 2, 2: 6, 3: 18}
    text = census_csv(3)
    assert text.splitlines()[0] == "rank,count,formula_count"
    assert text.splitlines()[-1] == "3,18,18"


def test_census_guards():
    with pytest.raises(SizeGuardError):
        rank_census(11)
    with pytest.raises(GroupError):
        rank_census(4)


def test_required_s():
    assert required_s(5, 0.25, 2) == 52
    assert required_s(3, 0.1, 1.5) == 11
    with pytest.raises(SizeGuardError):
        required_s(5, 0.4999, 2)
    for bad in [0, 0.5, -0.1]:
        with pytest.raises(GroupError):
            required_s(5, bad, 2)
    with pytest.raises(GroupError):
        required_s(5, 0.25, 1)


def test_sample_orbit_union_shapes():
    B = sample_orbit_union(3, 2, 2, seed=0)
    assert B.shape == (18, 3)
    rows, counts = np.unique(B, axis=0, return_counts=True)
    # each distinct rotation of each h_i appears a multiple of 3 times
    assert (counts % 3 == 0).all()
    B1 = sample_orbit_union(5, 1, 4, seed=1)
    assert B1.shape == (20, 5)
    blocks = B1.reshape(4, 5, 5)
    for blk in blocks:
        h = blk[0]
        assert sorted(map(tuple, blk)) == sorted(tuple(np.roll(h, j)) for j in range(5))
    assert np.array_equal(sample_orbit_union(5, 1, 4, seed=1), B1)


def test_constant_orbit_is_fixed():
    h = np.full(3, 2)
    A, act = make_group_algebra(3, 2)
    orb = orbit_closure(A, act.acting, act, [A.index(h)])
    assert orb.size == 9 and (orb == A.index(h)).all()


def test_failure_bound():
    assert failure_bound(5, 0.25, 1, 0).single == 8
    a = failure_bound(5, 0.25, 1, 10).single
    assert failure_bound(5, 0.25, 1, 11).single < a
    assert failure_bound(5, 0.25, 2, 10).single < a
    with pytest.raises(GroupError):
        failure_bound(5, 0.25, 6, 10)


def test_symmetrized_constant_dominates_balance():
    for seed in range(5):
        B = sample_orbit_union(3, 1, 6, seed)
        rep = balance_defect(B)
        assert 2 * rep.delta_star <= multiset_avg_kazhdan(B) + 1e-9


def test_balance_invariances():
    B = sample_orbit_union(5, 1, 3, seed=9)
    d = balance_defect(B).delta_star
    assert balance_defect(negate(B, 5)).delta_star == pytest.approx(d, abs=1e-12)
    assert balance_defect(np.roll(B, 2, axis=1)).delta_star == pytest.approx(d, abs=1e-12)


def test_balance_rows_deterministic():
    rows = balance_rows(3, 1, 0.1, 1.5, 3, seed=5)
    assert [r["seed"] for r in rows] == [5, 6, 7]
    assert rows == balance_rows(3, 1, 0.1, 1.5, 3, seed=5)
    assert all(r["s"] == 11 for r in rows)
