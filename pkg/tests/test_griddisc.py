import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridtract.core import Constant, Explicit, ExplicitWeights, GridSpec, Polynomial, ProductWeights, grid_points, subsets
from gridtract.griddisc import (
    TIE_TOL,
    lower_bound_coord,
    star_disc_grid,
    subset_max_product,
    subset_max_product_exhaustive,
    subset_max_sum,
    subset_max_sum_exhaustive,
    weighted_disc_upper_bound,
    weighted_star_disc_grid,
)
from gridtract.oracle import star_disc_exact, weighted_star_disc_exact


@pytest.mark.parametrize("m, expected", [((1,), 0.5), ((1, 1, 1), 0.875), ((2, 3), 0.375)])
def test_star_disc_grid_examples(m, expected):
    assert star_disc_grid(GridSpec(m)) == pytest.approx(expected, abs=1e-15)


def test_left_grid_unsupported():
    with pytest.raises(NotImplementedError):
        star_disc_grid(GridSpec((2,), "left"))


@pytest.mark.parametrize("m", [m for d in (1, 2, 3) for m in itertools.product(range(1, 5), repeat=d)])
def test_closed_form_matches_oracle(m):
    g = GridSpec(m)
    assert abs(star_disc_grid(g) - star_disc_exact(grid_points(g))) <= 1e-12


def test_subset_max_examples():
    res = subset_max_product((1, 1), (0.25, 1 / 6))
    assert res.value == pytest.approx(0.375, abs=1e-15) and res.witness == (1, 2)
    res = subset_max_product((0.5, 0.25), (0.5, 0.5))
    assert res.value == 0.25 and res.witness == (1,)
    res = subset_max_product((0.7,), (0.1,))
    assert res.value == pytest.approx(0.07, abs=1e-15) and res.witness == (1,)


def test_subset_max_enumerated_values():
    gam = {1: 0.5, 2: 0.25}
    values = {}
    for u in subsets(2):
        gu = 1.0
        keep = 1.0
        for j in u:
            gu *= gam[j]
            keep *= 0.5
        values[u] = gu * (1 - keep)
    assert values == {(1,): 0.25, (2,): 0.125, (1, 2): 0.09375}


@pytest.mark.parametrize("eps", [(0.0,), (0.6,)])
def test_subset_max_rejects_eps(eps):
    with pytest.raises(ValueError):
        subset_max_product((0.5,), eps)


def test_subset_max_rejects_length_mismatch():
    with pytest.raises(ValueError):
        subset_max_product((0.5, 0.5), (0.5,))


def test_zero_weights_leave_witness():
    res = subset_max_product((0.8, 0.0, 0.0), (0.25, 0.5, 0.5))
    assert res.witness == (1,)
    res = subset_max_product((0.0, 0.0), (0.25, 0.5))
    assert res.value == 0.0 and res.witness == (1,)


def test_ties_resolve_to_lexicographically_smallest():
    assert subset_max_product((0.5, 0.5), (0.5, 0.5)).witness == (1,)
    assert subset_max_sum((0.5, 0.5), (0.5, 0.5)).witness == (1,)


instances = st.integers(1, 14).flatmap(
    lambda d: st.tuples(
        st.lists(st.one_of(st.just(0.0), st.just(1.0), st.floats(0, 1)), min_size=d, max_size=d),
        st.lists(st.integers(1, 40), min_size=d, max_size=d),
    )
)


@settings(max_examples=150, deadline=None)
@given(instances)
def test_dp_equals_exhaustive(inst):
    gammas, m = inst
    eps = [1 / (2 * mj) for mj in m]
    dp = subset_max_product(gammas, eps)
    ex = subset_max_product_exhaustive(gammas, eps)
    assert dp.value == ex.value
    assert witness_value(gammas, eps, dp.witness) >= ex.value - TIE_TOL
    dp = subset_max_sum(gammas, eps)
    ex = subset_max_sum_exhaustive(gammas, eps)
    assert dp.value == ex.value


def witness_value(gammas, eps, u):
    gu = 1.0
    keep = 1.0
    for j in u:
        gu *= gammas[j - 1]
        keep *= 1 - eps[j - 1]
    return gu * (1 - keep)


weight_seqs = st.one_of(
    st.floats(0.5, 3).map(Polynomial),
    st.floats(0.05, 1).map(Constant),
    st.lists(st.floats(0, 1), min_size=1, max_size=5).map(lambda v: Explicit(tuple(sorted(v, reverse=True)))),
)
grids = st.lists(st.integers(1, 12), min_size=1, max_size=6)


@settings(max_examples=100, deadline=None)
@given(weight_seqs, grids, st.data())
def test_monotone_in_each_mesh_size(w, m, data):
    j = data.draw(st.integers(0, len(m) - 1))
    bigger = list(m)
    bigger[j] += data.draw(st.integers(1, 5))
    pw = ProductWeights(w)
    assert star_disc_grid(GridSpec(tuple(bigger))) <= star_disc_grid(GridSpec(tuple(m)))
    assert (
        weighted_star_disc_grid(GridSpec(tuple(bigger)), pw).value
        <= weighted_star_disc_grid(GridSpec(tuple(m)), pw).value
    )


@settings(max_examples=100, deadline=None)
@given(weight_seqs, grids)
def test_sandwich_and_range(w, m):
    g = GridSpec(tuple(m))
    pw = ProductWeights(w)
    exact = weighted_star_disc_grid(g, pw).value
    upper = weighted_disc_upper_bound(g, pw).value
    assert 0.0 <= exact <= 1.0 and 0.0 <= star_disc_grid(g) <= 1.0
    assert exact <= upper + 1e-15
    for ell in range(1, g.d + 1):
        assert lower_bound_coord(g, pw, ell) <= exact + 1e-15


@settings(max_examples=50, deadline=None)
@given(grids)
def test_unweighted_reduction(m):
    g = GridSpec(tuple(m))
    assert weighted_star_disc_grid(g, ProductWeights(Constant(1.0))).value == pytest.approx(star_disc_grid(g), abs=1e-15)


def test_weighted_examples():
    g = GridSpec((1, 1))
    w = ProductWeights(Explicit((0.5, 0.25)))
    res = weighted_star_disc_grid(g, w)
    assert (res.value, res.witness) == (0.25, (1,))
    oracle = weighted_star_disc_exact(grid_points(g), None, w)
    assert res.value == pytest.approx(oracle.value, abs=1e-12)
    assert weighted_star_disc_grid(GridSpec((2, 3)), ProductWeights(Constant(1.0))).value == pytest.approx(0.375)


def test_upper_bound_examples():
    res = weighted_disc_upper_bound(GridSpec((1, 1)), ProductWeights(Explicit((0.5, 0.25))))
    assert (res.value, res.witness) == (0.25, (1,))
    assert weighted_disc_upper_bound(GridSpec((2,)), ProductWeights(Constant(1.0))).value == 0.25


def test_explicit_weights_agree_with_product():
    pw = ProductWeights(Polynomial(1.5))
    for m in [(1, 2, 3), (4, 1, 2), (5, 5, 5, 2)]:
        g = GridSpec(m)
        ew = ExplicitWeights.from_product(pw, g.d)
        assert weighted_star_disc_grid(g, ew).value == pytest.approx(weighted_star_disc_grid(g, pw).value, abs=1e-15)
        assert weighted_disc_upper_bound(g, ew).value == pytest.approx(weighted_disc_upper_bound(g, pw).value, abs=1e-15)


def test_explicit_weights_dimension_mismatch():
    ew = ExplicitWeights.from_product(ProductWeights(Constant(1.0)), 2)
    with pytest.raises(ValueError):
        weighted_star_disc_grid(GridSpec((1, 1, 1)), ew)


def test_lower_bound_coord_examples():
    w = ProductWeights(Explicit((0.5, 0.25)))
    assert lower_bound_coord(GridSpec((1,)), w, 1) == 0.125
    assert lower_bound_coord(GridSpec((1, 1)), w, 1) <= weighted_star_disc_grid(GridSpec((1, 1)), w).value
    assert lower_bound_coord(GridSpec((1, 1)), ProductWeights(Explicit((1.0,))), 2) == 0.0
    with pytest.raises(ValueError):
        lower_bound_coord(GridSpec((1, 1)), w, 3)
