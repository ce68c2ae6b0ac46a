import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridtract.allocator import (
    allocate,
    allocate_greedy,
    allocate_spt,
    allocate_uwt,
    allocate_wt,
    certify,
    coefficient_free_lower,
    decay_constant,
    n_lower_bounds,
    n_min_exact,
    qpt_bound_geometric,
    sqrt_sum,
    uwt_logn_bound,
)
from gridtract.core import Constant, Explicit, Geometric, GridSpec, Polynomial, ProductWeights
from gridtract.errors import CertificationError, InfeasibleRecipeError, ResourceCapError
from gridtract.griddisc import weighted_star_disc_grid


def plain_minimum(w, eps, d, cap, tol=1e-12):
    """Smallest prod(m) over every mesh vector with prod(m) <= cap that meets eps."""
    pw = ProductWeights(w)
    best = None
    for m in itertools.product(range(1, cap + 1), repeat=d):
        n = math.prod(m)
        if n > cap or (best is not None and n >= best[0]):
            continue
        if weighted_star_disc_grid(GridSpec(m), pw).value <= eps + tol:
            best = (n, m)
    return best


def test_wt_example():
    r = allocate_wt(Polynomial(2), 0.5, 5)
    assert r.grid.m == (5, 2, 1, 1, 1)
    assert r.metadata["C"] == 1.0
    assert r.achieved <= 0.5


def test_uwt_example():
    r = allocate_uwt(Geometric(0.5, 1), 0.25, 6)
    assert r.grid.m == (4, 3, 2, 2, 1, 1)
    assert r.n == 48
    assert r.achieved <= 0.25


def test_spt_example():
    r = allocate_spt(Explicit((1.0, 1.0), "zero"), 0.25, 10)
    assert r.grid.m == (4, 4) + (1,) * 8
    assert r.achieved == 0.234375
    assert r.metadata["tau"] == 2


def test_spt_rounding_edge():
    r = allocate_spt(Explicit((1.0,), "zero"), 0.1, 3)
    assert r.grid.m == (5, 1, 1)
    assert r.achieved == pytest.approx(0.1, abs=1e-12)


@pytest.mark.parametrize("d", [3, 7, 30])
def test_spt_independent_of_dimension(d):
    r = allocate_spt(Explicit((0.9, 0.5, 0.2), "zero"), 0.1, d)
    assert r.n == 15**3


def test_certify_rejects_overshoot():
    with pytest.raises(CertificationError):
        certify((1,), Constant(1.0), 0.25, "manual")
    assert certify((2,), Constant(1.0), 0.25, "manual").achieved == 0.25


def test_report_fields():
    r = allocate_uwt(Geometric(0.5, 1), 0.25, 3)
    out = r.to_dict()
    assert out["N"] == r.n and out["m"] == list(r.grid.m)
    assert out["lower_bound"] <= out["achieved"] <= out["upper_bound"]
    assert r.log_n == pytest.approx(math.log(r.n))


@pytest.mark.parametrize(
    "recipe, w",
    [
        ("wt", Constant(0.5)),
        ("uwt", Polynomial(2)),
        ("uwt", Constant(1.0)),
        ("spt", Geometric(0.5, 1)),
        ("spt", Explicit((0.5,), "repeat")),
    ],
)
def test_recipe_outside_its_regime_is_infeasible(recipe, w):
    with pytest.raises(InfeasibleRecipeError):
        allocate(recipe, w, 0.25, 4)


def test_unknown_recipe():
    with pytest.raises(ValueError):
        allocate("magic", Constant(1.0), 0.25, 2)


@pytest.mark.parametrize("eps", [0.0, -0.1, 1.5])
def test_bad_eps(eps):
    with pytest.raises(ValueError):
        allocate_greedy(Constant(1.0), eps, 2)


def test_wt_accepts_harmonic_weights():
    r = allocate_wt(Polynomial(1), 0.25, 6)
    assert r.metadata["C"] == 1.0 and r.achieved <= 0.25


def test_decay_constant():
    assert decay_constant(Polynomial(2), 1) == 1.0
    assert decay_constant(Geometric(0.5, 1), 4) == pytest.approx(20.25)
    assert decay_constant(Polynomial(3), 3) == 1.0


def test_sqrt_sum_against_partial_sums():
    assert sqrt_sum(Polynomial(4)) == pytest.approx(math.pi**2 / 6, rel=1e-12)
    for w in (Geometric(0.5, 1), Geometric(0.25, 1), Geometric(0.5, 0.5), Geometric(0.3, 2)):
        partial = math.fsum(math.sqrt(w.gamma(j)) for j in range(1, 200_000))
        assert sqrt_sum(w) == pytest.approx(partial, rel=1e-12)
    assert sqrt_sum(Geometric(0.25, 1)) == pytest.approx(1.0, abs=1e-15)
    assert sqrt_sum(Explicit((0.25, 0.04), "zero")) == pytest.approx(0.7)
    with pytest.raises(InfeasibleRecipeError):
        sqrt_sum(Polynomial(2))


weights = st.one_of(
    st.floats(1.2, 3).map(Polynomial),
    st.builds(Geometric, st.floats(0.1, 0.9), st.floats(0.5, 2)),
    st.floats(0.05, 1).map(Constant),
    st.lists(st.floats(0, 1), min_size=1, max_size=4).map(lambda v: Explicit(tuple(sorted(v, reverse=True)))),
)


@settings(max_examples=60, deadline=None)
@given(weights, st.sampled_from([0.5, 0.3, 0.25, 0.1]), st.integers(1, 8))
def test_greedy_feasible_and_bracketed(w, eps, d):
    r = allocate_greedy(w, eps, d)
    assert r.achieved <= eps + 1e-12
    assert r.lower <= r.achieved <= r.upper + 1e-15
    assert coefficient_free_lower(w, eps, d) <= r.n


@settings(max_examples=40, deadline=None)
@given(weights, st.sampled_from([0.5, 0.25, 0.125]), st.integers(1, 3))
def test_exact_minimum_matches_plain_search(w, eps, d):
    br = n_min_exact(w, eps, d)
    cap = allocate_greedy(w, eps, d).n
    n, _ = plain_minimum(w, eps, d, cap)
    assert br.exact and br.qmc_min == n
    assert weighted_star_disc_grid(br.witness, ProductWeights(w)).value <= eps + 1e-12
    assert br.lower <= br.qmc_min <= cap


def test_exact_minimum_constant_weights():
    br = n_min_exact(Constant(1.0), 0.25, 2)
    assert br.qmc_min == 15 and br.witness.m == (3, 5)
    assert plain_minimum(Constant(1.0), 0.25, 2, 25)[0] == 15


def test_exact_budget_exhausted_is_flagged():
    br = n_min_exact(Constant(1.0), 0.1, 3, node_budget=5)
    assert not br.exact
    assert br.to_dict()["qmc_min_is_upper_bound_only"]
    assert br.qmc_min == allocate_greedy(Constant(1.0), 0.1, 3).n


def test_exact_dimension_cap():
    with pytest.raises(ResourceCapError):
        n_min_exact(Constant(1.0), 0.25, 7)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_exact_minimum_monotone_in_budget(d):
    w = Polynomial(1.5)
    sizes = [n_min_exact(w, eps, d).qmc_min for eps in (0.5, 0.3, 0.2, 0.125)]
    assert sizes == sorted(sizes)


def test_exact_minimum_monotone_in_dimension():
    sizes = [n_min_exact(Geometric(0.5, 1), 0.125, d).qmc_min for d in range(1, 5)]
    assert sizes == sorted(sizes)


def test_n_lower_bounds():
    lb = n_lower_bounds(Constant(1.0), 0.125, 3)
    assert lb.per_coord == lb.constant_family == lb.last_weight == 8.0
    lb = n_lower_bounds(Polynomial(2), 0.01, 2)
    assert lb.constant_family is None
    assert lb.per_coord == pytest.approx(25 * 6.25)


def test_qpt_bound_value():
    assert qpt_bound_geometric(0.25, 1, 0.1) == pytest.approx(2099.6, rel=1e-3)
    with pytest.raises(ValueError):
        qpt_bound_geometric(0.25, 1, 0.3)


@pytest.mark.parametrize("omega, eps", [(0.5, 0.2), (0.5, 0.1), (0.5, 0.05), (0.25, 0.2), (0.25, 0.1), (0.25, 0.05)])
@pytest.mark.parametrize("d", [1, 5, 20])
def test_uwt_dominated_by_qpt_bound(omega, eps, d):
    assert allocate_uwt(Geometric(omega, 1), eps, d).n <= qpt_bound_geometric(omega, 1, eps)


def test_uwt_logn_bound_examples():
    assert uwt_logn_bound(1, 2, 1, 0.1) == pytest.approx(10.0)
    # S enters as C * S**2; with S = 2 the bound grows, it does not shrink
    assert uwt_logn_bound(1, 2, 2, 0.1) == pytest.approx(20.0)
    w = Geometric(0.5, 1)
    bound = uwt_logn_bound(decay_constant(w, 4), 4, sqrt_sum(w), 0.1)
    for d in (5, 20, 60):
        assert allocate_uwt(w, 0.1, d).log_n <= bound
    values = [uwt_logn_bound(decay_constant(w, n), n, sqrt_sum(w), 0.01) for n in range(2, 6)]
    assert values == sorted(values, reverse=True)
    with pytest.raises(ValueError):
        uwt_logn_bound(1, 0, 1, 0.1)


def test_optimal_grids_can_be_sorted():
    """Some minimal grid has non-increasing mesh-sizes whenever the weights are non-increasing."""
    rng = random.Random(4)
    for _ in range(60):
        d = rng.randint(2, 4)
        w = Explicit(tuple(sorted((rng.random() for _ in range(d)), reverse=True)))
        eps = rng.choice([0.5, 0.3, 0.25, 0.2])
        target = n_min_exact(w, eps, d).qmc_min
        pw = ProductWeights(w)
        sorted_grids = (
            m for m in itertools.combinations_with_replacement(range(target, 0, -1), d)
            if math.prod(m) == target
        )
        assert any(weighted_star_disc_grid(GridSpec(m), pw).value <= eps + 1e-12 for m in sorted_grids)
