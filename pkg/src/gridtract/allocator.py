"""Mesh-size allocations that meet a weighted-discrepancy budget.

Three constructive recipes (WT, UWT and SPT regimes), a greedy improver, an
exact branch-and-bound minimizer of ``N = prod m_j`` under QMC coefficients,
and the coefficient-free lower bounds on the minimal grid size.

Every allocation is re-certified with the closed-form discrepancy of
:mod:`gridtract.griddisc`; the recipe arithmetic is never trusted on its own.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import special

from .core import (
    TOL,
    Constant,
    Explicit,
    ExplicitWeights,
    Geometric,
    GridSpec,
    Polynomial,
    ProductWeights,
    WeightSequence,
    subsets,
)
from .errors import CertificationError, InfeasibleRecipeError, ResourceCapError
from .griddisc import (
    lower_bound,
    subset_max_product,
    weighted_disc_upper_bound,
    weighted_star_disc_grid,
)

RECIPES = ("wt", "uwt", "spt", "greedy", "exact")

GREEDY_ITER_CAP = 10**5
EXACT_DIM_CAP = 6
NODE_BUDGET = 10**7
SERIES_TAIL_TOL = 1e-15


def _product(w) -> ProductWeights:
    if isinstance(w, ProductWeights):
        return w
    if isinstance(w, WeightSequence):
        return ProductWeights(w)
    raise TypeError(f"expected weight sequence or product weights; got {type(w).__name__}")


def _weights(w):
    return w if isinstance(w, ExplicitWeights) else _product(w)


def _check_eps(eps):
    if not 0 < eps < 1:
        raise ValueError(f"budget eps must lie in (0,1); got {eps}")


def _check_d(d):
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be an integer >= 1; got {d}")


# ---------------------------------------------------------------------------
# weight-sequence constants


def decay_constant(w: WeightSequence, n: int = 1) -> float:
    """``sup_j j**n * gamma_j``; infinite when ``gamma_j`` is not ``O(j**-n)``."""
    if isinstance(w, ProductWeights):
        w = w.base
    if isinstance(w, Polynomial):
        return 1.0 if w.alpha >= n else math.inf
    if isinstance(w, Constant):
        return math.inf
    if isinstance(w, Geometric):
        # x**n * omega**(x**alpha) is unimodal with its peak at x_star
        x_star = (n / (w.alpha * math.log(1 / w.omega))) ** (1 / w.alpha)
        cands = {1, max(1, math.floor(x_star)), max(1, math.ceil(x_star))}
        return max(j**n * w.gamma(j) for j in cands)
    if isinstance(w, Explicit):
        if not w.eventually_zero:
            return math.inf
        return max(j**n * v for j, v in enumerate(w.values, start=1))
    raise TypeError(f"unsupported weight sequence {type(w).__name__}")


def _geometric_sqrt_sum(omega: float, alpha: float) -> float:
    # terms t_j = exp(-c j**alpha), c = log(1/omega)/2; decreasing, so
    # sum_{j >= J} t_j <= int_{J-1}^inf exp(-c x**alpha) dx
    c = math.log(1 / omega) / 2
    a = 1 / alpha
    J = max(2, math.ceil((math.log(1e17) / c) ** a) + 1)
    while True:
        tail = special.gamma(a) * special.gammaincc(a, c * (J - 1) ** alpha) / (alpha * c**a)
        if tail <= SERIES_TAIL_TOL:
            break
        J *= 2
    j = np.arange(1, J, dtype=float)
    return float(math.fsum(np.exp(-c * j**alpha)) + tail)


def sqrt_sum(w: WeightSequence) -> float:
    """``S = sum_j sqrt(gamma_j)``, rounded up by a tail bound where the series is infinite."""
    if isinstance(w, ProductWeights):
        w = w.base
    if isinstance(w, Polynomial):
        if w.alpha <= 2:
            raise InfeasibleRecipeError(
                f"sum of sqrt(gamma_j) diverges for polynomial weights with alpha={w.alpha} <= 2"
            )
        return float(special.zeta(w.alpha / 2))
    if isinstance(w, Geometric):
        return _geometric_sqrt_sum(w.omega, w.alpha)
    if isinstance(w, Explicit) and w.eventually_zero:
        return math.fsum(math.sqrt(v) for v in w.values)
    raise InfeasibleRecipeError(
        f"sum of sqrt(gamma_j) diverges for {w.spec}: the weights do not tend to zero"
    )


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class AllocationReport:
    """A certified grid together with its bound bracket and recipe constants."""

    grid: GridSpec
    achieved: float
    eps: float
    recipe: str
    upper: float
    lower: float
    witness: tuple[int, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def log_n(self) -> float:
        return self.grid.log_n

    def to_dict(self) -> dict:
        return {
            "recipe": self.recipe,
            "eps": self.eps,
            "m": list(self.grid.m),
            "N": self.n,
            "logN": self.log_n,
            "achieved": self.achieved,
            "witness": list(self.witness),
            "upper_bound": self.upper,
            "lower_bound": self.lower,
            "metadata": dict(self.metadata),
        }


def certify(m, w, eps: float, recipe: str, metadata=None, tol: float = TOL) -> AllocationReport:
    """Evaluate the grid ``m`` and build a report; raise if it misses the budget."""
    grid = GridSpec(tuple(m))
    w = _weights(w)
    exact = weighted_star_disc_grid(grid, w)
    if exact.value > eps + tol:
        raise CertificationError(
            f"{recipe} grid m={grid.m} has weighted discrepancy {exact.value!r} > eps={eps!r}"
        )
    upper = weighted_disc_upper_bound(grid, w).value
    low = lower_bound(grid, w) if isinstance(w, ProductWeights) else max(
        w.singleton(j) / (4 * mj) for j, mj in enumerate(grid.m, start=1)
    )
    return AllocationReport(grid, exact.value, eps, recipe, upper, low, exact.witness, dict(metadata or {}))


def _last_active(m) -> int:
    return max((j for j, mj in enumerate(m, start=1) if mj > 1), default=0)


def allocate_wt(w, eps: float, d: int, tol: float = TOL) -> AllocationReport:
    """``m_j = ceil(gamma_j * 3 C e**C / (4 eps))`` where ``gamma_j <= C/j`` and ``C >= 1``."""
    _check_eps(eps)
    _check_d(d)
    pw = _product(w)
    sup = decay_constant(pw.base, 1)
    if not math.isfinite(sup):
        raise InfeasibleRecipeError(
            f"wt recipe needs gamma_j <= C/j for some finite C; sup_j j*gamma_j is infinite for {pw.base.spec}"
        )
    C = max(1.0, sup)
    M = 3 * C * math.exp(C) / (4 * eps)
    m = [max(1, math.ceil(g * M)) for g in pw.gammas(d)]
    meta = {"C": C, "M": M, "j_star": _last_active(m)}
    return certify(m, pw, eps, "wt", meta, tol)


def allocate_uwt(w, eps: float, d: int, tol: float = TOL) -> AllocationReport:
    """``m_j = ceil(sqrt(gamma_j) / delta)`` with ``delta = 2 eps / S``, ``S = sum sqrt(gamma_j)``."""
    _check_eps(eps)
    _check_d(d)
    pw = _product(w)
    S = sqrt_sum(pw.base)
    delta = float(2 * eps / S)
    m = [max(1, math.ceil(math.sqrt(g) / delta)) for g in pw.gammas(d)]
    meta = {"S": S, "delta": delta, "j_star": _last_active(m)}
    return certify(m, pw, eps, "uwt", meta, tol)


def allocate_spt(w, eps: float, d: int, tol: float = TOL) -> AllocationReport:
    """``m_j = ceil(tau / (2 eps))`` on the ``tau`` active coordinates, 1 elsewhere."""
    _check_eps(eps)
    _check_d(d)
    pw = _product(w)
    tau = pw.base.tau
    if tau is None:
        raise InfeasibleRecipeError(f"spt recipe needs eventually-zero weights; {pw.base.spec} is not")
    # budgets are read as the decimals the user typed, so 0.15 means 3/20
    side = max(1, math.ceil(Fraction(tau) / (2 * Fraction(str(eps))))) if tau else 1
    m = [side if j <= tau else 1 for j in range(1, d + 1)]
    return certify(m, pw, eps, "spt", {"tau": tau}, tol)


def _term(m, u) -> float:
    prod = 1.0
    for j in u:
        prod *= 1.0 - 1.0 / (2 * m[j - 1])
    return 1.0 - prod


def allocate_greedy(w, eps: float, d: int, tol: float = TOL, iter_cap: int = GREEDY_ITER_CAP) -> AllocationReport:
    """Refine the coordinates of the current worst subset, best decrease per unit of log N first."""
    _check_eps(eps)
    _check_d(d)
    w = _weights(w)
    if isinstance(w, ExplicitWeights) and w.d != d:
        raise ValueError(f"weights are for d={w.d}, requested d={d}")
    m = [1] * d
    cur = weighted_star_disc_grid(GridSpec(tuple(m)), w)
    steps = 0
    while cur.value > eps + tol:
        steps += 1
        if steps > iter_cap:
            raise ResourceCapError(f"greedy allocation exceeded {iter_cap} iterations", estimated_work=iter_cap)
        u = cur.witness
        gu = w.gamma_u(u)
        # score by the worst subset's own term: the global maximum can stay
        # put when another subset ties, which would stall the refinement
        best = None
        for j in u:
            trial = list(m)
            trial[j - 1] += 1
            drop = cur.value - gu * _term(trial, u)
            score = drop / math.log(trial[j - 1] / m[j - 1])
            if best is None or score > best[0]:
                best = (score, j)
        m[best[1] - 1] += 1
        cur = weighted_star_disc_grid(GridSpec(tuple(m)), w)
    return certify(m, w, eps, "greedy", {"iterations": steps}, tol)


def allocate(recipe: str, w, eps: float, d: int, tol: float = TOL):
    """Dispatch by recipe name; ``exact`` returns an :class:`NBracket`."""
    funcs = {
        "wt": allocate_wt,
        "uwt": allocate_uwt,
        "spt": allocate_spt,
        "greedy": allocate_greedy,
        "exact": n_min_exact,
    }
    if recipe not in funcs:
        raise ValueError(f"recipe must be one of {RECIPES}; got {recipe!r}")
    return funcs[recipe](w, eps, d, tol=tol)


# ---------------------------------------------------------------------------
# exact minimization


@dataclass(frozen=True)
class NBracket:
    """Minimal grid size: coefficient-free lower bound and the QMC minimum.

    ``exact`` is False when the node budget ran out, in which case
    ``qmc_min`` is only an upper bound.
    """

    lower: float
    qmc_min: int
    witness: GridSpec
    exact: bool = True
    nodes: int = 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["witness"] = list(self.witness.m)
        out["qmc_min_is_upper_bound_only"] = not self.exact
        return out


class _BudgetExceeded(Exception):
    pass


def _singletons(w, d):
    if isinstance(w, ExplicitWeights):
        return [w.singleton(j) for j in range(1, d + 1)]
    return list(w.gammas(d))


def coefficient_free_lower(w, eps: float, d: int) -> float:
    """``prod_j max(1, gamma_j / (4 eps))``; no coefficient choice on a smaller grid meets eps."""
    out = 1.0
    for g in _singletons(_weights(w), d):
        out *= max(1.0, g / (4 * eps))
    return out


def _relaxed_value(w, m, assigned, d):
    """Weighted discrepancy when every unassigned mesh-size tends to infinity."""
    if isinstance(w, ExplicitWeights):
        best = 0.0
        for u in subsets(d):
            prod = 1.0
            for j in u:
                if assigned[j - 1]:
                    prod *= 1.0 - 1.0 / (2 * m[j - 1])
            best = max(best, w.gamma_u(u) * (1.0 - prod))
        return best
    # product weights are <= 1, so adding an unrefined coordinate never helps
    idx = [j for j in range(d) if assigned[j]]
    gam = w.gammas(d)
    return subset_max_product([gam[j] for j in idx], [1.0 / (2 * m[j]) for j in idx]).value


def n_min_exact(
    w,
    eps: float,
    d: int,
    tol: float = TOL,
    node_budget: int = NODE_BUDGET,
    dim_cap: int = EXACT_DIM_CAP,
) -> NBracket:
    """Exact minimum of ``prod m_j`` subject to the QMC weighted discrepancy ``<= eps``.

    Depth-first branch-and-bound over coordinates taken in order of decreasing
    weight. Each ``m_j`` starts at its singleton bound ``ceil(gamma_j / (2 eps))``;
    a branch is cut once its product with the remaining singleton bounds reaches
    the incumbent, and a partial assignment is skipped when it misses the
    budget even with all remaining mesh-sizes taken to infinity.
    """
    _check_eps(eps)
    _check_d(d)
    if d > dim_cap:
        raise ResourceCapError(f"exact minimization limited to d <= {dim_cap}; got d={d}")
    w = _weights(w)
    if isinstance(w, ExplicitWeights) and w.d != d:
        raise ValueError(f"weights are for d={w.d}, requested d={d}")
    single = _singletons(w, d)
    low = [max(1, math.ceil(g / (2 * (eps + tol)))) for g in single]
    order = sorted(range(d), key=lambda j: -single[j])
    suffix = [1] * (d + 1)
    for k in range(d - 1, -1, -1):
        suffix[k] = suffix[k + 1] * low[order[k]]

    greedy = allocate_greedy(w, eps, d, tol=tol)
    best = {"n": greedy.n, "m": list(greedy.grid.m)}
    m = list(low)
    assigned = [False] * d
    nodes = 0

    def dfs(k, partial):
        nonlocal nodes
        j = order[k]
        mj = low[j]
        assigned[j] = True
        while partial * mj * suffix[k + 1] < best["n"]:
            nodes += 1
            if nodes > node_budget:
                raise _BudgetExceeded
            m[j] = mj
            if _relaxed_value(w, m, assigned, d) <= eps + tol:
                if k == d - 1:
                    best["n"] = partial * mj
                    best["m"] = list(m)
                    break
                dfs(k + 1, partial * mj)
            mj += 1
        assigned[j] = False
        m[j] = low[j]

    exact = True
    try:
        dfs(0, 1)
    except _BudgetExceeded:
        exact = False
    return NBracket(
        lower=coefficient_free_lower(w, eps, d),
        qmc_min=best["n"],
        witness=GridSpec(tuple(best["m"])),
        exact=exact,
        nodes=nodes,
    )


# ---------------------------------------------------------------------------
# closed-form bounds


@dataclass(frozen=True)
class LowerBounds:
    per_coord: float
    constant_family: float | None
    last_weight: float


def n_lower_bounds(w, eps: float, d: int) -> LowerBounds:
    """Lower bounds on the minimal grid size valid for arbitrary coefficients.

    ``per_coord = prod max(1, gamma_j/(4 eps))``, ``constant_family = (c/(4 eps))**d``
    for constant weights, ``last_weight = (gamma_d/(4 eps))**d``.
    """
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0,1]; got {eps}")
    _check_d(d)
    pw = _product(w)
    const = None
    if isinstance(pw.base, Constant):
        const = (pw.base.c / (4 * eps)) ** d
    return LowerBounds(
        per_coord=coefficient_free_lower(pw, eps, d),
        constant_family=const,
        last_weight=(pw.gamma(d) / (4 * eps)) ** d,
    )


def qpt_bound_geometric(omega: float, alpha: float, eps: float) -> float:
    """``exp(log(S/eps)**(1 + 1/alpha) / log(1/sqrt(omega))**(1/alpha))`` for ``gamma_j = omega**(j**alpha)``.

    Requires ``0 < eps < S sqrt(omega) / 2``.
    """
    w = Geometric(omega, alpha)
    S = sqrt_sum(w)
    limit = S * math.sqrt(omega) / 2
    if not 0 < eps < limit:
        raise ValueError(f"eps must lie in (0, {limit!r}) for omega={omega}, alpha={alpha}; got {eps}")
    exponent = math.log(S / eps) ** (1 + 1 / alpha) / math.log(1 / math.sqrt(omega)) ** (1 / alpha)
    return math.exp(exponent)


def uwt_logn_bound(C: float, n: int, S: float, eps: float) -> float:
    """Bound on log N of the UWT allocation when ``gamma_j <= C / j**n``.

    ``(n/2) * (C * S**2)**(1/n) * eps**(-2/n)``.
    """
    if C <= 0 or S <= 0 or eps <= 0:
        raise ValueError("C, S and eps must be positive")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1; got {n}")
    return n / 2 * (C * S**2) ** (1 / n) * eps ** (-2 / n)
