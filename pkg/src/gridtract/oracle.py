"""Brute-force (weighted) star discrepancy for arbitrary point sets and coefficients.

The local discrepancy ``Delta(alpha) = sum_{x < alpha} a_x - vol([0, alpha))`` is a
piecewise-constant point-mass term minus a volume that is monotone in every
coordinate. On each cell of the critical grid (point coordinates plus 1.0) the
point-mass term is fixed, so ``|Delta|`` is extremal at the cell's lower corner
(approached from above, the closed count ``sum_{x <= alpha}``) or at its upper
corner (the open count ``sum_{x < alpha}``). Evaluating both counts at every
critical vertex gives the exact supremum for any real coefficients.

Coordinates and coefficients that are floats of small-denominator rationals
(every grid case) are evaluated in exact rational arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import (
    CoefficientSet,
    ExplicitWeights,
    PointSet,
    ProductWeights,
    project,
    subsets,
    work_cap,
)
from .errors import ResourceCapError
from .griddisc import TIE_TOL, SubsetValue

WEIGHTED_DIM_CAP = 12
MAX_DENOMINATOR = 10**6
EXACT_CELL_LIMIT = 200_000


@dataclass(frozen=True)
class CriticalGrid:
    """Per-coordinate sorted, duplicate-free candidate values, each ending in 1.0."""

    values: tuple[np.ndarray, ...]

    @classmethod
    def of(cls, p: PointSet) -> "CriticalGrid":
        return cls(tuple(np.append(np.unique(p.points[:, j]), 1.0) for j in range(p.d)))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.values)

    @property
    def size(self) -> int:
        return math.prod(self.shape)


def _check(p: PointSet, a: CoefficientSet):
    if len(a) != p.n:
        raise ValueError(f"{len(a)} coefficients for {p.n} points")


def estimated_work(p: PointSet, grid: CriticalGrid | None = None) -> int:
    grid = CriticalGrid.of(p) if grid is None else grid
    return p.n * grid.size


def _rationalize(values):
    out = []
    for x in values:
        r = Fraction(float(x)).limit_denominator(MAX_DENOMINATOR)
        if float(r) != float(x):
            return None
        out.append(r)
    return out


def local_discrepancy(p: PointSet, a: CoefficientSet, alpha) -> float:
    """``sum_{x in [0, alpha)} a_x - prod alpha_j``."""
    _check(p, a)
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.shape != (p.d,):
        raise ValueError(f"alpha has {alpha.size} entries, points have d={p.d}")
    if np.any(alpha < 0) or np.any(alpha > 1):
        raise ValueError("alpha must lie in [0,1]^d")
    inside = np.all(p.points < alpha, axis=1)
    return math.fsum(a.coefficients[inside]) - math.prod(alpha.tolist())


def _tables(p: PointSet, a: CoefficientSet, exact: bool | None):
    """Closed counts, open counts and volumes on the critical grid."""
    grid = CriticalGrid.of(p)
    work = estimated_work(p, grid)
    cap = work_cap()
    if work > cap:
        raise ResourceCapError(
            f"brute-force work {work:.3g} exceeds cap {cap:.3g}", estimated_work=work
        )
    idx = tuple(np.searchsorted(grid.values[j], p.points[:, j]) for j in range(p.d))

    coeffs = axes = None
    if exact is not False and grid.size <= EXACT_CELL_LIMIT:
        coeffs = _rationalize(a.coefficients)
        axes = [_rationalize(v) for v in grid.values]
        if coeffs is None or any(ax is None for ax in axes):
            coeffs = axes = None
    if exact and coeffs is None:
        raise ValueError("exact evaluation requested but inputs are not small-denominator rationals")

    if coeffs is not None:
        mass = np.full(grid.shape, Fraction(0), dtype=object)
        for k, c in enumerate(coeffs):
            pos = tuple(int(ix[k]) for ix in idx)
            mass[pos] += c
        vol = np.array(Fraction(1), dtype=object)
        for ax in axes:
            vol = np.multiply.outer(vol, np.array(ax, dtype=object))
        zero = Fraction(0)
    else:
        mass = np.zeros(grid.shape)
        np.add.at(mass, idx, a.coefficients)
        vol = np.ones(())
        for ax in grid.values:
            vol = np.multiply.outer(vol, ax)
        zero = 0.0

    closed = mass
    for axis in range(p.d):
        closed = np.cumsum(closed, axis=axis)
    # open count at vertex i = closed count at i - 1 on every axis
    open_ = np.pad(closed, [(1, 0)] * p.d, constant_values=zero)
    open_ = open_[tuple(slice(0, -1) for _ in range(p.d))]
    return closed, open_, vol


def _sup_abs(closed, open_, vol) -> float:
    return float(max(np.max(np.abs(closed - vol)), np.max(np.abs(open_ - vol))))


def star_disc_exact(p: PointSet, a: CoefficientSet | None = None, exact: bool | None = None) -> float:
    """Exact ``sup_alpha |Delta(alpha)|``; ``a`` defaults to QMC coefficients.

    ``exact=None`` uses rational arithmetic whenever the inputs allow it.
    """
    a = CoefficientSet.equal(p.n) if a is None else a
    _check(p, a)
    return _sup_abs(*_tables(p, a, exact))


def _weights_for(w, d):
    if isinstance(w, ExplicitWeights):
        if w.d != d:
            raise ValueError(f"weights are for d={w.d}, points have d={d}")
    return {u: w.gamma_u(u) for u in subsets(d)}


def _select(values: dict) -> SubsetValue:
    top = max(values.values())
    witness = min(u for u, v in values.items() if v >= top - TIE_TOL)
    return SubsetValue(top, witness)


def weighted_star_disc_exact(
    p: PointSet,
    a: CoefficientSet | None,
    w: ProductWeights | ExplicitWeights,
    method: str | None = None,
    dim_cap: int = WEIGHTED_DIM_CAP,
) -> SubsetValue:
    """Weighted star discrepancy by brute force.

    ``method="projection"`` evaluates ``max_u gamma_u D*(projection to u)``;
    ``method="direct"`` evaluates the definition with the coordinates outside
    ``u`` anchored at 1 on the full-dimensional critical grid. The default is
    projection for QMC coefficients and direct otherwise.
    """
    a = CoefficientSet.equal(p.n) if a is None else a
    _check(p, a)
    if p.d > dim_cap:
        raise ResourceCapError(f"subset enumeration limited to d <= {dim_cap}; got d={p.d}")
    if method is None:
        method = "projection" if a.is_qmc() else "direct"
    gammas = _weights_for(w, p.d)

    values = {}
    if method == "projection":
        for u, gu in gammas.items():
            values[u] = gu * star_disc_exact(project(p, u), a)
    elif method == "direct":
        closed, open_, vol = _tables(p, a, None)
        for u, gu in gammas.items():
            # non-members sit at the last critical value, alpha_j = 1
            sl = tuple(slice(None) if j in u else -1 for j in range(1, p.d + 1))
            values[u] = gu * _sup_abs(closed[sl], open_[sl], vol[sl])
    else:
        raise ValueError(f"method must be 'projection' or 'direct'; got {method!r}")
    return _select(values)


def read_points(path, coefficient_column: bool = False) -> tuple[PointSet, CoefficientSet | None]:
    """Read whitespace-separated points, one per line; ``#`` starts a comment.

    With ``coefficient_column`` the last column holds the coefficient ``a_x``.
    """
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(t) for t in line.split()])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric entry in {line!r}") from None
    if not rows:
        raise ValueError(f"{path}: no points")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: rows have differing lengths {sorted(widths)}")
    data = np.array(rows)
    if coefficient_column:
        if data.shape[1] < 2:
            raise ValueError(f"{path}: coefficient column needs at least one coordinate column")
        return PointSet(data[:, :-1]), CoefficientSet(data[:, -1])
    return PointSet(data), None
