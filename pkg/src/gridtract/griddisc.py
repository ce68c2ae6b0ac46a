"""Closed-form (weighted) star discrepancy of centered regular grids with QMC coefficients.

For the centered grid with mesh-sizes ``m`` and ``eps_j = 1/(2 m_j)``::

    D*      = 1 - prod_j (1 - eps_j)
    D*_gamma = max_{u != {}} gamma_u (1 - prod_{j in u} (1 - eps_j))

For product weights the maximum over the ``2**d - 1`` subsets is found with a
Pareto-front dynamic programme instead of enumeration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ExplicitWeights, GridSpec, ProductWeights, subsets

#: Subsets within this distance of the maximum count as tied for the witness.
TIE_TOL = 1e-15

EXHAUSTIVE_DIM_CAP = 24


@dataclass(frozen=True)
class SubsetValue:
    """Result of a maximum over nonempty coordinate subsets; ``witness`` attains ``value``."""

    value: float
    witness: tuple[int, ...]


def _require_centered(g: GridSpec):
    if not g.centered:
        raise NotImplementedError(
            "closed form only established for centered grids; use oracle.star_disc_exact"
        )


def half_inverse_mesh(g: GridSpec) -> list[float]:
    """``eps_j = 1/(2 m_j)`` for each coordinate."""
    return [1.0 / (2 * mj) for mj in g.m]


def star_disc_grid(g: GridSpec) -> float:
    """Unweighted star discrepancy ``1 - prod (1 - 1/(2 m_j))``."""
    _require_centered(g)
    prod = 1.0
    for e in half_inverse_mesh(g):
        prod *= 1.0 - e
    return 1.0 - prod


def _check_inputs(gammas, eps):
    if len(gammas) != len(eps) or len(gammas) < 1:
        raise ValueError(f"need equal nonzero lengths; got {len(gammas)} and {len(eps)}")
    for j, (gj, ej) in enumerate(zip(gammas, eps), start=1):
        if not 0.0 <= gj <= 1.0:
            raise ValueError(f"gamma_{j} = {gj} outside [0,1]")
        if not 0.0 < ej <= 0.5:
            raise ValueError(f"eps_{j} = {ej} outside (0, 0.5]")


def _best(states, objective):
    """Largest objective; the witness is the lexicographically smallest subset within TIE_TOL."""
    values = [objective(s) for s in states]
    top = max(values)
    tied = [s for s, v in zip(states, values) if v >= top - TIE_TOL]
    return SubsetValue(top, min(s[-1] for s in tied))


def _prune_disc(states):
    # (A, B, witness): keep A large and B small. Every extension has value
    # at most A, so states with A below the best value so far are dead.
    floor = max(a - b for a, b, _ in states) - TIE_TOL
    states.sort(key=lambda s: (-s[0], s[1], s[2]))
    kept = []
    best_b = math.inf
    for s in states:
        if s[0] < floor:
            break
        if s[1] < best_b:
            kept.append(s)
            best_b = s[1]
    return kept


def subset_max_product(gammas: Sequence[float], eps: Sequence[float]) -> SubsetValue:
    """Maximize ``prod_{u} gamma_j * (1 - prod_{u} (1 - eps_j))`` over nonempty ``u``.

    Each state is ``(A, B) = (prod gamma_j, prod gamma_j (1 - eps_j))``. Adding
    coordinate ``j`` multiplies A by ``p = gamma_j`` and B by ``q = p (1 - eps_j)``
    with ``p >= q >= 0``, so a state with larger A and smaller B stays ahead of
    another after any common extension and dominated states can be dropped.
    The empty subset ``(1, 1)`` only seeds singletons and is never a candidate.
    Since ``A`` never grows, a state whose ``A`` falls below the best value
    seen so far cannot lead to the maximum and is dropped as well.
    """
    _check_inputs(gammas, eps)
    front: list[tuple[float, float, tuple[int, ...]]] = []
    for j, (gj, ej) in enumerate(zip(gammas, eps), start=1):
        p = float(gj)
        q = p * (1.0 - ej)
        grown = [(a * p, b * q, w + (j,)) for a, b, w in front]
        front = _prune_disc(front + grown + [(1.0 * p, 1.0 * q, (j,))])
    return _best(front, lambda s: s[0] - s[1])


def _prune_sum(states, rest):
    # (A, S, witness): keep both A and S large. Extensions reach at most
    # A * (S + rest), where rest is the eps still to come.
    floor = max(a * s for a, s, _ in states) - TIE_TOL
    states.sort(key=lambda s: (-s[0], -s[1], s[2]))
    kept = []
    best_s = -math.inf
    for s in states:
        if s[1] > best_s and s[0] * (s[1] + rest) * (1 + 1e-12) >= floor:
            kept.append(s)
            best_s = s[1]
    return kept


def subset_max_sum(gammas: Sequence[float], eps: Sequence[float]) -> SubsetValue:
    """Maximize ``prod_{u} gamma_j * sum_{u} eps_j`` over nonempty ``u`` (Pareto DP on (A, S))."""
    _check_inputs(gammas, eps)
    front: list[tuple[float, float, tuple[int, ...]]] = []
    rest = math.fsum(eps)
    for j, (gj, ej) in enumerate(zip(gammas, eps), start=1):
        p = float(gj)
        rest -= ej
        grown = [(a * p, s + ej, w + (j,)) for a, s, w in front]
        front = _prune_sum(front + grown + [(1.0 * p, 0.0 + ej, (j,))], max(rest, 0.0))
    return _best(front, lambda s: s[0] * s[1])


def _exhaustive_tables(gammas, eps):
    """Products over every subset, indexed by bitmask (bit j-1 <=> j in u).

    Built by doubling in coordinate order so each entry is the same sequence
    of float multiplications the DP performs.
    """
    a = np.ones(1)
    b = np.ones(1)
    s = np.zeros(1)
    for gj, ej in zip(gammas, eps):
        p = float(gj)
        q = p * (1.0 - ej)
        a = np.concatenate([a, a * p])
        b = np.concatenate([b, b * q])
        s = np.concatenate([s, s + ej])
    return a, b, s


def _mask_to_subset(mask: int) -> tuple[int, ...]:
    return tuple(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)


def _pick(values: np.ndarray) -> SubsetValue:
    values = values.copy()
    values[0] = -np.inf
    top = values.max()
    masks = np.flatnonzero(values >= top - TIE_TOL)
    return SubsetValue(float(top), min(_mask_to_subset(int(k)) for k in masks))


def subset_max_product_exhaustive(gammas: Sequence[float], eps: Sequence[float]) -> SubsetValue:
    """Reference enumeration of all ``2**d - 1`` subsets for :func:`subset_max_product`."""
    _check_inputs(gammas, eps)
    if len(gammas) > EXHAUSTIVE_DIM_CAP:
        raise ValueError(f"exhaustive enumeration limited to d <= {EXHAUSTIVE_DIM_CAP}")
    a, b, _ = _exhaustive_tables(gammas, eps)
    return _pick(a - b)


def subset_max_sum_exhaustive(gammas: Sequence[float], eps: Sequence[float]) -> SubsetValue:
    _check_inputs(gammas, eps)
    if len(gammas) > EXHAUSTIVE_DIM_CAP:
        raise ValueError(f"exhaustive enumeration limited to d <= {EXHAUSTIVE_DIM_CAP}")
    a, _, s = _exhaustive_tables(gammas, eps)
    return _pick(a * s)


def _explicit_max(g: GridSpec, w: ExplicitWeights, term) -> SubsetValue:
    if w.d != g.d:
        raise ValueError(f"weights are for d={w.d}, grid has d={g.d}")
    eps = half_inverse_mesh(g)
    states = [(w.gamma_u(u) * term([eps[j - 1] for j in u]), u) for u in subsets(g.d)]
    return _best(states, lambda s: s[0])


def _disc_term(eps_u):
    prod = 1.0
    for e in eps_u:
        prod *= 1.0 - e
    return 1.0 - prod


def weighted_star_disc_grid(g: GridSpec, w: ProductWeights | ExplicitWeights) -> SubsetValue:
    """Weighted star discrepancy of a centered grid with QMC coefficients."""
    _require_centered(g)
    if isinstance(w, ExplicitWeights):
        return _explicit_max(g, w, _disc_term)
    return subset_max_product(w.gammas(g.d), half_inverse_mesh(g))


def weighted_disc_upper_bound(g: GridSpec, w: ProductWeights | ExplicitWeights) -> SubsetValue:
    """``max_u gamma_u * sum_{j in u} 1/(2 m_j)``, an upper bound on the weighted discrepancy."""
    _require_centered(g)
    if isinstance(w, ExplicitWeights):
        return _explicit_max(g, w, math.fsum)
    return subset_max_sum(w.gammas(g.d), half_inverse_mesh(g))


def lower_bound_coord(g: GridSpec, w: ProductWeights, ell: int) -> float:
    """``gamma_ell / (4 m_ell)``: valid for every choice of coefficients on the grid."""
    if int(ell) != ell or not 1 <= ell <= g.d:
        raise ValueError(f"coordinate {ell} outside [1..{g.d}]")
    ell = int(ell)
    return w.gamma(ell) / (4 * g.m[ell - 1])


def lower_bound(g: GridSpec, w: ProductWeights) -> float:
    """Best of the per-coordinate lower bounds."""
    return max(lower_bound_coord(g, w, ell) for ell in range(1, g.d + 1))
