"""Domain types: weight sequences, product and explicit weights, grids, point sets.

All objects are immutable after construction. Indices of coordinates are
1-based throughout the public API, matching the usual ``[d] = {1, ..., d}``
convention for coordinate subsets.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ResourceCapError

#: Absolute slack used in every ``value <= budget`` decision.
TOL = 1e-12

POINT_CAP = 10**7
WORK_CAP = 10**8
EXPLICIT_WEIGHT_DIM_CAP = 20

WORK_CAP_ENV = "GRID_DISC_WORK_CAP"


def work_cap() -> int:
    """Oracle work cap; ``GRID_DISC_WORK_CAP`` overrides the default."""
    raw = os.environ.get(WORK_CAP_ENV)
    return int(float(raw)) if raw else WORK_CAP


def point_cap() -> int:
    raw = os.environ.get(WORK_CAP_ENV)
    return int(float(raw)) if raw else POINT_CAP


# ---------------------------------------------------------------------------
# weight sequences


class WeightSequence:
    """A non-increasing sequence ``gamma_1 >= gamma_2 >= ... >= 0`` with ``gamma_1 <= 1``."""

    def gamma(self, j: int) -> float:
        raise NotImplementedError

    def gammas(self, d: int) -> tuple[float, ...]:
        return tuple(self.gamma(j) for j in range(1, d + 1))

    @property
    def eventually_zero(self) -> bool:
        return False

    @property
    def tau(self) -> int | None:
        """Index after which the sequence vanishes, or None if it never does."""
        return None

    @property
    def spec(self) -> str:
        """Normalized weight-spec string (see :func:`parse_weights`)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Polynomial(WeightSequence):
    """``gamma_j = j**-alpha``."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"Polynomial weights need alpha > 0; got {self.alpha}")

    def gamma(self, j: int) -> float:
        return float(j) ** -self.alpha

    @property
    def spec(self) -> str:
        return f"poly:alpha={self.alpha!r}"


@dataclass(frozen=True)
class Geometric(WeightSequence):
    """``gamma_j = omega**(j**alpha)``."""

    omega: float
    alpha: float = 1.0

    def __post_init__(self):
        if not 0 < self.omega < 1:
            raise ValueError(f"Geometric weights need omega in (0,1); got {self.omega}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"Geometric weights need alpha > 0; got {self.alpha}")

    def gamma(self, j: int) -> float:
        return self.omega ** (float(j) ** self.alpha)

    @property
    def spec(self) -> str:
        return f"geo:omega={self.omega!r},alpha={self.alpha!r}"


@dataclass(frozen=True)
class Constant(WeightSequence):
    c: float

    def __post_init__(self):
        if not 0 < self.c <= 1:
            raise ValueError(f"Constant weights need c in (0,1]; got {self.c}")

    def gamma(self, j: int) -> float:
        return self.c

    @property
    def spec(self) -> str:
        return f"const:c={self.c!r}"


TAIL_RULES = ("zero", "repeat")


@dataclass(frozen=True)
class Explicit(WeightSequence):
    """A finite list of weights continued by ``tail``: zeros, or the last value repeated."""

    values: tuple[float, ...]
    tail: str = "zero"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if self.tail == "repeat-last":
            object.__setattr__(self, "tail", "repeat")
        if self.tail not in TAIL_RULES:
            raise ValueError(f"tail must be one of {TAIL_RULES}; got {self.tail!r}")
        if not vals:
            raise ValueError("explicit weight list must be nonempty")
        for j, v in enumerate(vals, start=1):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"weight gamma_{j} = {v} outside [0,1]")
        for j in range(len(vals) - 1):
            if vals[j + 1] > vals[j]:
                raise ValueError(
                    f"weights must be non-increasing; gamma_{j + 2} = {vals[j + 1]} "
                    f"> gamma_{j + 1} = {vals[j]}"
                )

    def gamma(self, j: int) -> float:
        if j <= len(self.values):
            return self.values[j - 1]
        return 0.0 if self.tail == "zero" else self.values[-1]

    @property
    def eventually_zero(self) -> bool:
        return self.tail == "zero" or self.values[-1] == 0.0

    @property
    def tau(self) -> int | None:
        if not self.eventually_zero:
            return None
        return sum(1 for v in self.values if v > 0)

    @property
    def spec(self) -> str:
        return "list:" + ",".join(repr(v) for v in self.values) + f";tail={self.tail}"


def gamma(w: WeightSequence, j: int) -> float:
    """Weight of coordinate ``j`` (1-based)."""
    if int(j) != j or j < 1:
        raise ValueError(f"coordinate index must be an integer >= 1; got {j}")
    return w.gamma(int(j))


def _parse_kv(body: str, token: str) -> dict[str, float]:
    out = {}
    for part in body.split(","):
        if not part:
            continue
        key, sep, val = part.partition("=")
        if not sep:
            raise ValueError(f"bad weight spec {token!r}: expected key=value, got {part!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ValueError(f"bad weight spec {token!r}: {val!r} is not a number") from None
    return out


def parse_weights(text: str) -> WeightSequence:
    """Parse the weight-spec grammar.

    ``poly:alpha=<f>``, ``geo:omega=<f>,alpha=<f>``, ``const:c=<f>`` and
    ``list:<f>,<f>,...;tail=<zero|repeat>`` (tail defaults to ``zero``).
    """
    kind, sep, body = text.strip().partition(":")
    if not sep:
        raise ValueError(f"bad weight spec {text!r}: missing family prefix")
    kind = kind.strip().lower()
    if kind == "list":
        values_part, _, tail_part = body.partition(";")
        tail = "zero"
        if tail_part:
            key, _, tail = tail_part.partition("=")
            if key.strip() != "tail":
                raise ValueError(f"bad weight spec {text!r}: unknown option {key!r}")
            tail = tail.strip()
        try:
            values = tuple(float(v) for v in values_part.split(",") if v.strip())
        except ValueError:
            raise ValueError(f"bad weight spec {text!r}: non-numeric list entry") from None
        return Explicit(values, tail)

    params = _parse_kv(body, text)
    expected = {"poly": {"alpha"}, "geo": {"omega", "alpha"}, "const": {"c"}}
    if kind not in expected:
        raise ValueError(f"bad weight spec {text!r}: unknown family {kind!r}")
    unknown = set(params) - expected[kind]
    if unknown:
        raise ValueError(f"bad weight spec {text!r}: unknown parameter(s) {sorted(unknown)}")
    try:
        if kind == "poly":
            return Polynomial(params["alpha"])
        if kind == "geo":
            return Geometric(params["omega"], params.get("alpha", 1.0))
        return Constant(params["c"])
    except KeyError as exc:
        raise ValueError(f"bad weight spec {text!r}: missing parameter {exc.args[0]!r}") from None


# ---------------------------------------------------------------------------
# subset weights


def _subset_key(u: Iterable[int]) -> tuple[int, ...]:
    key = tuple(sorted(set(int(j) for j in u)))
    if not key:
        raise ValueError("coordinate subset must be nonempty")
    return key


def subsets(d: int):
    """All nonempty subsets of ``[d]`` as sorted tuples, in lexicographic order."""
    out = []
    for r in range(1, d + 1):
        out.extend(itertools.combinations(range(1, d + 1), r))
    return sorted(out)


@dataclass(frozen=True)
class ProductWeights:
    """``gamma_u = prod_{j in u} gamma_j`` for a weight sequence."""

    base: WeightSequence

    def gamma(self, j: int) -> float:
        return gamma(self.base, j)

    def gammas(self, d: int) -> tuple[float, ...]:
        return self.base.gammas(d)

    def gamma_u(self, u: Iterable[int]) -> float:
        out = 1.0
        for j in _subset_key(u):
            out *= self.base.gamma(j)
        return out


@dataclass(frozen=True)
class ExplicitWeights:
    """General weights given as a table over all nonempty subsets of ``[d]``."""

    d: int
    table: Mapping[tuple[int, ...], float]
    cap: int = EXPLICIT_WEIGHT_DIM_CAP

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1; got {self.d}")
        if self.d > self.cap:
            raise ResourceCapError(f"explicit weights limited to d <= {self.cap}; got d={self.d}")
        norm = {}
        for u, val in self.table.items():
            key = _subset_key(u)
            if key[0] < 1 or key[-1] > self.d:
                raise ValueError(f"subset {key} not contained in [1..{self.d}]")
            if not 0.0 <= float(val) <= 1.0:
                raise ValueError(f"weight for {key} = {val} outside [0,1]")
            norm[key] = float(val)
        if len(norm) != 2**self.d - 1:
            raise ValueError(
                f"explicit weights need all {2**self.d - 1} nonempty subsets; got {len(norm)}"
            )
        object.__setattr__(self, "table", norm)

    @classmethod
    def from_product(cls, w: ProductWeights, d: int) -> "ExplicitWeights":
        return cls(d, {u: w.gamma_u(u) for u in subsets(d)})

    def gamma_u(self, u: Iterable[int]) -> float:
        return self.table[_subset_key(u)]

    def singleton(self, j: int) -> float:
        return self.table[(j,)]


# ---------------------------------------------------------------------------
# grids and point sets

ANCHORS = ("centered", "left")


@dataclass(frozen=True)
class GridSpec:
    """Regular grid with mesh-sizes ``m``; ``anchored`` is ``centered`` or ``left``."""

    m: tuple[int, ...]
    anchored: str = "centered"

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        if not m:
            raise ValueError("grid needs dimension >= 1")
        if any(v < 1 or v != orig for v, orig in zip(m, self.m)):
            raise ValueError(f"mesh-sizes must be integers >= 1; got {self.m}")
        if self.anchored not in ANCHORS:
            raise ValueError(f"anchored must be one of {ANCHORS}; got {self.anchored!r}")
        object.__setattr__(self, "m", m)

    @property
    def d(self) -> int:
        return len(self.m)

    @property
    def n(self) -> int:
        return math.prod(self.m)

    @property
    def log_n(self) -> float:
        return math.fsum(math.log(v) for v in self.m)

    @property
    def centered(self) -> bool:
        return self.anchored == "centered"


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PointSet:
    """A multiset of ``N`` points in ``[0,1)^d``, stored as an ``(N, d)`` array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError(f"points must form an (N, d) array; got shape {pts.shape}")
        if pts.size and (np.any(pts < 0.0) or np.any(pts >= 1.0)):
            raise ValueError("every coordinate must lie in [0,1)")
        object.__setattr__(self, "points", _readonly(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Per-point coefficients ``a_x`` aligned with a :class:`PointSet`."""

    coefficients: np.ndarray
    qmc: bool = field(default=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _readonly(np.ravel(self.coefficients)))

    @classmethod
    def equal(cls, n: int) -> "CoefficientSet":
        """QMC coefficients ``1/N``."""
        if n < 1:
            raise ValueError("QMC coefficients need N >= 1")
        return cls(np.full(n, 1.0 / n), qmc=True)

    @property
    def total(self) -> float:
        return math.fsum(self.coefficients)

    def __len__(self):
        return self.coefficients.shape[0]

    def is_qmc(self) -> bool:
        n = len(self)
        return self.qmc or (n > 0 and bool(np.all(self.coefficients == 1.0 / n)))


def grid_points(g: GridSpec, cap: int | None = None) -> PointSet:
    """All ``N = prod m_j`` grid points in lexicographic order of the index vector."""
    cap = point_cap() if cap is None else cap
    if g.n > cap:
        raise ResourceCapError(f"grid has {g.n} points, above the cap {cap}", estimated_work=g.n)
    axes = []
    for mj in g.m:
        ell = np.arange(mj, dtype=float)
        axes.append((2 * ell + 1) / (2 * mj) if g.centered else ell / mj)
    mesh = np.meshgrid(*axes, indexing="ij")
    return PointSet(np.stack([a.ravel() for a in mesh], axis=1))


def project(p: PointSet, u: Sequence[int]) -> PointSet:
    """Keep coordinates ``u`` (1-based); multiplicities are preserved."""
    key = _subset_key(u)
    if key[-1] > p.d or key[0] < 1:
        raise ValueError(f"subset {key} not contained in [1..{p.d}]")
    return PointSet(p.points[:, [j - 1 for j in key]])
