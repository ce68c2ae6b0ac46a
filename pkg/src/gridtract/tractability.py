"""Tractability regimes of weight families and illustrative growth diagnostics.

Classification is symbolic: it reads the limits ``j**n * gamma_j`` off the
closed family forms. The diagnostics only tabulate ``log N`` along an
``(eps, d)`` schedule and never draw a verdict.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .allocator import (
    allocate_greedy,
    allocate_spt,
    allocate_uwt,
    allocate_wt,
    n_min_exact,
)
from .core import TOL, Constant, Explicit, Geometric, Polynomial, ProductWeights, WeightSequence
from .errors import GridTractError

CURSE = "Curse"
NOT_WT = "not-WT"
WT_NOT_UWT = "WT-not-UWT"
UWT_NOT_SPT = "UWT-not-SPT"
SPT = "SPT"

DEFAULT_ETAS = (1, 2, 4, 8)
SOURCES = ("exact", "greedy", "recipe", "wt", "uwt", "spt", "lower")


@dataclass(frozen=True)
class TractabilityClass:
    label: str
    certificate: str

    @property
    def wt(self) -> bool:
        return self.label in (WT_NOT_UWT, UWT_NOT_SPT, SPT)

    @property
    def uwt(self) -> bool:
        return self.label in (UWT_NOT_SPT, SPT)

    @property
    def spt(self) -> bool:
        """SPT, and equivalently PT and QPT."""
        return self.label == SPT

    @property
    def curse(self) -> bool:
        return self.label == CURSE


def classify(w: WeightSequence) -> TractabilityClass:
    if isinstance(w, ProductWeights):
        w = w.base
    if isinstance(w, Polynomial):
        a = w.alpha
        if a > 1:
            return TractabilityClass(
                WT_NOT_UWT,
                f"j*gamma_j = j^(1-{a:g}) -> 0 gives WT; j^n*gamma_j -> inf for n > {a:g} rules out UWT",
            )
        limit = "1" if a == 1 else "inf"
        return TractabilityClass(NOT_WT, f"j*gamma_j = j^(1-{a:g}) -> {limit} != 0, so WT fails")
    if isinstance(w, Geometric):
        return TractabilityClass(
            UWT_NOT_SPT,
            "j^n*omega^(j^alpha) -> 0 for every n gives UWT; gamma_j > 0 for all j rules out QPT/PT/SPT",
        )
    if isinstance(w, Constant):
        return TractabilityClass(
            CURSE, f"gamma_j >= c = {w.c:g} > 0 for all j: N >= (c/(4 eps))^d"
        )
    if isinstance(w, Explicit):
        if w.eventually_zero:
            return TractabilityClass(
                SPT, f"gamma_j = 0 for j > tau = {w.tau}: N <= ceil(tau/(2 eps))^tau independent of d"
            )
        c = w.values[-1]
        return TractabilityClass(CURSE, f"gamma_j >= {c:g} > 0 for all j: N >= ({c:g}/(4 eps))^d")
    raise TypeError(f"unsupported weight sequence {type(w).__name__}")


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class DiagnosticSchedule:
    """``(eps, d)`` pairs with the normalization ``1/eps + d`` (wt) or ``eps**-t1 + d**t2`` (uwt)."""

    pairs: tuple[tuple[float, int], ...]
    norm: str = "wt"
    t1: float = 1.0
    t2: float = 1.0
    eta: float | None = None

    def __post_init__(self):
        pairs = tuple((float(e), int(d)) for e, d in self.pairs)
        if not pairs:
            raise ValueError("schedule needs at least one (eps, d) pair")
        if any(d < 1 for _, d in pairs):
            raise ValueError("schedule dimensions must be >= 1")
        if self.norm not in ("wt", "uwt"):
            raise ValueError(f"norm must be 'wt' or 'uwt'; got {self.norm!r}")
        if self.norm == "uwt" and not (0 < self.t1 <= 1 and 0 < self.t2 <= 1):
            raise ValueError(f"t1, t2 must lie in (0,1]; got {self.t1}, {self.t2}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def coupled(cls, eta: float, dmax: int, norm: str = "wt", dmin: int = 1, power: float = 1.0,
                t1: float = 1.0, t2: float = 1.0) -> "DiagnosticSchedule":
        """``1/eps = (eta * d)**power`` for ``d = dmin..dmax``."""
        if eta <= 0:
            raise ValueError(f"eta must be positive; got {eta}")
        pairs = tuple(((eta * d) ** -power, d) for d in range(dmin, dmax + 1))
        return cls(pairs, norm, t1, t2, eta)

    def normalization(self, eps: float, d: int) -> float:
        if self.norm == "wt":
            return 1 / eps + d
        return eps ** -self.t1 + d ** self.t2


def parse_schedule(text: str) -> DiagnosticSchedule:
    """``eta=<f>,dmax=<i>[,dmin=<i>][,pow=<f>][,norm=wt|uwt][,t1=<f>][,t2=<f>]``.

    An explicit list replaces ``eta``/``dmax``: ``pairs=<eps>@<d>+<eps>@<d>...``.
    """
    opts = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        if not sep:
            raise ValueError(f"bad schedule {text!r}: expected key=value, got {part!r}")
        opts[key.strip()] = val.strip()
    known = {"eta", "dmax", "dmin", "pow", "norm", "t1", "t2", "pairs"}
    unknown = set(opts) - known
    if unknown:
        raise ValueError(f"bad schedule {text!r}: unknown key(s) {sorted(unknown)}")
    try:
        norm = opts.get("norm", "wt")
        t1 = float(opts.get("t1", 1.0))
        t2 = float(opts.get("t2", 1.0))
        if "pairs" in opts:
            pairs = []
            for item in opts["pairs"].split("+"):
                e, _, d = item.partition("@")
                pairs.append((float(e), int(d)))
            return DiagnosticSchedule(tuple(pairs), norm, t1, t2)
        return DiagnosticSchedule.coupled(
            float(opts["eta"]), int(opts["dmax"]), norm, int(opts.get("dmin", 1)),
            float(opts.get("pow", 1.0)), t1, t2,
        )
    except KeyError as exc:
        raise ValueError(f"bad schedule {text!r}: missing {exc.args[0]!r}") from None


@dataclass(frozen=True)
class DiagnosticRow:
    eps: float
    d: int
    log_n: float
    ratio: float
    source: str
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else None

        return {
            "eps": self.eps,
            "d": self.d,
            "logN": num(self.log_n),
            "ratio": num(self.ratio),
            "source": self.source,
            "flags": list(self.flags),
        }


def _auto_recipe(w: WeightSequence):
    label = classify(w).label
    if label == SPT:
        return allocate_spt
    if label == UWT_NOT_SPT:
        return allocate_uwt
    return allocate_wt


def _log_n(w: WeightSequence, eps: float, d: int, source: str, tol: float):
    if source == "exact":
        bracket = n_min_exact(w, eps, d, tol=tol)
        flags = ("qmc-min",) if bracket.exact else ("qmc-min", "upper-bound-only")
        return math.log(bracket.qmc_min), flags
    if source == "lower":
        g = w.gamma(d)
        return (d * math.log(g / (4 * eps)) if g > 0 else -math.inf), ("lower-bound",)
    recipe = {
        "greedy": allocate_greedy,
        "wt": allocate_wt,
        "uwt": allocate_uwt,
        "spt": allocate_spt,
        "recipe": _auto_recipe(w),
    }[source]
    return recipe(w, eps, d, tol=tol).log_n, ("upper-bound-proxy",)


def _row(args) -> DiagnosticRow:
    w, s, source, eps, d, tol = args
    if not 0 < eps < 1:
        return DiagnosticRow(eps, d, math.nan, math.nan, source, ("eps-out-of-range",))
    try:
        log_n, flags = _log_n(w, eps, d, source, tol)
    except (GridTractError, ValueError) as exc:
        return DiagnosticRow(eps, d, math.nan, math.nan, source, (f"infeasible: {exc}",))
    return DiagnosticRow(eps, d, log_n, log_n / s.normalization(eps, d), source, flags)


def diagnostic(w: WeightSequence, s: DiagnosticSchedule, n_source: str = "recipe",
               tol: float = TOL, jobs: int = 1) -> list[DiagnosticRow]:
    """One row per schedule point: ``log N`` from ``n_source`` and its ratio to the normalization.

    Failing points are kept as flagged rows with NaN values.
    """
    if n_source not in SOURCES:
        raise ValueError(f"n_source must be one of {SOURCES}; got {n_source!r}")
    if isinstance(w, ProductWeights):
        w = w.base
    tasks = [(w, s, n_source, eps, d, tol) for eps, d in s.pairs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_row, tasks))
    return [_row(t) for t in tasks]


def wt_diagnostic(w, s: DiagnosticSchedule, n_source: str = "recipe", **kw) -> list[DiagnosticRow]:
    """Rows normalized by ``1/eps + d``."""
    wt = DiagnosticSchedule(s.pairs, "wt", eta=s.eta)
    return diagnostic(w, wt, n_source, **kw)


def uwt_diagnostic(w, s: DiagnosticSchedule, n_source: str = "recipe", **kw) -> list[DiagnosticRow]:
    """Rows normalized by ``eps**-t1 + d**t2``."""
    if s.norm != "uwt":
        raise ValueError("uwt_diagnostic needs a schedule with norm='uwt'")
    return diagnostic(w, s, n_source, **kw)


CSV_FIELDS = ("eps", "d", "logN", "ratio", "source", "flags")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        writer.writerow([repr(r.eps), r.d, repr(r.log_n), repr(r.ratio), r.source, "|".join(r.flags)])
    return buf.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps([r.to_dict() for r in rows], indent=2)
