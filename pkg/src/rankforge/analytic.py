"""Exact bias, analytic rank, value histograms, box norms, and the related checks.

Policy: every count is an exact integer and every bias of a multilinear form
is an exact rational derived from those counts.  Floating point enters only
when a histogram is weighted by character values, so a tolerance (1e-9) is
needed only there.
"""

from __future__ import annotations

import math
import os
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import LemmaViolationError
from .field import PrimeField
from .forms import (
    DEFAULT_ENUM_GUARD,
    Map,
    MultiaffineMap,
    MultilinearMap,
    Shape,
    as_multiaffine,
    curry_last,
    digit_matrix,
    scalar_table,
    value_table,
)

CHI_TOL = 1e-9
BOX_GUARD = 1 << 13  # |G| cap for the 2k-fold box-norm average

_PARALLEL_MIN = 1 << 18  # partition histogram enumeration above this many points


def worker_count() -> int:
    """Worker count for partitioned enumeration, RANKFORGE_THREADS overrides."""
    env = os.environ.get("RANKFORGE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def plain_log(p: int, x: float) -> float:
    """log base p (the reporting convention used everywhere in this package)."""
    return math.log(x) / math.log(p)


def shifted_log(p: int, x: float) -> float:
    """The shifted convention log_p(p*x) = 1 + log_p(x); exposed for reference only."""
    return 1.0 + plain_log(p, x)


@dataclass(frozen=True)
class ValueHistogram:
    """Exact counts of each field value attained over the enumerated domain."""

    p: int
    counts: tuple[int, ...]
    total: int

    def __post_init__(self):
        if len(self.counts) != self.p:
            raise ValueError("need one count per field value")
        if sum(self.counts) != self.total:
            raise ValueError("histogram counts do not sum to the enumerated total")

    def chi_average(self, field: PrimeField | None = None) -> complex:
        field = field or PrimeField(self.p)
        w = np.asarray(self.counts, dtype=np.float64)
        return complex((w * field.char_table).sum() / self.total)

    def balanced_tail(self) -> bool:
        """Whether all nonzero values occur equally often (true for multilinear forms)."""
        tail = self.counts[1:]
        return all(c == tail[0] for c in tail) if tail else True

    def exact_bias(self) -> Fraction:
        """(counts[0] - counts[t != 0]) / total; requires a balanced tail."""
        if not self.balanced_tail():
            raise ValueError("exact bias needs a balanced histogram tail")
        other = self.counts[1] if self.p > 1 and len(self.counts) > 1 else 0
        return Fraction(self.counts[0] - other, self.total)


def _blocked_scalar_table(f: Map, workers: int, max_points: int) -> np.ndarray:
    """Scalar table computed block-by-block over the leading coordinate."""
    shape = f.shape
    lead = shape.sizes[0]
    blocks = min(workers, lead)
    bounds = np.linspace(0, lead, blocks + 1, dtype=int)
    out = np.empty(shape.sizes, dtype=np.int64)

    fa = as_multiaffine(f)

    def run(b):
        lo, hi = bounds[b], bounds[b + 1]
        if lo == hi:
            return
        sub = np.zeros((hi - lo,) + shape.sizes[1:], dtype=np.int64)
        D1 = digit_matrix(shape.p, shape.dims[0])[lo:hi]
        for I, C in fa.parts.items():
            Is = sorted(I)
            letters = string.ascii_lowercase
            in_ax = letters[: len(Is)]
            out_ax = in_ax.upper()
            ops = []
            for pos, i in enumerate(Is):
                ops.append(D1 if i == 1 else digit_matrix(shape.p, shape.dims[i - 1]))
            spec = ",".join(f"{O}{a}" for O, a in zip(out_ax, in_ax))
            spec = f"{spec},{in_ax}z->{out_ax}z" if Is else "z->z"
            grid = np.einsum(spec, *ops, C, optimize=True) % shape.p
            full = [1] * shape.k + [1]
            for pos, i in enumerate(Is):
                full[i - 1] = (hi - lo) if i == 1 else shape.sizes[i - 1]
            sub += grid.reshape(full)[..., 0]
        out[lo:hi] = sub % shape.p

    with ThreadPoolExecutor(max_workers=blocks) as pool:
        list(pool.map(run, range(blocks)))
    return out


def value_histogram(
    f: Map,
    restriction: np.ndarray | None = None,
    max_points: int = DEFAULT_ENUM_GUARD,
) -> ValueHistogram:
    """Exact histogram of a scalar map by full enumeration.

    `restriction` is an optional boolean membership grid; only points inside
    it are counted.  Enumeration is partitioned across worker threads on
    large domains, with per-block integer sub-histograms merged exactly, so
    the result does not depend on the worker count.
    """
    if f.m != 1:
        raise ValueError("value_histogram needs a scalar-valued map")
    shape = f.shape
    shape.guard(shape.domain_size, max_points, "histogram enumeration")
    workers = worker_count()
    if shape.domain_size >= _PARALLEL_MIN and workers > 1:
        table = _blocked_scalar_table(f, workers, max_points)
    else:
        table = scalar_table(f, max_points)
    if restriction is not None:
        if restriction.shape != table.shape:
            raise ValueError("restriction grid does not match the domain")
        vals = table[restriction]
        total = int(restriction.sum())
    else:
        vals = table.reshape(-1)
        total = shape.domain_size
    counts = np.bincount(vals, minlength=shape.p)
    return ValueHistogram(shape.p, tuple(int(c) for c in counts), total)


@dataclass(frozen=True)
class BiasReport:
    histogram: ValueHistogram
    bias: complex
    bias_exact: Fraction | None  # rational bias; None for genuinely complex bias
    arank: float | None
    vanishing_count: int | None  # |{A = 0}| for the curried map, multilinear input only


def bias_report(f: Map, max_points: int = DEFAULT_ENUM_GUARD) -> BiasReport:
    """Histogram-weighted character average, with the exact cross-check for
    multilinear inputs: bias equals the density of the vanishing set of the
    curried map, as an identity of integers."""
    hist = value_histogram(f, max_points=max_points)
    bias_c = hist.chi_average()
    if isinstance(f, MultilinearMap):
        exact = hist.exact_bias()
        vanish = None
        if f.shape.k >= 2:
            A = curry_last(f)
            tableA = value_table(A, max_points)
            vanish = int((~tableA.any(axis=-1)).sum())
            if Fraction(vanish, A.shape.domain_size) != exact:
                raise LemmaViolationError(
                    "histogram bias disagrees with the vanishing density of the curried map"
                )
        else:
            vanish = 1 if f.is_zero() else 0
        if exact < 0 or (exact == 0 and f.shape.k >= 2):
            # for k >= 2 the curried map vanishes at 0, so the bias is positive
            raise LemmaViolationError("multilinear bias must be a positive rational")
        if exact == 0:
            # nonzero linear form: character sum cancels exactly
            return BiasReport(hist, bias_c, exact, math.inf, vanish)
        ar = plain_log(f.shape.p, exact.denominator) - plain_log(f.shape.p, exact.numerator)
        return BiasReport(hist, bias_c, exact, ar, vanish)
    # multiaffine: report the complex bias; arank is declined unless the value
    # histogram happens to be balanced and positive (e.g. the map is a shifted
    # multilinear form in disguise)
    return BiasReport(hist, bias_c, None, None, None)


def bias(f: Map, max_points: int = DEFAULT_ENUM_GUARD) -> complex:
    return bias_report(f, max_points).bias


def arank(f: MultilinearMap, max_points: int = DEFAULT_ENUM_GUARD) -> float:
    rep = bias_report(f, max_points)
    if rep.arank is None:
        raise ValueError("analytic rank is defined for multilinear forms only")
    return rep.arank


def exact_bias(f: MultilinearMap, max_points: int = DEFAULT_ENUM_GUARD) -> Fraction:
    rep = bias_report(f, max_points)
    assert rep.bias_exact is not None
    return rep.bias_exact


def ceil_neg_log(p: int, value: Fraction) -> int:
    """Smallest integer m with value >= p^-m, computed exactly."""
    if value <= 0:
        raise ValueError("need a positive rational")
    m = 0
    acc = value.numerator
    den = value.denominator
    while acc < den:
        acc *= p
        m += 1
    return m


# ---------------------------------------------------------------------------
#  Bias of a multiaffine form vs its top multilinear part
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BiasHomogReport:
    abs_bias: float
    top_bias: Fraction
    ok: bool


def bias_homog_check(f: MultiaffineMap, max_points: int = DEFAULT_ENUM_GUARD) -> BiasHomogReport:
    """|E chi(f)| <= E chi(top multilinear part), the latter a real rational."""
    if f.m != 1:
        raise ValueError("bias_homog_check needs a scalar-valued map")
    shape = f.shape
    full = frozenset(range(1, shape.k + 1))
    top_coeffs = f.parts.get(full)
    if top_coeffs is None:
        top_coeffs = np.zeros(shape.dims + (1,), dtype=np.int64)
    top = MultilinearMap(shape, 1, top_coeffs)
    lhs = abs(bias(f, max_points))
    rhs = exact_bias(top, max_points)
    return BiasHomogReport(lhs, rhs, lhs <= float(rhs) + CHI_TOL)


# ---------------------------------------------------------------------------
#  Gowers box norm and the Gowers-Cauchy-Schwarz check
# ---------------------------------------------------------------------------

def _box_average(shape: Shape, tables: dict) -> complex:
    """E_{x,y} prod_I Conj^|I| f_I(x_I, y_{[k] minus I}) for complex grids f_I."""
    k = shape.k
    shape.guard(shape.domain_size ** 2 * (1 << k), BOX_GUARD ** 2 * (1 << k), "box average")
    letters = string.ascii_lowercase
    if 2 * k > len(letters):
        raise ValueError("arity too large for the box average")
    x_ax = letters[:k]
    y_ax = letters[k : 2 * k]
    specs = []
    operands = []
    for I in sorted(tables, key=lambda s: (len(s), sorted(s))):
        grid = np.asarray(tables[I], dtype=np.complex128)
        if grid.shape != shape.sizes:
            raise ValueError("table does not match the domain")
        if len(I) % 2 == 1:
            grid = np.conj(grid)
        axes = "".join(x_ax[i - 1] if i in I else y_ax[i - 1] for i in range(1, k + 1))
        specs.append(axes)
        operands.append(grid)
    total = np.einsum(",".join(specs) + "->", *operands, optimize=True)
    return complex(total) / shape.domain_size ** 2


def box_norm(shape: Shape, table: np.ndarray) -> float:
    """Gowers box norm of a complex table on the full domain."""
    k = shape.k
    fam = {frozenset(I): table for I in _all_subsets(k)}
    inner = _box_average(shape, fam)
    if abs(inner.imag) > CHI_TOL or inner.real < -CHI_TOL:
        raise LemmaViolationError(f"box-norm inner average {inner} is not real non-negative")
    return max(inner.real, 0.0) ** (1.0 / (1 << k))


def _all_subsets(k: int):
    out = [[]]
    for i in range(1, k + 1):
        out += [s + [i] for s in out]
    return [tuple(s) for s in out]


@dataclass(frozen=True)
class GcsReport:
    lhs: float
    rhs: float
    ok: bool


def gcs_check(shape: Shape, tables: dict) -> GcsReport:
    """|E prod_I Conj^|I| f_I| <= prod_I box_norm(f_I) for a full family of tables."""
    k = shape.k
    fam = {}
    for I in _all_subsets(k):
        key = frozenset(I)
        if key not in {frozenset(J) for J in tables}:
            raise ValueError(f"missing table for subset {sorted(I)}")
    for J, tab in tables.items():
        fam[frozenset(J)] = tab
    lhs = abs(_box_average(shape, fam))
    rhs = 1.0
    for J, tab in fam.items():
        rhs *= box_norm(shape, tab)
    return GcsReport(lhs, rhs, lhs <= rhs + CHI_TOL)


def chi_table(f: Map, max_points: int = DEFAULT_ENUM_GUARD) -> np.ndarray:
    """The complex grid chi(f(x)) of a scalar map."""
    field = PrimeField(f.shape.p)
    return field.char_table[scalar_table(f, max_points)]
