"""The q-Poisson distribution over integer indices n carrying q-values [n].

    P(n) = e_{1/q}(-lam) * lam**n / [n]!

A model is admissible when ``lam (1-q) < 1`` (q < 1) or ``lam (q-1) < q``
(q > 1); outside that region one of the two q-exponentials diverges.
All numerics here are float64; exact-backend contexts are converted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .qcalc import (
    PowerSeries,
    ConvergenceError,
    QContext,
    QDomainError,
    q_derivative,
    q_exp_dual,
    q_numbers,
    sum_decreasing_ratio,
)
from .qcomb import q_stirling

MASS_TOLERANCE = 1e-12
TAIL_CAP_LIMIT = 10_000
SERIES_EPSILON = 1e-17


def check_admissible(q: float, lam: float) -> None:
    """Raise :class:`QDomainError` unless (q, lam) gives a valid q-Poisson law."""
    if not (q > 0 and math.isfinite(q)):
        raise QDomainError(f"q must be positive, got {q}")
    if not (lam >= 0 and math.isfinite(lam)):
        raise QDomainError(f"lambda must be nonnegative, got {lam}")
    if q < 1 and lam * (1 - q) >= 1:
        raise QDomainError(f"inadmissible: lambda(1-q) = {lam * (1 - q):g} >= 1")
    if q > 1 and lam * (q - 1) >= q:
        raise QDomainError(f"inadmissible: lambda(q-1) = {lam * (q - 1):g} >= q")


def _float_ctx(ctx: QContext) -> QContext:
    # series run until the tail is below float rounding of the partial sum
    ctx = ctx.numeric()
    return QContext.floating(float(ctx.q), min(ctx.epsilon, SERIES_EPSILON), ctx.max_terms)


@dataclass(frozen=True)
class QPoissonModel:
    """q-Poisson law with mean ``E[[n]] = lam``.

    The prefactor, the pmf table and the cumulative table are computed once at
    construction.  ``tail_cap`` is the smallest index whose cumulative mass
    reaches ``1 - 1e-12`` (capped at 10 000) unless given explicitly.
    """

    lam: float
    ctx: QContext
    tail_cap: int | None = None
    prefactor: float = field(init=False)
    table: np.ndarray = field(init=False, repr=False)
    cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ctx = _float_ctx(self.ctx)
        lam = float(self.lam)
        check_admissible(ctx.q, lam)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "lam", lam)
        pre = q_exp_dual(-lam, ctx) if lam > 0 else 1.0
        if not pre > 0:
            raise QDomainError(f"normalizing prefactor is not positive ({pre})")
        object.__setattr__(self, "prefactor", pre)

        probs = []
        mass = 0.0
        cap = self.tail_cap
        for n, p in enumerate(self._pmf_iter()):
            probs.append(p)
            mass += p
            if cap is None and (mass >= 1 - MASS_TOLERANCE or n >= TAIL_CAP_LIMIT):
                break
            if cap is not None and n >= cap:
                break
        table = np.array(probs)
        cdf = np.cumsum(table)
        # truncated tail mass is absorbed into the last cell
        cdf[-1] = 1.0
        table.flags.writeable = False
        cdf.flags.writeable = False
        object.__setattr__(self, "tail_cap", len(probs) - 1)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "cdf", cdf)

    @property
    def q(self) -> float:
        return self.ctx.q

    def _pmf_iter(self, start: int = 0):
        q, lam = self.ctx.q, self.lam
        p = self.prefactor
        bracket = 0.0
        n = 0
        while True:
            if n >= start:
                yield p
            n += 1
            bracket = float(n) if q == 1 else 1 + q * bracket
            p = p * lam / bracket

    def brackets(self, n_max: int | None = None) -> np.ndarray:
        """``[0], [1], ..., [n_max]`` (defaults to ``tail_cap``)."""
        n_max = self.tail_cap if n_max is None else n_max
        return np.array(q_numbers(n_max, self.ctx), dtype=float)


def pmf(model: QPoissonModel, n: int) -> float:
    if n < 0:
        return 0.0
    if n <= model.tail_cap:
        return float(model.table[n])
    return next(model._pmf_iter(start=n))


def normalization_defect(model: QPoissonModel) -> float:
    return abs(math.fsum(model.table) - 1.0)


def _weighted_terms(model: QPoissonModel, weight):
    # weight(n, bracket) * pmf(n) for n = 1, 2, ...
    q = model.ctx.q
    bracket = 0.0
    for n, p in enumerate(model._pmf_iter()):
        if n == 0:
            continue
        bracket = float(n) if q == 1 else 1 + q * bracket
        yield weight(n, bracket) * p


def moment(model: QPoissonModel, r: int) -> float:
    """``E[[n]**r]`` by direct summation, truncated on a geometric tail bound."""
    if r < 1:
        raise QDomainError("moment order must be positive")
    if model.lam == 0:
        return 0.0
    return sum_decreasing_ratio(_weighted_terms(model, lambda n, b: b ** r), model.ctx).value


def mean(model: QPoissonModel) -> float:
    return moment(model, 1)


def factorial_moment(model: QPoissonModel, k: int) -> float:
    """``E[[n][n-1]...[n-k+1]]``, summed over n >= k."""
    if k < 0:
        raise QDomainError("k must be nonnegative")
    if k == 0:
        return math.fsum(model.table)
    if model.lam == 0:
        return 0.0
    q = model.ctx.q

    def terms():
        falling = [0.0] * (k + 1)  # last k brackets
        bracket = 0.0
        for n, p in enumerate(model._pmf_iter()):
            if n > 0:
                bracket = float(n) if q == 1 else 1 + q * bracket
            falling = falling[1:] + [bracket]
            if n >= k:
                yield math.prod(falling[1:]) * p

    return sum_decreasing_ratio(terms(), model.ctx).value


def moment_via_stirling(model: QPoissonModel, r: int) -> float:
    """``sum_s C(r, s) lam**s``."""
    if r < 1:
        raise QDomainError("moment order must be positive")
    return math.fsum(q_stirling(r, s, model.ctx) * model.lam ** s for s in range(1, r + 1))


def truncation_order(model: QPoissonModel, r: int, tol: float = MASS_TOLERANCE) -> int:
    """Smallest series order whose dropped tail of ``sum [n]**r P(n)`` is bounded by ``tol``."""
    if model.lam == 0:
        return max(1, model.tail_cap)
    prev = None
    terms = _weighted_terms(model, lambda n, b: b ** r)
    for n, t in enumerate(terms, start=1):
        if prev:
            rho = t / prev
            if rho < 1 and t * rho / (1 - rho) < tol:
                return max(n, model.tail_cap)
        prev = t
        if n >= TAIL_CAP_LIMIT:
            break
    raise ConvergenceError(f"weighted tail not below {tol} within {TAIL_CAP_LIMIT} terms")


def generating_series(model: QPoissonModel, order: int) -> PowerSeries:
    """``sum_{n<=order} P(n) u**n``, the truncated expansion of ``e_q(u lam) e_{1/q}(-lam)``."""
    if order < 1:
        raise QDomainError("order must be positive")
    it = model._pmf_iter()
    return PowerSeries(tuple(next(it) for _ in range(order + 1)), order)


def _times_u(series: PowerSeries) -> PowerSeries:
    return PowerSeries((0,) + series.coefficients, series.order + 1)


def apply_u_dq_operator(series: PowerSeries, r: int, ctx: QContext) -> PowerSeries:
    """Apply ``(u D_q)**r``; maps ``c[n] u**n`` to ``[n]**r c[n] u**n``."""
    if r < 0:
        raise QDomainError("r must be nonnegative")
    out = series
    for _ in range(r):
        if out.order < 1:
            out = PowerSeries((), out.order)
            continue
        out = _times_u(q_derivative(out, ctx))
    return out


def sample(model: QPoissonModel, rng: np.random.Generator) -> int:
    """One draw of the index n by inverse-CDF search."""
    return int(np.searchsorted(model.cdf, rng.random(), side="right"))


def sample_many(model: QPoissonModel, rng: np.random.Generator, size: int) -> np.ndarray:
    return np.searchsorted(model.cdf, rng.random(size), side="right")


@dataclass(frozen=True)
class MomentReport:
    r: int
    analytic: float
    via_stirling: float
    empirical: float | None
    sample_count: int
    seed: int | None
    standard_error: float | None


def empirical_moment_report(
    model: QPoissonModel, r_max: int, samples: int, seed: int
) -> list[MomentReport]:
    if samples < 10_000:
        raise ValueError("at least 10^4 samples are required")
    rng = np.random.default_rng(seed)
    draws = sample_many(model, rng, samples)
    values = model.brackets()[draws]
    rows = []
    for r in range(1, r_max + 1):
        x = values ** r
        rows.append(
            MomentReport(
                r=r,
                analytic=moment(model, r),
                via_stirling=moment_via_stirling(model, r),
                empirical=float(x.mean()),
                sample_count=samples,
                seed=seed,
                standard_error=float(x.std(ddof=1) / math.sqrt(samples)),
            )
        )
    return rows


def moment_report_dict(model: QPoissonModel, rows: list[MomentReport]) -> dict:
    """JSON-ready dict: ``{q, lambda, rows: [{r, analytic, via_stirling, empirical, stderr}], seed, samples}``."""
    return {
        "q": model.q,
        "lambda": model.lam,
        "rows": [
            {
                "r": row.r,
                "analytic": row.analytic,
                "via_stirling": row.via_stirling,
                "empirical": row.empirical,
                "stderr": row.standard_error,
            }
            for row in rows
        ],
        "seed": rows[0].seed if rows else None,
        "samples": rows[0].sample_count if rows else 0,
    }


def moment_report_json(model: QPoissonModel, rows: list[MomentReport]) -> str:
    return json.dumps(moment_report_dict(model, rows), indent=2)


def goodness_of_fit(model: QPoissonModel, draws: np.ndarray, n_cells: int = 16):
    """Pearson chi-square of ``draws`` against the pmf on cells ``0..n_cells-1`` plus a tail cell.

    Returns ``(statistic, p_value)``.
    """
    draws = np.asarray(draws)
    counts = np.bincount(np.minimum(draws, n_cells), minlength=n_cells + 1)
    probs = np.array([pmf(model, n) for n in range(n_cells)])
    probs = np.append(probs, max(0.0, 1.0 - math.fsum(probs)))
    expected = probs * len(draws)
    res = stats.chisquare(counts, expected * counts.sum() / expected.sum())
    return float(res.statistic), float(res.pvalue)
