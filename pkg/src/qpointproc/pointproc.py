"""Product densities on an energy axis.

Covers fixed-[N] q-product densities, moments of the q-count in a finite
range, a classical (q = 1) Monte Carlo estimator of moments and of the first
two product densities, and the q-Janossy relations for factorized families.

The energy axis is ordinary: every integral over E is an ordinary integral,
computed in closed form for the supported density shapes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .qcalc import QContext, QDomainError, q_factorial, q_falling_factorial, q_number
from .qcomb import q_stirling
from .qdist import QPoissonModel, pmf
from .qpoly import QPoly

DEFAULT_BINS = 10
CHUNK = 100_000


class TruncationWarning(UserWarning):
    """The dropped tail of a truncated weighted sum may exceed the tolerance."""


def _rational(x):
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Fraction(x)
    return float(x)


@dataclass(frozen=True)
class DensityModel:
    """Normalized one-particle density on ``support = (lo, hi)``.

    ``kind`` is ``"uniform"`` or ``"piecewise-linear"``; the latter is given by
    breakpoints ``xs`` (``xs[0] == lo``, ``xs[-1] == hi``) and values ``ys``.
    Integer or Fraction parameters keep integrals exact.
    """

    support: tuple
    kind: str = "uniform"
    xs: tuple = ()
    ys: tuple = ()

    def __post_init__(self):
        lo, hi = (_rational(v) for v in self.support)
        if not hi > lo:
            raise QDomainError(f"empty support {self.support}")
        object.__setattr__(self, "support", (lo, hi))
        if self.kind == "uniform":
            object.__setattr__(self, "xs", (lo, hi))
            h = 1 / (hi - lo)
            object.__setattr__(self, "ys", (h, h))
        elif self.kind == "piecewise-linear":
            xs = tuple(_rational(v) for v in self.xs)
            ys = tuple(_rational(v) for v in self.ys)
            if len(xs) != len(ys) or len(xs) < 2:
                raise QDomainError("need matching breakpoints and values, at least two")
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise QDomainError("breakpoints must be strictly increasing")
            if xs[0] != lo or xs[-1] != hi:
                raise QDomainError("breakpoints must span the support")
            if any(y < 0 for y in ys):
                raise QDomainError("density values must be nonnegative")
            area = sum((b - a) * (ya + yb) / 2 for a, b, ya, yb in zip(xs, xs[1:], ys, ys[1:]))
            if not area > 0:
                raise QDomainError("density has zero mass")
            object.__setattr__(self, "xs", xs)
            object.__setattr__(self, "ys", tuple(y / area for y in ys))
        else:
            raise QDomainError(f"unknown density kind {self.kind!r}")

    @classmethod
    def uniform(cls, lo=0, hi=1) -> "DensityModel":
        return cls((lo, hi), "uniform")

    @classmethod
    def piecewise_linear(cls, xs: Sequence, ys: Sequence) -> "DensityModel":
        """Values are rescaled so the density integrates to one."""
        return cls((xs[0], xs[-1]), "piecewise-linear", tuple(xs), tuple(ys))

    @classmethod
    def tent(cls, lo=0, hi=1) -> "DensityModel":
        lo, hi = _rational(lo), _rational(hi)
        return cls.piecewise_linear((lo, (lo + hi) / 2, hi), (0, 1, 0))

    def __call__(self, e):
        lo, hi = self.support
        if np.ndim(e):
            e = np.asarray(e, dtype=float)
            vals = np.interp(e, [float(x) for x in self.xs], [float(y) for y in self.ys])
            return np.where((e >= float(lo)) & (e <= float(hi)), vals, 0.0)
        if e < lo or e > hi:
            return 0 * self.ys[0]
        for a, b, ya, yb in zip(self.xs, self.xs[1:], self.ys, self.ys[1:]):
            if a <= e <= b:
                return ya + (yb - ya) * (e - a) / (b - a)
        raise AssertionError("unreachable")

    def _cdf_at(self, x):
        total = 0 * self.ys[0]
        for a, b, ya, yb in zip(self.xs, self.xs[1:], self.ys, self.ys[1:]):
            if x <= a:
                break
            t = min(x, b)
            yt = ya + (yb - ya) * (t - a) / (b - a)
            total += (t - a) * (ya + yt) / 2
        return total

    def integral(self, a, b):
        """``int_a^b f(E) dE`` in closed form; ``[a, b]`` must lie inside the support."""
        lo, hi = self.support
        if a > b:
            raise QDomainError(f"reversed range ({a}, {b})")
        if a < lo or b > hi:
            raise QDomainError(f"range ({a}, {b}) exceeds support ({lo}, {hi})")
        if self.kind == "uniform":
            return (_rational(b) - _rational(a)) * self.ys[0]
        return self._cdf_at(_rational(b)) - self._cdf_at(_rational(a))

    def total_mass(self):
        return self.integral(*self.support)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Inverse-CDF draws from the density."""
        u = rng.random(size)
        xs = np.array([float(x) for x in self.xs])
        if self.kind == "uniform":
            return xs[0] + (xs[1] - xs[0]) * u
        ys = np.array([float(y) for y in self.ys])
        w = np.diff(xs)
        seg_mass = w * (ys[:-1] + ys[1:]) / 2
        cum = np.concatenate(([0.0], np.cumsum(seg_mass)))
        u = u * cum[-1]
        k = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(w) - 1)
        m = u - cum[k]
        y0, slope = ys[k], (ys[k + 1] - ys[k]) / w[k]
        # root of y0 t + slope t^2 / 2 = m, in the cancellation-free form
        disc = np.sqrt(np.maximum(y0 * y0 + 2 * slope * m, 0.0))
        denom = y0 + disc
        t = np.divide(2 * m, denom, out=np.zeros_like(m), where=denom > 0)
        return np.minimum(xs[k] + t, xs[k + 1])


def density_integral(density: DensityModel, interval) -> object:
    a, b = interval
    return density.integral(a, b)


@dataclass(frozen=True)
class FixedNProcess:
    """``[N]`` particles spread independently with one-particle density ``density``."""

    N: int
    density: DensityModel
    ctx: QContext

    def __post_init__(self):
        if self.N < 1:
            raise QDomainError("N must be at least 1")


def product_density_coefficient(proc: FixedNProcess, m: int):
    """``[N]!/[N-m]!``, the factor in front of ``f(E_1)...f(E_m)``."""
    if m < 1 or m > proc.N:
        raise QDomainError(f"degree m must satisfy 1 <= m <= N, got m={m}, N={proc.N}")
    return q_falling_factorial(proc.N, m, proc.ctx)


def product_density(proc: FixedNProcess, points: Sequence):
    """Degree-``len(points)`` q-product density evaluated at ``points``."""
    coeff = product_density_coefficient(proc, len(points))
    return coeff * math.prod(proc.density(e) for e in points)


def moment_over_range(proc: FixedNProcess, r: int, interval):
    """``E[[N]_range**r] = sum_s C(r, s) [N]!/[N-s]! p**s`` with ``p`` the range's mass."""
    if r < 1:
        raise QDomainError("r must be positive")
    ctx = proc.ctx
    p = density_integral(proc.density, interval)
    if ctx.is_symbolic:
        if p != 1:
            raise QDomainError("symbolic moments are polynomial only over the whole support")
        p = 1
    p = ctx.scalar(p)
    total = ctx.scalar(0)
    for s in range(1, min(r, proc.N) + 1):
        total = total + q_stirling(r, s, ctx) * q_falling_factorial(proc.N, s, ctx) * p ** s
    return total


def verify_marginalization(proc: FixedNProcess, h: int) -> tuple:
    """``([N]!/[N-h]!, [N]! * (int f)**(N-h) / [N-h]!)``: integrating the top density down to degree h."""
    N, ctx = proc.N, proc.ctx
    if not 1 <= h < N:
        raise QDomainError(f"need 1 <= h < N, got h={h}, N={N}")
    lhs = q_falling_factorial(N, h, ctx)
    marg = proc.density.total_mass() ** (N - h)
    if ctx.is_symbolic:
        if marg != 1:
            raise QDomainError("symbolic check needs an exactly normalized density")
        rhs = (q_factorial(N, ctx) * QPoly.const(1)).exact_div(q_factorial(N - h, ctx))
    else:
        rhs = q_factorial(N, ctx) * ctx.scalar(marg) / q_factorial(N - h, ctx)
    return lhs, rhs


# -- classical Monte Carlo -------------------------------------------------------

@dataclass(frozen=True)
class MomentEstimate:
    interval: tuple
    r: int
    estimate: float
    stderr: float
    analytic: float


@dataclass(frozen=True)
class BinEstimate:
    bin_i: int
    bin_j: int | None  # None for f1 rows
    lo_i: float
    hi_i: float
    lo_j: float | None
    hi_j: float | None
    estimate: float
    stderr: float
    analytic: float


@dataclass(frozen=True)
class EstimateReport:
    bin_edges: tuple
    moments: tuple
    f1: tuple
    f2: tuple
    samples: int
    seed: int
    N: int

    CSV_FIELDS = ("kind", "r", "lo", "hi", "lo2", "hi2", "estimate", "stderr", "analytic")

    def to_rows(self) -> list[tuple]:
        rows = []
        for m in self.moments:
            rows.append(("moment", m.r, *m.interval, "", "", m.estimate, m.stderr, m.analytic))
        for b in self.f1:
            rows.append(("f1", "", b.lo_i, b.hi_i, "", "", b.estimate, b.stderr, b.analytic))
        for b in self.f2:
            rows.append(("f2", "", b.lo_i, b.hi_i, b.lo_j, b.hi_j, b.estimate, b.stderr, b.analytic))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_FIELDS)
        for row in self.to_rows():
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "samples": self.samples,
            "seed": self.seed,
            "bin_edges": list(self.bin_edges),
            "rows": [dict(zip(self.CSV_FIELDS, row)) for row in self.to_rows()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, Fraction, np.floating)) else v


def _se(sum1, sum2, n):
    mean = sum1 / n
    var = max(sum2 / n - mean * mean, 0.0) * n / (n - 1)
    return math.sqrt(var / n)


def mc_estimate_classical(
    N: int,
    density: DensityModel,
    ranges: Sequence,
    r_max: int,
    samples: int,
    seed: int,
    bins: int = DEFAULT_BINS,
) -> EstimateReport:
    """Simulate ``samples`` replicates of N i.i.d. points (q = 1).

    Reports E(n**r) per range for r <= r_max, and per-bin estimates of f1 and
    of f2 on every ordered pair of distinct (hence disjoint) bins, each with a
    standard error and the analytic value.  Replicates are processed in chunks
    seeded from ``SeedSequence(seed).spawn``; all accumulators are integer
    sums, so the result is independent of chunk order.
    """
    if samples < 10_000:
        raise ValueError("at least 10^4 samples are required")
    if N < 1 or r_max < 1:
        raise QDomainError("N and r_max must be positive")
    ranges = [tuple(rg) for rg in ranges]
    for a, b in ranges:
        density.integral(a, b)  # validates containment

    lo, hi = (float(v) for v in density.support)
    edges = np.linspace(lo, hi, bins + 1)
    n_chunks = -(-samples // CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    powers = np.arange(1, 2 * r_max + 1)

    range_sums = np.zeros((len(ranges), len(powers)), dtype=np.int64)
    c1 = np.zeros(bins, dtype=np.int64)
    c2 = np.zeros(bins, dtype=np.int64)
    pair = np.zeros((bins, bins), dtype=np.int64)
    pair_sq = np.zeros((bins, bins), dtype=np.int64)

    done = 0
    for child in children:
        m = min(CHUNK, samples - done)
        done += m
        rng = np.random.default_rng(child)
        pts = density.sample(rng, (m, N))
        for i, (a, b) in enumerate(ranges):
            n = ((pts >= float(a)) & (pts < float(b))).sum(axis=1).astype(np.int64)
            range_sums[i] += (n[:, None] ** powers[None, :]).sum(axis=0)
        idx = np.clip(np.searchsorted(edges, pts, side="right") - 1, 0, bins - 1)
        flat = (np.arange(m)[:, None] * bins + idx).ravel()
        counts = np.bincount(flat, minlength=m * bins).reshape(m, bins).astype(np.int64)
        c1 += counts.sum(axis=0)
        c2 += (counts * counts).sum(axis=0)
        pair += counts.T @ counts
        sq = counts * counts
        pair_sq += sq.T @ sq

    exact_ctx = QContext.exact(1)
    float_ctx = QContext.floating(1)
    moments = []
    for i, rg in enumerate(ranges):
        p = density.integral(*rg)
        ctx = exact_ctx if isinstance(p, Fraction) else float_ctx
        proc = FixedNProcess(N, density, ctx)
        for r in range(1, r_max + 1):
            s1, s2 = float(range_sums[i, r - 1]), float(range_sums[i, 2 * r - 1])
            moments.append(
                MomentEstimate(
                    interval=(float(rg[0]), float(rg[1])),
                    r=r,
                    estimate=s1 / samples,
                    stderr=_se(s1, s2, samples),
                    analytic=float(moment_over_range(proc, r, rg)),
                )
            )

    widths = [float(w) for w in np.diff(edges)]
    masses = [float(density.integral(*_bin_bounds(density, edges, k))) for k in range(bins)]
    f1 = []
    for k in range(bins):
        f1.append(
            BinEstimate(
                k, None, float(edges[k]), float(edges[k + 1]), None, None,
                estimate=float(c1[k]) / samples / widths[k],
                stderr=_se(float(c1[k]), float(c2[k]), samples) / widths[k],
                analytic=N * masses[k] / widths[k],
            )
        )
    f2 = []
    for i in range(bins):
        for j in range(bins):
            if i == j:
                continue
            area = widths[i] * widths[j]
            f2.append(
                BinEstimate(
                    i, j, float(edges[i]), float(edges[i + 1]), float(edges[j]), float(edges[j + 1]),
                    estimate=float(pair[i, j]) / samples / area,
                    stderr=_se(float(pair[i, j]), float(pair_sq[i, j]), samples) / area,
                    analytic=N * (N - 1) * masses[i] * masses[j] / area,
                )
            )
    return EstimateReport(tuple(float(e) for e in edges), tuple(moments), tuple(f1), tuple(f2), samples, seed, N)


def _bin_bounds(density: DensityModel, edges: np.ndarray, k: int) -> tuple:
    lo, hi = density.support
    a = lo if k == 0 else max(lo, _rational(float(edges[k])))
    b = hi if k == len(edges) - 2 else min(hi, _rational(float(edges[k + 1])))
    return a, b


# -- q-Janossy ---------------------------------------------------------------------

@dataclass(frozen=True)
class JanossyFamily:
    """Factorized q-Janossy family ``psi_N = P(N) [N]! f(E_1)...f(E_N)``, N = 0..N_max.

    ``tail_bound`` bounds the weighted mass dropped beyond ``N_max``.
    """

    weights: tuple
    density: DensityModel
    ctx: QContext
    tail_bound: float = 0.0

    def __post_init__(self):
        w = tuple(self.weights)
        if not w:
            raise QDomainError("empty weight sequence")
        if any(x < 0 for x in w):
            raise QDomainError("weights must be nonnegative")
        total = math.fsum(float(x) for x in w)
        if abs(total - 1) > 1e-10:
            raise QDomainError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", w)

    @property
    def N_max(self) -> int:
        return len(self.weights) - 1

    def psi_integral(self, N: int, free: int):
        """``int psi_N`` over ``free`` trailing coordinates, without the ``f(E_i)`` of the rest."""
        return self.weights[N] * q_factorial(N, self.ctx) * self.density.total_mass() ** free


def q_poisson_family(
    lam: float, ctx: QContext, density: DensityModel, h_max: int = 3, tol: float = 1e-12
) -> JanossyFamily:
    """q-Poisson weights truncated where every weighted tail for ``h <= h_max`` is below ``tol``.

    The tail ``sum_{N>M} P(N) [N]!/[N-h]!`` has decreasing term ratios
    ``lam / [N-h+1]``, so it is bounded geometrically by the last kept term.
    """
    model = QPoissonModel(lam, ctx)
    fctx = model.ctx
    weights = []
    bound = math.inf
    N = 0
    while True:
        weights.append(pmf(model, N))
        if N > h_max:
            bounds = []
            for h in range(h_max + 1):
                t = weights[N] * float(q_falling_factorial(N, h, fctx))
                rho = lam / float(q_number(N - h + 1, fctx))
                bounds.append(math.inf if rho >= 1 else t * rho / (1 - rho))
            bound = max(bounds)
            if bound < tol:
                break
        N += 1
        if N > 10_000:
            raise QDomainError("could not reach the requested tail tolerance")
    return JanossyFamily(tuple(weights), density, fctx, bound)


def janossy_normalizer(family: JanossyFamily, h: int):
    """``(1/[h]!) int psi_h`` over all h coordinates; equals ``P(h)`` for a factorized family."""
    if h < 0 or h > family.N_max:
        raise QDomainError(f"h must lie in 0..{family.N_max}")
    return family.psi_integral(h, h) / q_factorial(h, family.ctx)


def janossy_to_product_density(
    family: JanossyFamily, h: int, eval_points: Sequence, include_diagonal: bool = True
):
    """Degree-h q-product density rebuilt from the Janossy family.

        f_h(E_1..E_h) = sum_N (1/[N-h]!) int psi_N dE_{h+1}...dE_N

    The sum starts at ``N = h`` (the ``N = h`` term is ``psi_h`` itself);
    ``include_diagonal=False`` starts it at ``N = h + 1``.
    """
    if h < 1 or h >= family.N_max:
        raise QDomainError(f"need 1 <= h < N_max = {family.N_max}")
    if len(eval_points) != h:
        raise QDomainError(f"expected {h} evaluation points, got {len(eval_points)}")
    lo, hi = family.density.support
    if any(e < lo or e > hi for e in eval_points):
        raise QDomainError("evaluation points must lie in the support")
    if family.tail_bound > 1e-9:
        warnings.warn(
            f"dropped Janossy tail may reach {family.tail_bound:.3g}", TruncationWarning, stacklevel=2
        )
    start = h if include_diagonal else h + 1
    ctx = family.ctx
    acc = []
    for N in range(start, family.N_max + 1):
        acc.append(family.psi_integral(N, N - h) / q_factorial(N - h, ctx))
    total = math.fsum(float(x) for x in acc) if not ctx.backend.value == "exact-rational" else sum(acc)
    return total * math.prod(family.density(e) for e in eval_points)
