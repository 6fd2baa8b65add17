"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line; the lines are repeated in the
pytest terminal summary.  Run directly (``python tests/test_acceptance.py``)
to get just the lines.
"""

import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from qpointproc import pointproc, qdist
from qpointproc.checks import CLASSICAL_BELL, DEFAULT_SEED, admissible_grid, classical_stirling2
from qpointproc.cli import run
from qpointproc.qcalc import QContext, q_exp, q_exp_dual
from qpointproc.qcomb import build_stirling_table, q_bell, q_bell_dobinsky, verify_falling_expansion
from qpointproc.qpoly import Q

GOLDEN = Path(__file__).parent / "golden"
RESULTS: dict[int, str] = {}


def report(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    RESULTS[number] = line
    print(line)
    assert passed, line


def test_criterion_01_falling_expansion():
    bad = 0
    for r in range(1, 9):
        for N in range(1, 9):
            lhs, rhs = verify_falling_expansion(r, N, QContext.symbolic())
            bad += lhs != rhs
    report(1, "symbolic falling expansion, r, N <= 8", bad == 0, f"{bad} mismatching pairs")


def test_criterion_02_tabulated_coefficients():
    sym = build_stirling_table(3, QContext.symbolic())
    bad = (sym.entry(2, 2) != Q) + (sym.entry(3, 2) != Q * (2 + Q)) + (sym.entry(3, 3) != Q ** 3)
    classical = build_stirling_table(10, QContext.exact(1))
    bad += sum(classical.entry(r, s) != classical_stirling2(r, s)
               for r in range(1, 11) for s in range(1, r + 1))
    report(2, "tabulated C(r,s) and q=1 Stirling triangle", bad == 0, f"{bad} mismatches")


def test_criterion_03_bell_consistency():
    worst = 0.0
    for q in (0.3, 0.5, 0.9, 1.5, 2.0):
        ctx = QContext.exact(q)
        for r in range(1, 9):
            worst = max(worst, float(abs(q_bell(r, ctx) - q_bell_dobinsky(r, ctx))))
    seq = [q_bell(r, QContext.exact(1)) for r in range(1, 9)]
    ok = worst < 1e-9 and seq == list(CLASSICAL_BELL)
    report(3, "q-Bell vs q-Dobinsky and classical Bell", ok,
           f"max defect {worst:.2e} (< 1e-9); q=1 sequence {[int(b) for b in seq]}")


def test_criterion_04_euler_identity():
    worst = 0.0
    for q in (0.3, 0.5, 0.9, 1.5, 2.0):
        ctx = QContext.floating(q)
        for x in (0.1, 0.5, 1.0):
            worst = max(worst, abs(q_exp(x, ctx) * q_exp_dual(-x, ctx) - 1))
    report(4, "Euler identity", worst < 1e-10, f"max defect {worst:.2e} (< 1e-10)")


def test_criterion_05_qpoisson_identities():
    norm = mean = fact = 0.0
    for q, lam in admissible_grid():
        m = qdist.QPoissonModel(lam, QContext.floating(q))
        norm = max(norm, qdist.normalization_defect(m))
        mean = max(mean, abs(qdist.mean(m) - lam))
        fact = max(fact, max(abs(qdist.factorial_moment(m, k) - lam ** k) for k in range(7)))
    ok = norm < 1e-10 and mean < 1e-10 and fact < 1e-9
    report(5, "q-Poisson normalization / mean / factorial moments", ok,
           f"{norm:.2e} / {mean:.2e} / {fact:.2e}")


def test_criterion_06_moment_equivalence():
    worst = 0.0
    for q, lam in admissible_grid():
        m = qdist.QPoissonModel(lam, QContext.floating(q))
        series = qdist.generating_series(m, qdist.truncation_order(m, 4))
        for r in range(1, 5):
            a = qdist.moment(m, r)
            b = qdist.moment_via_stirling(m, r)
            c = qdist.apply_u_dq_operator(series, r, m.ctx).evaluate_sum(1.0)
            worst = max(worst, abs(a - b), abs(a - c), abs(b - c))
    report(6, "direct / Stirling / operator moments, r <= 4", worst < 1e-9,
           f"max pairwise defect {worst:.2e} (< 1e-9)")


def test_criterion_07_monte_carlo():
    d = pointproc.DensityModel.uniform(0, 1)
    rep = pointproc.mc_estimate_classical(10, d, [(0, Fraction(3, 10))], 2, 1_000_000, DEFAULT_SEED)
    m2 = next(m for m in rep.moments if m.r == 2)
    z_m2 = abs(m2.estimate - 11.1) / m2.stderr
    f1_0 = 1.0  # uniform one-particle density on [0, 1]
    z_f2 = max(abs(b.estimate - 10 * 9 * f1_0 * f1_0) / b.stderr for b in rep.f2)
    ok = z_m2 < 4 and z_f2 < 4
    report(7, "Monte Carlo E(n^2) and f2, 10^6 replicates", ok,
           f"E(n^2) = {m2.estimate:.4f} (|z| = {z_m2:.2f}); max f2 |z| = {z_f2:.2f} (< 4)")


def test_criterion_08_sampler():
    m = qdist.QPoissonModel(1.0, QContext.floating(0.5))
    draws = qdist.sample_many(m, np.random.default_rng(DEFAULT_SEED), 1_000_000)
    stat, p = qdist.goodness_of_fit(m, draws, n_cells=16)
    report(8, "chi-square of 10^6 q-Poisson draws", p >= 1e-3, f"statistic {stat:.2f}, p = {p:.3f} (>= 1e-3)")


def test_criterion_09_janossy():
    worst = 0.0
    d = pointproc.DensityModel.uniform(0, 2)
    pts = (0.3, 1.1, 1.7)
    for q, lam in admissible_grid():
        fam = pointproc.q_poisson_family(lam, QContext.floating(q), d)
        for h in (1, 2, 3):
            got = pointproc.janossy_to_product_density(fam, h, pts[:h])
            expected = lam ** h * math.prod(float(d(e)) for e in pts[:h])
            worst = max(worst, abs(got - expected))
    bad = 0
    for ctx in (QContext.symbolic(), QContext.exact(2), QContext.exact(Fraction(1, 2))):
        for N in range(2, 9):
            proc = pointproc.FixedNProcess(N, pointproc.DensityModel.uniform(0, 1), ctx)
            for h in range(1, N):
                lhs, rhs = pointproc.verify_marginalization(proc, h)
                bad += lhs != rhs
    ok = worst < 1e-8 and bad == 0
    report(9, "Janossy reconstruction and marginalization", ok,
           f"max defect {worst:.2e} (< 1e-8); {bad} marginalization mismatches")


def test_criterion_10_cli_golden(capsys):
    diffs = []
    for argv, name in ((["stirling", "--rmax", "6", "--q", "symbolic"], "stirling_rmax6_symbolic.txt"),
                       (["identity-check"], "identity_check.txt")):
        code = run(argv)
        out = capsys.readouterr().out
        if code != 0 or out.encode() != (GOLDEN / name).read_bytes():
            diffs.append(" ".join(argv))
    with capsys.disabled():
        report(10, "CLI golden files", not diffs, "byte-identical" if not diffs else f"differs: {diffs}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
