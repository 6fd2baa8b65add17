import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from qpointproc import pointproc
from qpointproc.pointproc import DensityModel, FixedNProcess, JanossyFamily, TruncationWarning
from qpointproc.qcalc import QContext, QDomainError, q_factorial, q_number
from qpointproc.qpoly import Q


def test_uniform_density_exact():
    d = DensityModel.uniform(0, 2)
    assert d(Fraction(1, 2)) == Fraction(1, 2)
    assert d.integral(0, Fraction(1, 2)) == Fraction(1, 4)
    assert d.total_mass() == 1
    assert d(3) == 0


def test_tent_integral():
    d = DensityModel.tent(0, 1)
    assert d.integral(0, Fraction(1, 2)) == Fraction(1, 2)
    assert d(Fraction(1, 2)) == 2
    assert d.integral(0, Fraction(1, 4)) == Fraction(1, 8)


def test_piecewise_linear_is_normalized():
    d = DensityModel.piecewise_linear((0, 1, 3), (1, 3, 1))
    assert d.total_mass() == 1


def test_density_vectorized_matches_scalar():
    d = DensityModel.tent(0, 2)
    xs = np.array([-0.5, 0.0, 0.3, 1.0, 1.7, 2.0, 2.5])
    assert np.allclose(d(xs), [float(d(float(x))) for x in xs])


def test_bad_density_inputs():
    with pytest.raises(QDomainError):
        DensityModel.uniform(1, 1)
    with pytest.raises(QDomainError):
        DensityModel.piecewise_linear((0, 1), (1, -1))
    with pytest.raises(QDomainError):
        DensityModel.uniform(0, 1).integral(0, 2)


@pytest.mark.parametrize("d", [DensityModel.tent(0, 1), DensityModel.piecewise_linear((0, 0.2, 1), (3, 0.5, 2))])
def test_density_sampler_ks(d):
    draws = d.sample(np.random.default_rng(5), 50_000)
    cdf = np.vectorize(lambda x: float(d.integral(d.support[0], x)))
    assert stats.kstest(draws, cdf).pvalue > 1e-3


def test_worked_moments():
    proc = FixedNProcess(10, DensityModel.uniform(0, 1), QContext.exact(1))
    assert moment_value(proc, 1) == 3
    assert moment_value(proc, 2) == Fraction(111, 10)


def moment_value(proc, r):
    return pointproc.moment_over_range(proc, r, (0, Fraction(3, 10)))


@pytest.mark.parametrize("r", range(1, 7))
def test_classical_moments_match_binomial(r):
    proc = FixedNProcess(10, DensityModel.uniform(0, 1), QContext.floating(1.0))
    oracle = stats.binom(10, 0.3).moment(r)
    assert float(pointproc.moment_over_range(proc, r, (0.0, 0.3))) == pytest.approx(oracle, rel=1e-12)


def test_whole_range_moment_is_power_of_bracket():
    for ctx in (QContext.symbolic(), QContext.exact(Fraction(3, 2))):
        for N in range(1, 6):
            proc = FixedNProcess(N, DensityModel.uniform(0, 1), ctx)
            for r in range(1, 5):
                assert pointproc.moment_over_range(proc, r, (0, 1)) == q_number(N, ctx) ** r


def test_symbolic_partial_range_rejected():
    proc = FixedNProcess(3, DensityModel.uniform(0, 1), QContext.symbolic())
    with pytest.raises(QDomainError):
        pointproc.moment_over_range(proc, 2, (0, Fraction(1, 2)))


def test_product_density():
    proc = FixedNProcess(3, DensityModel.uniform(0, 1), QContext.symbolic())
    assert pointproc.product_density_coefficient(proc, 2) == (1 + Q + Q ** 2) * (1 + Q)
    ctx = QContext.exact(2)
    proc = FixedNProcess(3, DensityModel.uniform(0, 2), ctx)
    assert pointproc.product_density(proc, [Fraction(1, 2)]) == Fraction(7, 2)


def test_marginalization_worked_value():
    proc = FixedNProcess(3, DensityModel.uniform(0, 1), QContext.exact(2))
    assert pointproc.verify_marginalization(proc, 1) == (7, 7)


@pytest.mark.parametrize("ctx", [QContext.symbolic(), QContext.exact(2), QContext.exact(Fraction(1, 2))])
def test_marginalization_exact(ctx):
    for N in range(2, 9):
        proc = FixedNProcess(N, DensityModel.uniform(0, 1), ctx)
        for h in range(1, N):
            lhs, rhs = pointproc.verify_marginalization(proc, h)
            assert lhs == rhs


@pytest.fixture(scope="module")
def mc_report():
    d = DensityModel.uniform(0, 1)
    return pointproc.mc_estimate_classical(10, d, [(0, Fraction(3, 10))], 3, 200_000, seed=4, bins=5)


def test_mc_within_standard_errors(mc_report):
    for m in mc_report.moments:
        assert abs(m.estimate - m.analytic) < 4 * m.stderr
    for b in mc_report.f1 + mc_report.f2:
        assert abs(b.estimate - b.analytic) < 4 * b.stderr
    assert mc_report.f1[0].analytic == pytest.approx(10.0)
    assert mc_report.f2[0].analytic == pytest.approx(90.0)
    assert mc_report.moments[1].analytic == pytest.approx(11.1)


def test_mc_reproducible_and_formats(mc_report):
    again = pointproc.mc_estimate_classical(
        10, DensityModel.uniform(0, 1), [(0, Fraction(3, 10))], 3, 200_000, seed=4, bins=5
    )
    assert again.to_csv() == mc_report.to_csv()
    header = mc_report.to_csv().splitlines()[0]
    assert header == "kind,r,lo,hi,lo2,hi2,estimate,stderr,analytic"
    assert "np.float" not in mc_report.to_csv()
    assert len(mc_report.f2) == 5 * 4
    assert '"seed": 4' in mc_report.to_json()


def test_mc_rejects_small_samples():
    with pytest.raises(ValueError):
        pointproc.mc_estimate_classical(3, DensityModel.uniform(0, 1), [(0, 0.5)], 2, 100, seed=1)


def test_janossy_point_mass_family():
    ctx = QContext.exact(Fraction(1, 2))
    fam = JanossyFamily((0, 0, 1), DensityModel.uniform(0, 1), ctx)
    # only N = 2 contributes; f_1 = [2] f and f_2 = [2]! f f
    got = pointproc.janossy_to_product_density(fam, 1, [Fraction(1, 3)])
    assert got == q_number(2, ctx)


@pytest.mark.parametrize("q,lam", [(0.5, 1.0), (0.9, 0.5), (1.0, 2.0), (1.5, 2.0), (2.0, 0.25)])
def test_janossy_reconstruction(q, lam):
    d = DensityModel.uniform(0, 2)
    fam = pointproc.q_poisson_family(lam, QContext.floating(q), d)
    pts = (0.3, 1.1, 1.7)
    for h in (1, 2, 3):
        got = pointproc.janossy_to_product_density(fam, h, pts[:h])
        assert abs(got - lam ** h * 0.5 ** h) < 1e-8
    total = math.fsum(pointproc.janossy_normalizer(fam, h) for h in range(fam.N_max + 1))
    assert abs(total - 1) < 1e-10


def test_janossy_without_diagonal_term():
    # dropping N = h leaves lam^h minus the P(h) [h]! contribution
    q, lam = 0.5, 1.0
    d = DensityModel.uniform(0, 1)
    ctx = QContext.floating(q)
    fam = pointproc.q_poisson_family(lam, ctx, d)
    for h in (1, 2):
        got = pointproc.janossy_to_product_density(fam, h, [0.5] * h, include_diagonal=False)
        diag = fam.weights[h] * float(q_factorial(h, fam.ctx))
        assert got == pytest.approx(lam ** h - diag, abs=1e-12)
    # for h = 1 the dropped term is P(1) = P(0) lam
    got1 = pointproc.janossy_to_product_density(fam, 1, [0.5], include_diagonal=False)
    assert got1 == pytest.approx(lam * (1 - fam.weights[0]), abs=1e-12)


def test_janossy_validation():
    d = DensityModel.uniform(0, 1)
    with pytest.raises(QDomainError):
        JanossyFamily((0.5, 0.4), d, QContext.floating(0.5))
    with pytest.raises(QDomainError):
        JanossyFamily((1.2, -0.2), d, QContext.floating(0.5))
    fam = pointproc.q_poisson_family(1.0, QContext.floating(0.5), d)
    with pytest.raises(QDomainError):
        pointproc.janossy_to_product_density(fam, 2, [0.5])
    with pytest.raises(QDomainError):
        pointproc.janossy_to_product_density(fam, 1, [1.5])


def test_janossy_truncation_warning():
    d = DensityModel.uniform(0, 1)
    w = (0.5, 0.3, 0.2)
    fam = JanossyFamily(w, d, QContext.floating(0.5), tail_bound=1e-3)
    with pytest.warns(TruncationWarning):
        pointproc.janossy_to_product_density(fam, 1, [0.5])
