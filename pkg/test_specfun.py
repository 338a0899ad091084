#!/usr/bin/env python3
"""Tests for the log-domain special functions and radial densities.

Oracle values come from mpmath at 50 significant digits.
"""

import math
import os
import sys

import mpmath
import numpy as np
import pytest
from scipy import integrate, stats

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from services import specfun
from services.errors import DomainError


def _mp_log_0f1(b, x):
    with mpmath.workdps(50):
        return float(mpmath.log(mpmath.hyp0f1(b, x)))


def _mp_log_1f1(a, b, x):
    with mpmath.workdps(50):
        return float(mpmath.log(mpmath.hyp1f1(a, b, x)))


def _mp_alternating_1f1(a, b, x, terms=400):
    """Direct summation of 1F1(a; b; x) for x < 0 at 50 digits."""
    with mpmath.workdps(50):
        a, b, x = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(x)
        term = mpmath.mpf(1)
        total = mpmath.mpf(1)
        for m in range(terms):
            term *= (a + m) * x / ((b + m) * (m + 1))
            total += term
        return total


def _mp_log_psi2(a, b, c, x, y, terms=120):
    with mpmath.workdps(50):
        total = mpmath.mpf(0)
        for m in range(terms):
            for n in range(terms - m):
                total += (mpmath.rf(a, m + n) * mpmath.mpf(x) ** m * mpmath.mpf(y) ** n
                          / (mpmath.rf(b, m) * mpmath.rf(c, n) * mpmath.factorial(m) * mpmath.factorial(n)))
        return float(mpmath.log(total))


# ---- 0F1 -----------------------------------------------------------------

def test_log_0f1_at_zero():
    for b in (0.5, 1.0, 7.5):
        assert specfun.log_0F1(b, 0.0) == 0.0


def test_log_0f1_cosh_identity():
    assert specfun.log_0F1(0.5, 1.0) == pytest.approx(math.log(math.cosh(2.0)), rel=1e-14)
    assert specfun.log_0F1(0.5, 1.0) == pytest.approx(1.32501, abs=1e-5)


def test_log_0f1_against_oracle():
    for b, x in [(8.0, 50.0), (0.5, 3.0), (16.0, 400.0), (2.5, 0.01)]:
        assert specfun.log_0F1(b, x) == pytest.approx(_mp_log_0f1(b, x), rel=1e-13)


def test_log_0f1_large_argument_branch():
    for b, x in [(0.5, 700.0), (0.5, 710.0), (8.0, 704.9), (8.0, 705.1), (16.0, 2000.0), (4.0, 1e5)]:
        assert specfun.log_0F1(b, x) == pytest.approx(_mp_log_0f1(b, x), rel=1e-9)


def test_log_0f1_large_order_falls_back_to_series():
    assert specfun.log_0F1(1000.0, 800.0) == pytest.approx(_mp_log_0f1(1000.0, 800.0), rel=1e-10)


def test_log_0f1_leading_asymptotic():
    exact = _mp_log_0f1(8.0, 1e4)
    assert abs(specfun.log_0F1_asymptotic(8.0, 1e4) - exact) / exact < 1e-3
    # the first correction vanishes for b = 1/2
    assert specfun.log_0F1_asymptotic(0.5, 1e4) == pytest.approx(_mp_log_0f1(0.5, 1e4), rel=1e-12)


def test_log_0f1_domain():
    with pytest.raises(DomainError):
        specfun.log_0F1(0.0, 1.0)
    with pytest.raises(DomainError):
        specfun.log_0F1(1.0, -1.0)


# ---- 1F1 -----------------------------------------------------------------

def test_log_1f1_equal_parameters():
    assert specfun.log_1F1(0.5, 0.5, 2.0) == pytest.approx(2.0, abs=1e-14)
    for x in (0.5, 2.0, 10.0, 50.0, 100.0, 300.0):
        assert abs(specfun.log_1F1(2.5, 2.5, x) - x) < 1e-12


def test_log_1f1_at_zero():
    assert specfun.log_1F1(0.5, 16.0, 0.0) == 0.0


def test_log_1f1_against_oracle():
    for a, b, x in [(0.5, 16.0, 60.0), (0.5, 4.0, 2.0), (0.5, 16.0, 500.0), (3.0, 1.5, 25.0)]:
        assert specfun.log_1F1(a, b, x) == pytest.approx(_mp_log_1f1(a, b, x), rel=1e-13)


def test_kummer_transformation():
    for a, b, x in [(0.5, 16.0, 20.0), (1.5, 4.0, 10.0), (2.0, 3.5, 5.0)]:
        reflected = x + float(mpmath.log(_mp_alternating_1f1(b - a, b, -x)))
        assert abs(specfun.log_1F1(a, b, x) - reflected) < 1e-9


def test_direct_summation_small_arguments():
    for a, b, x in [(0.5, 4.0, -3.0), (1.5, 2.5, 2.0), (3.5, 4.0, -1.0)]:
        with mpmath.workdps(50):
            expected = float(mpmath.hyp1f1(a, b, x))
        assert specfun.hyp1f1_direct(a, b, x) == pytest.approx(expected, rel=1e-12)


def test_log_1f1_asymptotic_agrees_at_large_x():
    series = specfun.log_1F1(0.5, 16.0, 200.0)
    assert abs(specfun.log_1F1_asymptotic(0.5, 16.0, 200.0) - series) / series < 1e-3
    assert specfun.log_1F1_asymptotic(0.5, 0.5, 5.0) == 5.0
    assert specfun.log_1F1_asymptotic(3.0, 3.0, 17.0) == 17.0


def test_series_and_asymptotic_crossover_window():
    for x in (1000.0, 1100.0, 1200.0):
        series = specfun.log_1F1(0.5, 16.0, x)
        assert abs(specfun.log_1F1_asymptotic(0.5, 16.0, x) - series) / series < 1e-4


def test_log_1f1_domain():
    with pytest.raises(DomainError):
        specfun.log_1F1(-0.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        specfun.log_1F1(0.5, 0.0, 1.0)
    with pytest.raises(DomainError):
        specfun.log_1F1_asymptotic(0.5, 1.0, 0.0)


# ---- Humbert Psi_2 -------------------------------------------------------

def test_humbert_equal_parameter_reduction_grid():
    grid = np.arange(0.0, 10.01, 0.5)
    for x in grid:
        for y in grid:
            expected = x + y + specfun.log_0F1(2.0, x * y)
            assert abs(specfun.humbert_psi2(2.0, 2.0, 2.0, x, y) - expected) < 1e-10


def test_humbert_example_point():
    assert specfun.humbert_psi2(2.0, 2.0, 2.0, 1.5, 0.7) == pytest.approx(
        2.2 + specfun.log_0F1(2.0, 1.05), abs=1e-10)


def test_humbert_collapses_to_1f1():
    assert specfun.humbert_psi2(1.5, 2.5, 0.7, 3.0, 0.0) == pytest.approx(
        specfun.log_1F1(1.5, 2.5, 3.0), rel=1e-13)
    assert specfun.humbert_psi2(1.5, 2.5, 0.7, 0.0, 0.0) == 0.0


def test_humbert_general_parameters():
    assert specfun.humbert_psi2(1.5, 2.5, 0.7, 1.2, 3.4) == pytest.approx(
        _mp_log_psi2(1.5, 2.5, 0.7, 1.2, 3.4), rel=1e-12)


def test_humbert_domain():
    with pytest.raises(DomainError):
        specfun.humbert_psi2(1.0, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        specfun.humbert_psi2(1.0, 1.0, 1.0, -1.0, 1.0)


# ---- radial densities ----------------------------------------------------

def _integral(pdf, scale):
    def log_pdf(t):
        value = pdf(t)
        return math.log(value) if value > 0 else -math.inf
    return math.exp(specfun.log_radial_integral(log_pdf, scale))


def test_gamma_radial_pdf_values():
    assert specfun.gamma_radial_pdf(1.0, 1.0, 2) == pytest.approx(math.exp(-0.5), rel=1e-14)
    assert specfun.gamma_radial_pdf(0.0, 1.0, 3) == 0.0
    for q in (0.1, 0.9, 2.5):
        for L in (1, 2, 5, 12):
            assert specfun.gamma_radial_pdf(q, 0.7, L) == pytest.approx(
                stats.chi.pdf(q, df=L, scale=0.7), rel=1e-12)


def test_gamma_radial_pdf_normalized():
    for delta, L in [(1.0, 2), (0.7, 5), (2.0, 11)]:
        assert _integral(lambda q: specfun.gamma_radial_pdf(q, delta, L), delta) == pytest.approx(1.0, abs=1e-8)


def test_gamma_radial_pdf_domain():
    with pytest.raises(DomainError):
        specfun.gamma_radial_pdf(1.0, 0.0, 2)


def test_noncentral_reverts_to_gamma():
    for r in (0.2, 1.0, 3.3):
        assert specfun.noncentral_gamma_radial_pdf(r, 1.3, 0.0, 4) == pytest.approx(
            specfun.gamma_radial_pdf(r, 1.3, 4), rel=1e-14)


def test_noncentral_matches_noncentral_chi_square():
    Delta, gamma, K = 1.0, 3.0, 4
    for r in (0.5, 2.0, 3.0, 4.5):
        via_ncx2 = stats.ncx2.pdf(r * r / Delta ** 2, K, gamma ** 2 / Delta ** 2) * 2.0 * r / Delta ** 2
        assert specfun.noncentral_gamma_radial_pdf(r, Delta, gamma, K) == pytest.approx(via_ncx2, rel=1e-8)


def test_noncentral_normalized():
    pdf = lambda r: specfun.noncentral_gamma_radial_pdf(r, 1.0, 3.0, 4)
    assert _integral(pdf, 3.0) == pytest.approx(1.0, abs=1e-8)


def test_noncentral_sampling():
    Delta, gamma, K = 1.0, 3.0, 4
    rng = np.random.default_rng(4242)
    mu = np.zeros(K)
    mu[0] = gamma
    radii = np.sort(np.linalg.norm(mu + Delta * rng.standard_normal((1_000_000, K)), axis=1))
    pdf = lambda r: specfun.noncentral_gamma_radial_pdf(r, Delta, gamma, K)
    worst = 0.0
    for t in np.linspace(1.0, 6.0, 21):
        cdf = integrate.quad(pdf, 0.0, t, epsabs=1e-12, limit=200)[0]
        empirical = np.searchsorted(radii, t, side="right") / len(radii)
        worst = max(worst, abs(cdf - empirical))
    assert worst < 0.005


def test_noncentral_domain():
    with pytest.raises(DomainError):
        specfun.noncentral_gamma_radial_pdf(1.0, 0.0, 1.0, 3)


def test_hypersphere_log_prior():
    assert specfun.hypersphere_log_prior(1, 1.0) == pytest.approx(math.log(0.5), rel=1e-14)
    assert specfun.hypersphere_log_prior(2, 1.0) == pytest.approx(-math.log(2.0 * math.pi), rel=1e-14)
    assert specfun.hypersphere_log_prior(3, 2.0) == pytest.approx(-math.log(16.0 * math.pi), rel=1e-14)
    with pytest.raises(DomainError):
        specfun.hypersphere_log_prior(3, 0.0)


def test_radial_prior_params_validation():
    params = specfun.RadialPriorParams(r=1.0, q=2.0, K=3, L=4, Delta=0.0, gamma=0.0)
    assert params.delta == 1.0
    with pytest.raises(DomainError):
        specfun.RadialPriorParams(r=-1.0, q=2.0, K=3, L=4)
    with pytest.raises(DomainError):
        specfun.RadialPriorParams(r=1.0, q=2.0, K=3, L=4, delta=0.0)


# ---- conditioned evidence and the integral identity -----------------------

def test_conditioned_evidence_at_origin():
    assert specfun.conditioned_log_evidence(3.0, 5.0, 0.0, 0.0, 2, 4) == pytest.approx(-4.0, rel=1e-15)


def test_conditioned_evidence_symmetry():
    value = specfun.conditioned_log_evidence(2.5, 2.5, 1.1, 1.1, 3, 3)
    half = -0.5 * (2.5 + 1.21) + specfun.log_0F1(1.5, 1.21 * 2.5 / 4.0)
    assert value == pytest.approx(2.0 * half, rel=1e-14)


def test_conditioned_evidence_monte_carlo():
    F_sq, chi_sq, r, q = 2.0, 1.5, 1.2, 0.8
    rng = np.random.default_rng(99)

    def sphere_average(radius, norm_sq):
        u = rng.standard_normal((1_000_000, 3))
        u /= np.linalg.norm(u, axis=1)[:, None]
        # |radius u - beta_hat|^2 with beta_hat along the first axis
        dist_sq = radius * radius + norm_sq - 2.0 * radius * math.sqrt(norm_sq) * u[:, 0]
        return float(np.mean(np.exp(-0.5 * dist_sq)))

    estimate = math.log(sphere_average(r, F_sq)) + math.log(sphere_average(q, chi_sq))
    exact = specfun.conditioned_log_evidence(F_sq, chi_sq, r, q, 3, 3)
    assert abs(math.exp(estimate - exact) - 1.0) < 0.01


def test_integral_identity_trivial_cases():
    lhs, rhs = specfun.verify_integral_identity(2.0, 0.0, 0.0)
    assert lhs == pytest.approx(1.0, rel=1e-9)
    assert rhs == 1.0
    lhs, rhs = specfun.verify_integral_identity(2.0, 1.0, 0.0)
    assert lhs == pytest.approx(math.e, rel=1e-9)
    assert rhs == pytest.approx(math.e, rel=1e-15)


def test_integral_identity_by_quadrature():
    for a, x, y in [(3.0, 2.0, 1.5), (2.0, 1.5, 0.7), (4.5, 3.0, 5.0)]:
        lhs, rhs = specfun.verify_integral_identity(a, x, y)
        assert abs(lhs - rhs) / rhs < 1e-6


def test_radial_integral_of_known_density():
    value = specfun.log_radial_integral(lambda t: math.log(t) - t if t > 0 else -math.inf, 1.0)
    assert value == pytest.approx(0.0, abs=1e-10)
