"""Log-domain special functions and radial prior densities.

Hypergeometric values are returned as natural logarithms throughout:
signal strengths F^2/2 of a few hundred are routine and overflow any
direct evaluation of the series.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gammaln, ive, logsumexp, xlogy

from services.errors import DomainError, NumericalError

logger = logging.getLogger(__name__)

SERIES_REL_TOL = 1e-17
MAX_SERIES_TERMS = 100_000
MAX_HUMBERT_DIAGONALS = 2_000
BESSEL_SWITCH_0F1 = 705.0
QUAD_TAIL_TOL = 1e-14
QUAD_REL_TOL = 1e-12

_LOG_SERIES_TOL = math.log(SERIES_REL_TOL)
_LOG_QUAD_TAIL = math.log(QUAD_TAIL_TOL)


@dataclass(frozen=True)
class RadialPriorParams:
    """Radii and hyperparameters of the radial model and noise priors.

    Attributes:
        r: model radius |beta_K|
        q: noise radius |beta_L|
        K: model dimension
        L: noise dimension
        delta: noise prior scale
        Delta: model prior scale (0 allowed)
        gamma: noncentrality |mu| of the model prior (0 allowed)
        sigma_gamma: width of the half-Gaussian prior on gamma
    """

    r: float
    q: float
    K: int
    L: int
    delta: float = 1.0
    Delta: float = 0.0
    gamma: float = 0.0
    sigma_gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.r < 0 or self.q < 0:
            raise DomainError("radii must be nonnegative")
        if self.K < 1 or self.L < 0:
            raise DomainError(f"need K >= 1 and L >= 0 (got K={self.K}, L={self.L})")
        if self.delta <= 0 or self.sigma_gamma <= 0:
            raise DomainError("delta and sigma_gamma must be strictly positive")
        if self.Delta < 0 or self.gamma < 0:
            raise DomainError("Delta and gamma must be nonnegative")


def _require_positive(**params: float) -> None:
    for name, value in params.items():
        if not value > 0:
            raise DomainError(f"{name} must be strictly positive (got {value!r})")


def _sum_log_terms(log_term: Callable[[np.ndarray], np.ndarray], label: str) -> float:
    """log of sum_m exp(log_term(m)) for a series whose terms eventually decrease.

    Terms are produced in growing chunks; summation stops once the last term
    is decreasing and below SERIES_REL_TOL of the running sum. The final sum
    is accumulated with math.fsum after shifting by the largest term.
    """
    pieces = []
    total = -math.inf
    start = 0
    chunk = 64
    while True:
        if start >= MAX_SERIES_TERMS:
            raise NumericalError(f"{label}: series did not converge in {MAX_SERIES_TERMS} terms")
        m = np.arange(start, min(start + chunk, MAX_SERIES_TERMS), dtype=float)
        lt = log_term(m)
        pieces.append(lt)
        total = float(np.logaddexp(total, logsumexp(lt)))
        if len(lt) >= 2 and lt[-1] <= lt[-2] and lt[-1] - total < _LOG_SERIES_TOL:
            break
        start += len(lt)
        chunk = min(2 * chunk, 4096)
    terms = np.concatenate(pieces)
    peak = float(np.max(terms))
    logger.debug("%s: summed %d terms", label, len(terms))
    return peak + math.log(math.fsum(np.exp(terms - peak)))


def log_0F1(b: float, x: float) -> float:
    """log 0F1(; b; x) for b > 0, x >= 0.

    Below BESSEL_SWITCH_0F1 the power series is summed in the log domain;
    above it the identity 0F1(; b; x) = Gamma(b) x^((1-b)/2) I_{b-1}(2 sqrt x)
    is evaluated with the exponentially scaled Bessel function.
    """
    _require_positive(b=b)
    if x < 0:
        raise DomainError(f"log_0F1 needs x >= 0 (got {x!r})")
    if x == 0:
        return 0.0
    if x > BESSEL_SWITCH_0F1:
        two_root = 2.0 * math.sqrt(x)
        scaled = float(ive(b - 1.0, two_root))
        if scaled > 0 and math.isfinite(scaled):
            return float(gammaln(b)) + 0.5 * (1.0 - b) * math.log(x) + math.log(scaled) + two_root
        logger.debug("log_0F1: Bessel branch underflowed for b=%g, x=%g; summing series", b, x)

    log_x = math.log(x)
    log_gamma_b = float(gammaln(b))

    def term(m: np.ndarray) -> np.ndarray:
        return m * log_x - (gammaln(b + m) - log_gamma_b) - gammaln(m + 1.0)

    return _sum_log_terms(term, "log_0F1")


def log_0F1_asymptotic(b: float, x: float) -> float:
    """Leading-order large-x form 2 sqrt x + (1/4 - b/2) log x + log(Gamma(b) / (2 sqrt pi)).

    The relative correction is of order (4 (b-1)^2 - 1) / (16 sqrt x).
    """
    _require_positive(b=b, x=x)
    return (2.0 * math.sqrt(x) + (0.25 - 0.5 * b) * math.log(x)
            + float(gammaln(b)) - math.log(2.0 * math.sqrt(math.pi)))


def log_1F1(a: float, b: float, x: float) -> float:
    """log 1F1(a; b; x) for a, b > 0, x >= 0 by log-domain series summation."""
    _require_positive(a=a, b=b)
    if x < 0:
        raise DomainError(f"log_1F1 needs x >= 0 (got {x!r})")
    if x == 0:
        return 0.0
    log_x = math.log(x)
    log_gamma_a = float(gammaln(a))
    log_gamma_b = float(gammaln(b))

    def term(m: np.ndarray) -> np.ndarray:
        return ((gammaln(a + m) - log_gamma_a) - (gammaln(b + m) - log_gamma_b)
                + m * log_x - gammaln(m + 1.0))

    return _sum_log_terms(term, "log_1F1")


def log_1F1_asymptotic(a: float, b: float, x: float) -> float:
    """Large-x form log(Gamma(b) / Gamma(a)) + x + (a - b) log x."""
    _require_positive(a=a, b=b)
    if not x > 0:
        raise DomainError(f"log_1F1_asymptotic needs x > 0 (got {x!r})")
    return float(gammaln(b) - gammaln(a)) + x + (a - b) * math.log(x)


def hyp1f1_direct(a: float, b: float, x: float, max_terms: int = 500) -> float:
    """1F1(a; b; x) by direct (possibly alternating) summation, small |x| only."""
    _require_positive(b=b)
    terms = [1.0]
    for m in range(max_terms):
        terms.append(terms[-1] * (a + m) * x / ((b + m) * (m + 1)))
        if abs(terms[-1]) < 1e-18 * abs(math.fsum(terms)) and m > abs(x):
            return math.fsum(terms)
    raise NumericalError(f"hyp1f1_direct: no convergence for a={a}, b={b}, x={x}")


def humbert_psi2(a: float, b: float, c: float, x: float, y: float) -> float:
    """log Psi_2(a; b, c; x, y) = log sum_{m,n} (a)_{m+n} x^m y^n / ((b)_m (c)_n m! n!).

    Summed along the diagonals m + n = d until a decreasing diagonal falls
    below SERIES_REL_TOL of the running total.
    """
    _require_positive(a=a, b=b, c=c)
    if x < 0 or y < 0:
        raise DomainError(f"humbert_psi2 needs x, y >= 0 (got {x!r}, {y!r})")
    if x == 0 and y == 0:
        return 0.0
    lg_a, lg_b, lg_c = float(gammaln(a)), float(gammaln(b)), float(gammaln(c))
    diagonals = []
    total = -math.inf
    previous = -math.inf
    for d in range(MAX_HUMBERT_DIAGONALS):
        m = np.arange(d + 1, dtype=float)
        n = d - m
        lt = (gammaln(a + d) - lg_a
              + xlogy(m, x) + xlogy(n, y)
              - (gammaln(b + m) - lg_b) - (gammaln(c + n) - lg_c)
              - gammaln(m + 1.0) - gammaln(n + 1.0))
        lt = lt[np.isfinite(lt)]
        diag = float(logsumexp(lt)) if lt.size else -math.inf
        diagonals.append(lt)
        total = float(np.logaddexp(total, diag))
        if d > 0 and diag <= previous and diag - total < _LOG_SERIES_TOL:
            terms = np.concatenate(diagonals)
            peak = float(np.max(terms))
            return peak + math.log(math.fsum(np.exp(terms - peak)))
        previous = diag
    raise NumericalError(f"humbert_psi2: no convergence within {MAX_HUMBERT_DIAGONALS} diagonals")


def gamma_radial_pdf(q: float, delta: float, L: int) -> float:
    """Density of the noise radius q = |beta_L| for beta_L ~ N(0, delta^2 I_L).

    (q / delta^2) (q^2 / 2 delta^2)^(L/2 - 1) exp(-q^2 / 2 delta^2) / Gamma(L/2)
    """
    _require_positive(delta=delta)
    if L < 1:
        raise DomainError(f"L must be at least 1 (got {L})")
    if q < 0:
        return 0.0
    log_pdf = (float(xlogy(L - 1, q)) - L * math.log(delta) - (0.5 * L - 1.0) * math.log(2.0)
               - q * q / (2.0 * delta * delta) - float(gammaln(0.5 * L)))
    return math.exp(log_pdf)


def noncentral_gamma_radial_pdf(r: float, Delta: float, gamma: float, K: int) -> float:
    """Density of the model radius r = |beta_K| for beta_K ~ N(mu, Delta^2 I_K), |mu| = gamma."""
    _require_positive(Delta=Delta)
    if K < 1:
        raise DomainError(f"K must be at least 1 (got {K})")
    if gamma < 0:
        raise DomainError(f"gamma must be nonnegative (got {gamma!r})")
    if r < 0:
        return 0.0
    d2 = Delta * Delta
    log_pdf = (float(xlogy(K - 1, r)) - K * math.log(Delta) - (0.5 * K - 1.0) * math.log(2.0)
               - (r * r + gamma * gamma) / (2.0 * d2) - float(gammaln(0.5 * K))
               + log_0F1(0.5 * K, gamma * gamma * r * r / (4.0 * d2 * d2)))
    return math.exp(log_pdf)


def hypersphere_log_prior(dim: int, radius: float) -> float:
    """log of Gamma(dim/2) / (2 pi^(dim/2) radius^(dim-1)), the uniform surface density."""
    if dim < 1:
        raise DomainError(f"dim must be at least 1 (got {dim})")
    _require_positive(radius=radius)
    return (float(gammaln(0.5 * dim)) - math.log(2.0) - 0.5 * dim * math.log(math.pi)
            - (dim - 1) * math.log(radius))


def conditioned_log_evidence(F_sq: float, chi_sq: float, r: float, q: float, K: int, L: int) -> float:
    """log p(y | r, q, H_K) - log C for parameters uniform on the two hyperspheres."""
    if min(F_sq, chi_sq, r, q) < 0:
        raise DomainError("F_sq, chi_sq, r and q must be nonnegative")
    if K < 1 or L < 1:
        raise DomainError(f"need K, L >= 1 (got K={K}, L={L})")
    return (-0.5 * (F_sq + r * r) + log_0F1(0.5 * K, r * r * F_sq / 4.0)
            - 0.5 * (chi_sq + q * q) + log_0F1(0.5 * L, q * q * chi_sq / 4.0))


def log_radial_integral(log_f: Callable[[float], float], scale: float = 1.0) -> float:
    """log of the integral of exp(log_f(t)) over t in [0, inf).

    The upper limit starts at ``scale`` and doubles until the integrand at
    the limit is below QUAD_TAIL_TOL of the largest value seen; the finite
    integral is then evaluated with QUADPACK's adaptive Gauss-Kronrod rule.
    """
    _require_positive(scale=scale)
    upper = scale
    for _ in range(200):
        grid = np.linspace(0.0, upper, 513)[1:]
        values = np.array([log_f(float(t)) for t in grid])
        peak_at = float(grid[int(np.argmax(values))])
        peak = float(np.max(values))
        if log_f(upper) - peak < _LOG_QUAD_TAIL and peak_at < upper:
            break
        upper *= 2.0
    else:
        raise NumericalError("log_radial_integral: integrand tail never decayed")

    def shifted(t: float) -> float:
        return math.exp(log_f(t) - peak) if t > 0 else 0.0

    result = integrate.quad(
        shifted, 0.0, upper, points=[peak_at], limit=500,
        epsabs=0.0, epsrel=QUAD_REL_TOL, full_output=1,
    )
    value, abserr, info = result[:3]
    if len(result) > 3:
        logger.debug("quad on [0, %g]: %s", upper, result[3])
    if not value > 0 or abserr > 1e-9 * value:
        raise NumericalError(
            f"quadrature failed to converge (value={value!r}, error={abserr!r}, evaluations={info['neval']})"
        )
    return peak + math.log(value)


def verify_integral_identity(a: float, x: float, y: float) -> Tuple[float, float]:
    """Both sides of int_0^inf e^-r r^(a-1)/Gamma(a) 0F1(a; x r) 0F1(a; y r) dr = e^(x+y) 0F1(a; x y).

    Returns:
        (lhs, rhs) with lhs by adaptive quadrature and rhs in closed form.
    """
    _require_positive(a=a)
    if x < 0 or y < 0:
        raise DomainError("x and y must be nonnegative")
    log_norm = float(gammaln(a))

    def log_integrand(r: float) -> float:
        return -r + (a - 1.0) * math.log(r) - log_norm + log_0F1(a, x * r) + log_0F1(a, y * r)

    peak_hint = (math.sqrt(x) + math.sqrt(y)) ** 2 + a
    lhs = math.exp(log_radial_integral(log_integrand, scale=max(peak_hint, 1.0)))
    rhs = math.exp(x + y + log_0F1(a, x * y))
    return lhs, rhs
