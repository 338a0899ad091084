"""Information criteria and Bayes factors against the K = N reference model.

All functions take the sufficient statistics (chi_sq, F_sq, z_sq, K, N)
produced by linmodel and never refit. Arguments broadcast as numpy arrays,
so a whole K x Ksim grid of profiles can be scored in one call; scalar
inputs give a float back.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.special import gammaln, xlogy

from services import specfun
from services.errors import ConfigError, DegenerateSignalError, DomainError
from services.linmodel import BasisSpec, Dataset, FitDecomposition, fit_profile

logger = logging.getLogger(__name__)


class CriterionKind(str, Enum):
    AIC = "AIC"
    AICC = "AICc"
    BIC = "BIC"
    ROBUST_EXACT = "RobustExact"
    ROBUST_ASYMPTOTIC = "RobustAsymptotic"
    ROBUST_LARGE_K = "RobustLargeK"

    @classmethod
    def parse(cls, name: str) -> "CriterionKind":
        """Case-insensitive lookup by value; NIC is accepted for RobustLargeK."""
        wanted = name.strip().lower()
        if wanted == "nic":
            return cls.ROBUST_LARGE_K
        for kind in cls:
            if kind.value.lower() == wanted:
                return kind
        choices = ", ".join(kind.value for kind in cls)
        raise ConfigError(f"unknown criterion '{name}' (choose from {choices})")


ALL_CRITERIA = tuple(CriterionKind)


def _out(values):
    values = np.asarray(values, dtype=float)
    return float(values) if values.ndim == 0 else values


def _check_positive(**scales: float) -> None:
    for name, value in scales.items():
        if not np.all(np.asarray(value) > 0):
            raise DomainError(f"{name} must be strictly positive")


# ---- classical criteria --------------------------------------------------

def aic(chi_sq, K):
    """chi^2 + 2K."""
    return _out(np.asarray(chi_sq, dtype=float) + 2.0 * np.asarray(K))


def bic(chi_sq, K, N):
    """chi^2 + K ln N."""
    return _out(np.asarray(chi_sq, dtype=float) + np.asarray(K) * np.log(N))


def aicc(chi_sq, K, N):
    """Small-sample AIC; +inf where N - K - 1 <= 0."""
    K = np.asarray(K, dtype=float)
    denom = N - K - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        corrected = np.asarray(chi_sq, dtype=float) + 2.0 * K + 2.0 * K * (K + 1.0) / denom
    return _out(np.where(denom > 0, corrected, np.inf))


# ---- prior-parameterized Bayes factors -----------------------------------

def log_bf_bic_prior(chi_sq, K, N):
    """log BF for the unit-information prior: ((N-K)/2) ln(N+1) - N chi^2 / (2(N+1))."""
    K = np.asarray(K, dtype=float)
    return _out(0.5 * (N - K) * math.log(N + 1.0) - N * np.asarray(chi_sq, dtype=float) / (2.0 * (N + 1.0)))


def log_bf_akaike_prior(chi_sq, K, N, delta, Delta):
    """log BF with noise-space prior scale delta and model-space scale Delta."""
    _check_positive(delta=delta, Delta=Delta)
    L = N - np.asarray(K, dtype=float)
    d2, D2 = delta * delta, Delta * Delta
    return _out(0.5 * L * math.log((1.0 + D2) / (1.0 + d2))
                - (1.0 / (1.0 + d2) - 1.0 / (1.0 + D2)) * np.asarray(chi_sq, dtype=float) / 2.0)


# ---- robust criteria -----------------------------------------------------

_vector_log_1F1 = np.vectorize(specfun.log_1F1, otypes=[float])


def log_bf_robust_exact(F_sq, z_sq, K, N):
    """log 1F1(1/2; K/2; F^2/2) - log 1F1(1/2; N/2; z^2/2)."""
    F_sq = np.asarray(F_sq, dtype=float)
    z_sq = np.asarray(z_sq, dtype=float)
    if np.any(F_sq < 0) or np.any(F_sq > z_sq * (1.0 + 1e-12)):
        raise DomainError("need 0 <= F_sq <= z_sq")
    numerator = _vector_log_1F1(0.5, 0.5 * np.asarray(K, dtype=float), 0.5 * F_sq)
    return _out(numerator - _vector_log_1F1(0.5, 0.5 * N, 0.5 * z_sq))


def _check_signal(F_sq: np.ndarray, needs_signal: np.ndarray, form: str) -> None:
    if np.any(F_sq < 0):
        raise DomainError(f"{form}: F_sq must be nonnegative")
    if np.any((F_sq == 0) & needs_signal):
        raise DegenerateSignalError(f"{form}: F_sq vanished where the robust criterion needs a signal")


def robust_bic_asymptotic(chi_sq, F_sq, K):
    """chi^2 + (K-1) ln(F^2/2) - 2 ln Gamma(K/2)."""
    F_sq = np.asarray(F_sq, dtype=float)
    K = np.asarray(K, dtype=float)
    _check_signal(F_sq, K >= 2, "robust_bic_asymptotic")
    return _out(np.asarray(chi_sq, dtype=float) + xlogy(K - 1.0, F_sq / 2.0) - 2.0 * gammaln(K / 2.0))


def robust_bic_large_k(chi_sq, F_sq, K):
    """chi^2 + K ln(F^2/K) + K."""
    F_sq = np.asarray(F_sq, dtype=float)
    K = np.asarray(K, dtype=float)
    _check_signal(F_sq, np.ones_like(F_sq, dtype=bool), "robust_bic_large_k")
    return _out(np.asarray(chi_sq, dtype=float) + K * np.log(F_sq / K) + K)


# ---- evidences -----------------------------------------------------------

def evidence_gamma_fixed_log(F_sq, z_sq, K, N, Delta, gamma):
    """log evidence - log C for a noncentral model prior of fixed |mu| = gamma, delta = Delta."""
    if Delta < 0 or gamma < 0:
        raise DomainError("Delta and gamma must be nonnegative")
    s = 1.0 + Delta * Delta
    value = -0.5 * N * math.log(s) - (gamma * gamma + z_sq) / (2.0 * s)
    if gamma > 0:
        value += specfun.log_0F1(0.5 * K, gamma * gamma * F_sq / (4.0 * s * s))
    return value


def evidence_gamma_marginal_log(F_sq, z_sq, K, N, Delta, sigma_gamma):
    """Evidence with gamma integrated against a half-Gaussian prior of width sigma_gamma."""
    if Delta < 0:
        raise DomainError("Delta must be nonnegative")
    _check_positive(sigma_gamma=sigma_gamma)
    if math.isinf(sigma_gamma):
        raise DomainError("the evidence vanishes as sigma_gamma -> inf; use log_bf_gamma_marginal")
    s = 1.0 + Delta * Delta
    v2 = sigma_gamma * sigma_gamma
    return (-0.5 * (N - 1) * math.log(s) - 0.5 * math.log(s + v2) - z_sq / (2.0 * s)
            + specfun.log_1F1(0.5, 0.5 * K, v2 * F_sq / (2.0 * s * (s + v2))))


def log_bf_gamma_marginal(F_sq, z_sq, K, N, Delta, sigma_gamma=math.inf):
    """log BF of the gamma-marginalized evidence for H_K against H_N.

    sigma_gamma = inf is the flat-prior limit; with Delta = 0 as well this is
    log_bf_robust_exact.
    """
    if Delta < 0:
        raise DomainError("Delta must be nonnegative")
    _check_positive(sigma_gamma=sigma_gamma)
    s = 1.0 + Delta * Delta
    shrink = 1.0 / s if math.isinf(sigma_gamma) else sigma_gamma ** 2 / (s * (s + sigma_gamma ** 2))
    return (specfun.log_1F1(0.5, 0.5 * K, 0.5 * shrink * F_sq)
            - specfun.log_1F1(0.5, 0.5 * N, 0.5 * shrink * z_sq))


def evidence_radial_log(F_sq, chi_sq, K, L, delta, Delta, gamma, via_humbert=False):
    """Evidence with Gaussian noise prior (scale delta) and noncentral model prior (Delta, gamma).

    With ``via_humbert`` the model factor is evaluated through
    Psi_2(K/2; K/2, K/2; x, y), which needs Delta > 0.
    """
    _check_positive(delta=delta)
    if Delta < 0 or gamma < 0:
        raise DomainError("Delta and gamma must be nonnegative")
    d2, D2 = delta * delta, Delta * Delta
    g2 = gamma * gamma
    noise = -0.5 * L * math.log(1.0 + d2) - chi_sq / (2.0 * (1.0 + d2))
    if via_humbert:
        if Delta == 0:
            raise DomainError("the Humbert form needs Delta > 0")
        x = D2 * F_sq / (2.0 * (1.0 + D2))
        y = g2 / (2.0 * D2 * (1.0 + D2))
        model = (-0.5 * K * math.log(1.0 + D2) - 0.5 * F_sq - g2 / (2.0 * D2)
                 + specfun.humbert_psi2(0.5 * K, 0.5 * K, 0.5 * K, x, y))
    else:
        model = -0.5 * K * math.log(1.0 + D2) - (g2 + F_sq) / (2.0 * (1.0 + D2))
        if gamma > 0:
            model += specfun.log_0F1(0.5 * K, g2 * F_sq / (4.0 * (1.0 + D2) ** 2))
    return noise + model


# ---- profiles ------------------------------------------------------------

def criterion_values(kind: CriterionKind, F_sq, chi_sq, z_sq, K, N):
    """Evaluate one criterion; arrays broadcast (K runs along axis 0 in simulations)."""
    if kind is CriterionKind.AIC:
        return aic(chi_sq, K)
    if kind is CriterionKind.AICC:
        return aicc(chi_sq, K, N)
    if kind is CriterionKind.BIC:
        return bic(chi_sq, K, N)
    if kind is CriterionKind.ROBUST_EXACT:
        return _out(-2.0 * np.asarray(log_bf_robust_exact(F_sq, z_sq, K, N)))
    if kind is CriterionKind.ROBUST_ASYMPTOTIC:
        return robust_bic_asymptotic(chi_sq, F_sq, K)
    if kind is CriterionKind.ROBUST_LARGE_K:
        return robust_bic_large_k(chi_sq, F_sq, K)
    raise ConfigError(f"unsupported criterion {kind!r}")


# criteria with a finite K -> 0 limit; each tends to the null value z^2
NULL_MODEL_CRITERIA = frozenset({
    CriterionKind.AIC,
    CriterionKind.AICC,
    CriterionKind.BIC,
    CriterionKind.ROBUST_LARGE_K,
})


def null_model_value(kind: CriterionKind, z_sq):
    """Criterion value of the K = 0 model (no parameters, chi^2 = z^2), or None."""
    if kind not in NULL_MODEL_CRITERIA:
        return None
    return np.asarray(z_sq, dtype=float)


def select_index(values) -> int:
    """1-based K of the minimum; the smallest K wins ties."""
    return int(np.argmin(np.asarray(values, dtype=float))) + 1


@dataclass(frozen=True)
class CriterionResult:
    criterion: CriterionKind
    values: np.ndarray

    @property
    def selected_K(self) -> int:
        return select_index(self.values)


@dataclass(frozen=True)
class CriterionProfile:
    """Per-criterion results for K = 1..len(F_sq) and the statistics behind them."""

    F_sq: np.ndarray
    chi_sq: np.ndarray
    z_sq: float
    N: int
    results: Dict[CriterionKind, CriterionResult] = field(default_factory=dict)

    @property
    def K_values(self) -> np.ndarray:
        return np.arange(1, len(self.F_sq) + 1)

    def selected(self, kind: CriterionKind) -> int:
        return self.results[kind].selected_K

    def selections(self) -> Dict[CriterionKind, int]:
        return {kind: result.selected_K for kind, result in self.results.items()}


def build_profile(fits: Sequence[FitDecomposition], N: int,
                  criteria: Iterable[CriterionKind] = ALL_CRITERIA) -> CriterionProfile:
    """Score every fit under each requested criterion."""
    if not fits:
        raise DomainError("build_profile needs at least one fit")
    Ks = [f.K for f in fits]
    if Ks != list(range(1, len(fits) + 1)):
        raise DomainError(f"fits must cover K = 1..{len(fits)} in order (got {Ks})")
    if len(fits) > N:
        raise DomainError(f"got {len(fits)} fits for only N={N} points")

    F_sq = np.array([f.F_sq for f in fits])
    chi_sq = np.array([f.chi_sq for f in fits])
    z_sq = fits[0].z_sq
    K = np.array(Ks, dtype=float)
    results = {}
    for kind in criteria:
        values = np.atleast_1d(criterion_values(kind, F_sq, chi_sq, z_sq, K, N))
        values.setflags(write=False)
        results[kind] = CriterionResult(criterion=kind, values=values)
        logger.debug("%s selects K=%d", kind.value, results[kind].selected_K)
    F_sq.setflags(write=False)
    chi_sq.setflags(write=False)
    return CriterionProfile(F_sq=F_sq, chi_sq=chi_sq, z_sq=z_sq, N=N, results=results)


def select_model(data: Dataset, basis: BasisSpec, max_K: Optional[int] = None,
                 criteria: Iterable[CriterionKind] = ALL_CRITERIA) -> CriterionProfile:
    """Fit K = 1..max_K and score the profile."""
    fits: List[FitDecomposition] = fit_profile(data, basis, max_K)
    return build_profile(fits, data.n_points, criteria)
