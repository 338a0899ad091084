"""Monte Carlo harness for criterion success rates and analytic criterion curves.

Every replicate owns two counter-based Philox streams keyed by
(seed, replicate): one for the amplitude fluctuations phi_k and one for the
noise matrix eps. Replicates can therefore be evaluated in any order, on
any number of threads, and still produce identical tables.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache, partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from services.criteria import ALL_CRITERIA, CriterionKind, criterion_values, null_model_value
from services.errors import ConfigError
from services.linmodel import BasisSpec

logger = logging.getLogger(__name__)

DEFAULT_SEED = 0xD1CE
DEFAULT_CRITERIA = (
    CriterionKind.AIC,
    CriterionKind.AICC,
    CriterionKind.BIC,
    CriterionKind.ROBUST_LARGE_K,
)
# the exact Bayes factor costs two series per K; it runs on a subsample
EXACT_REPLICATES = 256


def _config_error(exc: ValidationError, what: str) -> ConfigError:
    first = exc.errors()[0]
    where = ".".join(str(part) for part in first["loc"]) or what
    return ConfigError(f"invalid {what} value for '{where}': {first['msg']}")


class SimConfig(BaseModel):
    """Parameters of one success-rate experiment (sigma_n = 1 throughout)."""

    model_config = ConfigDict(frozen=True)

    N: int = Field(32, ge=2)
    a: float = Field(1.0, ge=0)
    b: float = Field(1.0, ge=0)
    replicates: int = Field(4096, ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64)
    criteria: Tuple[CriterionKind, ...] = DEFAULT_CRITERIA

    @model_validator(mode="after")
    def _criteria_not_empty(self) -> "SimConfig":
        if not self.criteria:
            raise ValueError("at least one criterion is required")
        if len(set(self.criteria)) != len(self.criteria):
            raise ValueError("criteria must not repeat")
        return self

    @classmethod
    def build(cls, **values) -> "SimConfig":
        try:
            return cls(**values)
        except ValidationError as exc:
            raise _config_error(exc, "simulation") from exc


class CurveConfig(BaseModel):
    """Grid for the analytic criterion curves."""

    model_config = ConfigDict(frozen=True)

    N: int = Field(32, ge=2)
    a: float = Field(ge=0)
    b: float = Field(0.0, ge=0)
    S: int = Field(8, ge=1)
    K_max: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _within_grid(self) -> "CurveConfig":
        if self.S > self.N:
            raise ValueError(f"S={self.S} exceeds N={self.N}")
        if self.K_max is not None and self.K_max > self.N:
            raise ValueError(f"K_max={self.K_max} exceeds N={self.N}")
        return self

    @classmethod
    def build(cls, **values) -> "CurveConfig":
        try:
            return cls(**values)
        except ValidationError as exc:
            raise _config_error(exc, "curve") from exc


class StreamRole(IntEnum):
    PHI = 0
    EPS = 1


@dataclass(frozen=True)
class ReplicateStream:
    """Independent random streams for one replicate of one experiment."""

    seed: int
    replicate: int

    def generator(self, role: StreamRole) -> np.random.Generator:
        key = np.array([self.seed, self.replicate], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=int(role) << 128))

    def phi(self, N: int) -> np.ndarray:
        return self.generator(StreamRole.PHI).standard_normal(N)

    def eps(self, N: int) -> np.ndarray:
        return self.generator(StreamRole.EPS).standard_normal((N, N))


@dataclass(frozen=True)
class SimDraw:
    """One replicate: column S of D is the dataset generated with Ksim = S."""

    D: np.ndarray
    F_diag: np.ndarray
    E: np.ndarray
    B: np.ndarray

    @property
    def N(self) -> int:
        return self.D.shape[0]


@dataclass(frozen=True)
class ModeSummary:
    modes: np.ndarray
    F_sq: np.ndarray
    chi_sq: np.ndarray


def sample_points(N: int) -> np.ndarray:
    """x_n = (2n - 1) pi / 2N for n = 1..N."""
    if N < 1:
        raise ConfigError(f"N must be at least 1 (got {N})")
    n = np.arange(1, N + 1)
    return (2.0 * n - 1.0) * math.pi / (2.0 * N)


def cosine_basis(N: int) -> BasisSpec:
    if N < 1:
        raise ConfigError(f"N must be at least 1 (got {N})")
    return BasisSpec.cosine(N)


@lru_cache(maxsize=16)
def cosine_design(N: int) -> np.ndarray:
    """Orthonormal N x N cosine design on the sample points, sigma = 1."""
    X = cosine_basis(N).evaluate(sample_points(N), N)
    X.setflags(write=False)
    return X


def amplitude_matrix(N: int) -> np.ndarray:
    """A[k, S] = 1 for k <= S: column S switches on the first S modes."""
    return np.triu(np.ones((N, N)))


def generate_draw(config: SimConfig, stream: ReplicateStream, include_noise: bool = True) -> SimDraw:
    """D = X (a I + b Phi) A + E with Phi = diag(phi), quenched across columns."""
    N = config.N
    X = cosine_design(N)
    phi = stream.phi(N)
    E = stream.eps(N) if include_noise else np.zeros((N, N))
    theta = (config.a + config.b * phi)[:, None] * amplitude_matrix(N)
    D = X @ theta + E
    B = X.T @ D
    return SimDraw(D=D, F_diag=phi, E=E, B=B)


def signal_profiles(draw: SimDraw) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """F_sq[K-1, S-1], chi_sq[K-1, S-1] and z_sq[S-1] for every K and column."""
    z_sq = np.einsum("ns,ns->s", draw.D, draw.D)
    F_sq = np.cumsum(draw.B ** 2, axis=0)
    F_sq[-1] = z_sq
    chi_sq = np.maximum(z_sq[None, :] - F_sq, 0.0)
    chi_sq[-1] = 0.0
    return F_sq, chi_sq, z_sq


def mode_matrix(draw: SimDraw, K: int) -> ModeSummary:
    """Modes of the first K cosine functions for every column, with F^2 and chi^2."""
    N = draw.N
    if not 1 <= K <= N:
        raise ConfigError(f"K={K} is outside 1..{N}")
    F_sq, chi_sq, _ = signal_profiles(draw)
    return ModeSummary(modes=draw.B[:K], F_sq=F_sq[K - 1], chi_sq=chi_sq[K - 1])


def replicate_selections(config: SimConfig, replicate: int) -> Dict[CriterionKind, np.ndarray]:
    """Selected K for every Ksim column of one replicate, per criterion.

    Criteria with a K = 0 limit also compete against the null model; a
    selection of 0 means the null model won and never counts as a success.
    """
    draw = generate_draw(config, ReplicateStream(config.seed, replicate))
    F_sq, chi_sq, z_sq = signal_profiles(draw)
    K = np.arange(1, config.N + 1, dtype=float)[:, None]
    selections = {}
    for kind in config.criteria:
        values = criterion_values(kind, F_sq, chi_sq, z_sq[None, :], K, config.N)
        null = null_model_value(kind, z_sq)
        if null is None:
            selections[kind] = np.argmin(values, axis=0) + 1
        else:
            selections[kind] = np.argmin(np.vstack([null[None, :], values]), axis=0)
    return selections


@dataclass(frozen=True)
class SuccessTable:
    """Success proportions rates[c, S-1] of criterion c at Ksim = S."""

    config: SimConfig
    criteria: Tuple[CriterionKind, ...]
    rates: np.ndarray
    std_errors: np.ndarray
    replicates: int

    def rate(self, kind: CriterionKind, ksim: int) -> float:
        return float(self.rates[self.criteria.index(kind), ksim - 1])

    def std_error(self, kind: CriterionKind, ksim: int) -> float:
        return float(self.std_errors[self.criteria.index(kind), ksim - 1])

    def rows(self) -> List[dict]:
        rows = []
        for i, kind in enumerate(self.criteria):
            for s in range(self.rates.shape[1]):
                rows.append({
                    "criterion": kind.value,
                    "Ksim": s + 1,
                    "rate": float(self.rates[i, s]),
                    "std_error": float(self.std_errors[i, s]),
                    "replicates": self.replicates,
                })
        return rows


def resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ConfigError(f"thread count must be >= 0 (got {threads})")
    return threads or (os.cpu_count() or 1)


def run_success_experiment(config: SimConfig, threads: int = 1) -> SuccessTable:
    """Count how often each criterion picks K = Ksim across replicates."""
    if config.replicates < 1:
        raise ConfigError("replicates must be at least 1")
    workers = resolve_threads(threads)
    N = config.N
    ksim = np.arange(1, N + 1)
    counts = {kind: np.zeros(N, dtype=np.int64) for kind in config.criteria}
    logger.info("running %d replicates (N=%d, a=%g, b=%g) on %d threads",
                config.replicates, N, config.a, config.b, workers)

    work = partial(replicate_selections, config)
    if workers == 1:
        results = map(work, range(config.replicates))
        for selections in results:
            for kind, chosen in selections.items():
                counts[kind] += chosen == ksim
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for selections in pool.map(work, range(config.replicates)):
                for kind, chosen in selections.items():
                    counts[kind] += chosen == ksim

    rates = np.array([counts[kind] for kind in config.criteria], dtype=float) / config.replicates
    std_errors = np.sqrt(rates * (1.0 - rates) / config.replicates)
    return SuccessTable(
        config=config,
        criteria=tuple(config.criteria),
        rates=rates,
        std_errors=std_errors,
        replicates=config.replicates,
    )


def run_criterion_experiments(config: SimConfig, threads: int = 1) -> List[SuccessTable]:
    """Success tables for every requested criterion.

    RobustExact runs on the first min(replicates, EXACT_REPLICATES) replicates
    and comes back as its own table after the others; the replicates it sees
    are the same draws the other criteria see.
    """
    exact = CriterionKind.ROBUST_EXACT
    fast = tuple(kind for kind in config.criteria if kind is not exact)
    tables = []
    if fast:
        tables.append(run_success_experiment(config.model_copy(update={"criteria": fast}), threads))
    if exact in config.criteria:
        subsample = min(config.replicates, EXACT_REPLICATES)
        logger.info("RobustExact on %d of %d replicates", subsample, config.replicates)
        tables.append(run_success_experiment(
            config.model_copy(update={"criteria": (exact,), "replicates": subsample}), threads))
    return tables


@dataclass(frozen=True)
class AnalyticEstimate:
    """Expected statistics for model dimension K and true dimension S.

    E_beta_sq_model / E_beta_sq_noise are the average squared modes inside
    and outside the model space with unit prior scales and gamma^2 = a^2 S.
    """

    E_F_sq: float
    E_chi_sq: float
    E_z_sq: float
    E_beta_sq_model: float
    E_beta_sq_noise: float


def analytic_estimates(a: float, b: float, N: int, S: int, K: int) -> AnalyticEstimate:
    if not (1 <= K <= N and 1 <= S <= N):
        raise ConfigError(f"need 1 <= K, S <= N (got K={K}, S={S}, N={N})")
    if a < 0 or b < 0:
        raise ConfigError("amplitudes a and b must be nonnegative")
    power = a * a + b * b
    return AnalyticEstimate(
        E_F_sq=power * min(K, S) + K,
        E_chi_sq=(N - K) + power * max(S - K, 0),
        E_z_sq=power * S + N,
        E_beta_sq_model=1.0 + a * a * S / K,
        E_beta_sq_noise=1.0,
    )


@dataclass(frozen=True)
class CurveTable:
    """Criteria evaluated on the analytic estimates, K = 1..K_max."""

    config: CurveConfig
    K: np.ndarray
    E_chi_sq: np.ndarray
    E_F_sq: np.ndarray
    E_z_sq: float
    values: Dict[CriterionKind, np.ndarray]

    def minimum_K(self, kind: CriterionKind) -> int:
        return int(self.K[int(np.argmin(self.values[kind]))])

    def rows(self) -> List[dict]:
        rows = []
        for i, k in enumerate(self.K):
            row = {"K": int(k), "E_chi_sq": float(self.E_chi_sq[i]), "E_F_sq": float(self.E_F_sq[i])}
            for kind, column in self.values.items():
                row[kind.value] = float(column[i])
            rows.append(row)
        return rows


def criterion_curves(config: CurveConfig,
                     criteria: Sequence[CriterionKind] = ALL_CRITERIA) -> CurveTable:
    K_max = config.K_max or config.N
    estimates = [analytic_estimates(config.a, config.b, config.N, config.S, K)
                 for K in range(1, K_max + 1)]
    K = np.arange(1, K_max + 1)
    E_F = np.array([e.E_F_sq for e in estimates])
    E_chi = np.array([e.E_chi_sq for e in estimates])
    E_z = estimates[0].E_z_sq
    values = {kind: np.atleast_1d(criterion_values(kind, E_F, E_chi, E_z, K, config.N))
              for kind in criteria}
    return CurveTable(config=config, K=K, E_chi_sq=E_chi, E_F_sq=E_F, E_z_sq=E_z, values=values)
