"""Linear-regression geometry: design matrices, modes and the model/noise split.

Data are standardized to z = y / sigma. For every model dimension K the
standardized data vector is decomposed into a signal part lying in the span
of the K design columns and a residual lying in its orthogonal complement
(the noise space). All quantities are plain numpy arrays that are made
read-only on construction.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from services.errors import (
    BasisExhaustedError,
    DegenerateSpaceError,
    InvalidUncertaintyError,
    NumericalError,
    OverparameterizedError,
    SingularDesignError,
)

logger = logging.getLogger(__name__)

RANK_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
GRAM_SCHMIDT_TOL = 1e-10


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Observed points (x_n, y_n, sigma_n), n = 1..N."""

    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        x = _frozen(self.x)
        y = _frozen(self.y)
        sigma = _frozen(self.sigma)
        if x.ndim != 1 or y.ndim != 1 or sigma.ndim != 1:
            raise ValueError("x, y and sigma must be one-dimensional")
        if not (len(x) == len(y) == len(sigma)):
            raise ValueError(
                f"x, y and sigma must have equal length (got {len(x)}, {len(y)}, {len(sigma)})"
            )
        if len(x) < 1:
            raise ValueError("a dataset needs at least one point")
        _check_sigma(sigma)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_points(self) -> int:
        return len(self.x)


def _check_sigma(sigma: np.ndarray) -> None:
    bad = np.flatnonzero(~(sigma > 0))
    if bad.size:
        n = int(bad[0])
        raise InvalidUncertaintyError(
            f"sigma[{n}] = {sigma[n]!r} is not strictly positive"
        )


@dataclass(frozen=True)
class StandardizedData:
    """Standardized data vector z_n = y_n / sigma_n and its squared norm."""

    z: np.ndarray
    z_sq: float


class BasisKind(str, Enum):
    COSINE = "cosine"
    TABLE = "table"


@dataclass(frozen=True)
class BasisSpec:
    """Basis functions f_k, either the closed-form cosine series or a table.

    For ``COSINE`` the series is normalized for ``size`` points:
    f_1 = sqrt(1/size), f_k(x) = sqrt(2/size) cos((k-1) x) for k >= 2.
    For ``TABLE`` the N x M matrix holds f_k(x_n) on the sample points.
    """

    kind: BasisKind
    size: int
    table: Optional[np.ndarray] = None

    @classmethod
    def cosine(cls, size: int) -> "BasisSpec":
        if size < 1:
            raise ValueError("cosine basis needs size >= 1")
        return cls(kind=BasisKind.COSINE, size=size)

    @classmethod
    def from_table(cls, table) -> "BasisSpec":
        values = _frozen(table)
        if values.ndim != 2:
            raise ValueError("a table basis must be a two-dimensional array")
        n_rows, n_cols = values.shape
        if n_cols > n_rows:
            raise ValueError(f"table basis has {n_cols} columns but only {n_rows} rows")
        if not np.all(np.isfinite(values)):
            raise ValueError("table basis contains non-finite values")
        return cls(kind=BasisKind.TABLE, size=n_cols, table=values)

    @property
    def n_functions(self) -> int:
        return self.size

    def evaluate(self, x: np.ndarray, K: int) -> np.ndarray:
        """Return the N x K matrix of f_k(x_n) for k = 1..K."""
        if K > self.n_functions:
            raise BasisExhaustedError(
                f"requested K={K} but the {self.kind.value} basis only has {self.n_functions} functions"
            )
        x = np.asarray(x, dtype=float)
        if self.kind is BasisKind.COSINE:
            k = np.arange(K)
            values = np.sqrt(2.0 / self.size) * np.cos(np.outer(x, k))
            values[:, 0] = np.sqrt(1.0 / self.size)
            return values
        if self.table.shape[0] != len(x):
            raise BasisExhaustedError(
                f"table basis has {self.table.shape[0]} rows but the dataset has {len(x)} points"
            )
        return np.array(self.table[:, :K])


@dataclass(frozen=True)
class DesignMatrix:
    """N x K design matrix with columns v_k = f_k(x_n) / sigma_n."""

    X: np.ndarray

    @property
    def n_points(self) -> int:
        return self.X.shape[0]

    @property
    def K(self) -> int:
        return self.X.shape[1]

    @property
    def basis_columns(self) -> List[np.ndarray]:
        return [self.X[:, k] for k in range(self.K)]


@dataclass(frozen=True)
class FitDecomposition:
    """Maximum-likelihood fit of one model dimension K."""

    K: int
    alpha_hat: np.ndarray
    hessian: np.ndarray
    eigvecs: np.ndarray
    eigvals: np.ndarray
    beta_hat: np.ndarray
    F_sq: float
    chi_sq: float
    z_sq: float
    f_hat: np.ndarray
    resid_hat: np.ndarray


@dataclass(frozen=True)
class NoiseBasis:
    """Orthonormal basis of the noise space and the noise-space modes."""

    X_L: np.ndarray
    beta_hat_L: np.ndarray

    @property
    def L(self) -> int:
        return self.X_L.shape[1]


def standardize(data: Dataset) -> StandardizedData:
    """Divide observations by their uncertainties."""
    _check_sigma(data.sigma)
    z = data.y / data.sigma
    return StandardizedData(z=_frozen(z), z_sq=float(np.dot(z, z)))


def build_design_matrix(data: Dataset, basis: BasisSpec, K: int) -> DesignMatrix:
    """Assemble X[n, k] = f_k(x_n) / sigma_n for k = 1..K.

    Raises:
        OverparameterizedError: K < 1 or K > N.
        BasisExhaustedError: the basis has fewer than K functions.
    """
    N = data.n_points
    if K < 1 or K > N:
        raise OverparameterizedError(f"K={K} is outside 1..N={N}")
    values = basis.evaluate(data.x, K)
    return DesignMatrix(X=_frozen(values / data.sigma[:, None]))


def jacobi_eigh(matrix: np.ndarray, tol: float = JACOBI_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Eigensystem of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops
    below ``tol`` times the Frobenius norm of the input.

    Returns:
        (eigvals, eigvecs) with eigenvalues in descending order and
        eigenvectors as columns, each oriented so that its largest-magnitude
        component is positive.
    """
    A = np.array(matrix, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    scale = np.linalg.norm(A)
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix must be symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    if scale == 0.0:
        return np.zeros(n), V

    sweeps = 0
    while True:
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol * scale:
            break
        if sweeps >= JACOBI_MAX_SWEEPS:
            raise NumericalError(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0

                vec_p = V[:, p].copy()
                vec_q = V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q

    logger.debug("Jacobi converged after %d sweeps (n=%d)", sweeps, n)
    eigvals = np.diag(A).copy()
    order = np.argsort(-eigvals, kind="stable")
    eigvals = eigvals[order]
    V = V[:, order]
    signs = np.sign(V[np.argmax(np.abs(V), axis=0), np.arange(n)])
    signs[signs == 0] = 1.0
    return eigvals, V * signs


def fit(z: StandardizedData, X: DesignMatrix) -> FitDecomposition:
    """Maximum-likelihood mode and the Pythagorean split z^2 = chi^2 + F^2.

    Raises:
        SingularDesignError: smallest Hessian eigenvalue is not above
            RANK_TOL times the largest.
    """
    design = X.X
    K = X.K
    N = X.n_points
    hessian = design.T @ design
    eigvals, eigvecs = jacobi_eigh(hessian)
    if eigvals[0] <= 0.0 or eigvals[-1] <= RANK_TOL * eigvals[0]:
        raise SingularDesignError(
            f"design matrix for K={K} is singular "
            f"(eigenvalue ratio {eigvals[-1] / eigvals[0] if eigvals[0] > 0 else 0.0:.3e})"
        )

    projected = eigvecs.T @ (design.T @ z.z)
    alpha_hat = eigvecs @ (projected / eigvals)
    # one step of iterative refinement on the normal equations
    correction = eigvecs.T @ (design.T @ (z.z - design @ alpha_hat))
    alpha_hat = alpha_hat + eigvecs @ (correction / eigvals)
    beta_hat = np.sqrt(eigvals) * (eigvecs.T @ alpha_hat)

    if K == N:
        # reference model: all of the data is signal
        f_hat = z.z.copy()
        resid_hat = np.zeros(N)
        F_sq = z.z_sq
        chi_sq = 0.0
    else:
        f_hat = design @ alpha_hat
        resid_hat = z.z - f_hat
        F_sq = float(np.dot(beta_hat, beta_hat))
        chi_sq = z.z_sq - F_sq

    return FitDecomposition(
        K=K,
        alpha_hat=_frozen(alpha_hat),
        hessian=_frozen(hessian),
        eigvecs=_frozen(eigvecs),
        eigvals=_frozen(eigvals),
        beta_hat=_frozen(beta_hat),
        F_sq=float(F_sq),
        chi_sq=float(chi_sq),
        z_sq=z.z_sq,
        f_hat=_frozen(f_hat),
        resid_hat=_frozen(resid_hat),
    )


def reference_fit(z: StandardizedData, X_N: DesignMatrix) -> FitDecomposition:
    """Fit of the K = N reference model against which Bayes factors are taken."""
    if X_N.K != X_N.n_points:
        raise OverparameterizedError(
            f"reference model needs a square design (got {X_N.n_points}x{X_N.K})"
        )
    return fit(z, X_N)


def log_likelihood_at(z: StandardizedData, X: DesignMatrix, alpha) -> float:
    """log L[alpha] - log C = -1/2 |z - X alpha|^2."""
    resid = z.z - X.X @ np.asarray(alpha, dtype=float)
    return -0.5 * float(np.dot(resid, resid))


def _orthogonalize(v: np.ndarray, Q: np.ndarray) -> np.ndarray:
    # twice is enough
    for _ in range(2):
        if Q.shape[1]:
            v = v - Q @ (Q.T @ v)
    return v


def _orthonormal_columns(X: np.ndarray) -> np.ndarray:
    N, K = X.shape
    Q = np.zeros((N, 0))
    for k in range(K):
        col = X[:, k]
        norm = np.linalg.norm(col)
        if norm == 0.0:
            raise DegenerateSpaceError(f"design column {k + 1} is identically zero")
        v = _orthogonalize(col / norm, Q)
        residual = np.linalg.norm(v)
        if residual < GRAM_SCHMIDT_TOL:
            raise DegenerateSpaceError(f"design column {k + 1} is linearly dependent on earlier columns")
        Q = np.column_stack([Q, v / residual])
    return Q


def noise_basis(X_K: DesignMatrix, z: StandardizedData) -> NoiseBasis:
    """Orthonormal basis of the (N-K)-dimensional complement of the model space.

    Modified Gram-Schmidt seeded with the standard coordinate directions
    e_1..e_N; directions whose residual norm after projection falls below
    GRAM_SCHMIDT_TOL are skipped. Takes the data as well as X_K so the
    noise-space coordinates beta_hat_L = X_L^T z come back with the basis;
    N is the row count of X_K.
    """
    N, K = X_K.X.shape
    L = N - K
    Q_model = _orthonormal_columns(X_K.X)
    noise = np.zeros((N, 0))
    for n in range(N):
        if noise.shape[1] == L:
            break
        seed = np.zeros(N)
        seed[n] = 1.0
        v = _orthogonalize(seed, np.column_stack([Q_model, noise]))
        residual = np.linalg.norm(v)
        if residual < GRAM_SCHMIDT_TOL:
            continue
        noise = np.column_stack([noise, v / residual])
    if noise.shape[1] != L:
        raise DegenerateSpaceError(
            f"found only {noise.shape[1]} of {L} noise directions for K={K}"
        )
    return NoiseBasis(X_L=_frozen(noise), beta_hat_L=_frozen(noise.T @ z.z))


def fit_profile(data: Dataset, basis: BasisSpec, max_K: Optional[int] = None) -> List[FitDecomposition]:
    """Fits for K = 1..max_K (default N), refitting the Hessian for every K."""
    N = data.n_points
    K_max = N if max_K is None else max_K
    if K_max < 1 or K_max > N:
        raise OverparameterizedError(f"max_K={K_max} is outside 1..N={N}")
    if basis.n_functions < K_max:
        raise BasisExhaustedError(
            f"basis supplies {basis.n_functions} functions but K up to {K_max} was requested"
        )
    z = standardize(data)
    fits = [fit(z, build_design_matrix(data, basis, K)) for K in range(1, K_max + 1)]
    logger.info("fitted %d models to %d points (z^2=%.6g)", len(fits), N, z.z_sq)
    return fits
