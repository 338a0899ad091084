"""`evidencia selfcheck`: identities the special functions and evidences must satisfy."""

import argparse
import logging
import math
from typing import Callable, List, Tuple

from services import specfun
from services.check_types import CheckResult, CheckStatus
from services.config_manager import ConfigManager
from services.criteria import evidence_gamma_fixed_log, evidence_gamma_marginal_log
from services.errors import ConfigError, EvidenciaError
from utils.helpers import format_error, handle_evidencia_errors

logger = logging.getLogger(__name__)

Check = Tuple[str, float, Callable[[], float]]


def add_selfcheck_parser(subparsers) -> None:
    parser = subparsers.add_parser("selfcheck", help="verify special-function identities and quadratures")
    parser.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply every tolerance by this factor")
    parser.set_defaults(handler=run_selfcheck)


def _relative(measured: float, expected: float) -> float:
    return abs(measured - expected) / max(abs(expected), 1e-300)


def _integral_identity(a: float, x: float, y: float) -> float:
    lhs, rhs = specfun.verify_integral_identity(a, x, y)
    return _relative(lhs, rhs)


def _humbert_reduction(b: float, x: float, y: float) -> float:
    return abs(specfun.humbert_psi2(b, b, b, x, y) - (x + y + specfun.log_0F1(b, x * y)))


def _kummer(a: float, b: float, x: float) -> float:
    reflected = x + math.log(specfun.hyp1f1_direct(b - a, b, -x))
    return abs(specfun.log_1F1(a, b, x) - reflected)


def _equal_parameters(a: float, x: float) -> float:
    return abs(specfun.log_1F1(a, a, x) - x) / x


def _pdf_norm(pdf: Callable[[float], float], scale: float) -> float:
    def log_pdf(t: float) -> float:
        value = pdf(t)
        return math.log(value) if value > 0 else -math.inf
    return abs(math.exp(specfun.log_radial_integral(log_pdf, scale)) - 1.0)


def _gamma_marginalization(F_sq: float, z_sq: float, K: int, N: int, Delta: float, sigma: float) -> float:
    log_half_normal = math.log(2.0 / (math.sqrt(2.0 * math.pi) * sigma))

    def integrand(gamma: float) -> float:
        return (evidence_gamma_fixed_log(F_sq, z_sq, K, N, Delta, gamma)
                + log_half_normal - gamma * gamma / (2.0 * sigma * sigma))

    numeric = specfun.log_radial_integral(integrand, scale=max(sigma, 1.0))
    closed = evidence_gamma_marginal_log(F_sq, z_sq, K, N, Delta, sigma)
    return abs(numeric - closed) / abs(closed)


def default_checks() -> List[Check]:
    return [
        ("integral identity a=2 x=1.5 y=0.7", 1e-6, lambda: _integral_identity(2.0, 1.5, 0.7)),
        ("integral identity a=4.5 x=3 y=5", 1e-6, lambda: _integral_identity(4.5, 3.0, 5.0)),
        ("Psi2 equal-parameter reduction b=1.5", 1e-10, lambda: _humbert_reduction(1.5, 2.0, 3.0)),
        ("Psi2 equal-parameter reduction b=4", 1e-10, lambda: _humbert_reduction(4.0, 10.0, 0.5)),
        ("1F1(a;a;x) = e^x at x=300", 1e-12, lambda: _equal_parameters(2.5, 300.0)),
        ("1F1 Kummer transformation x=3", 1e-9, lambda: _kummer(0.5, 4.0, 3.0)),
        ("1F1 Kummer transformation x=5", 1e-9, lambda: _kummer(1.5, 2.5, 5.0)),
        ("Gamma radial pdf normalization L=5", 1e-8,
         lambda: _pdf_norm(lambda q: specfun.gamma_radial_pdf(q, 0.7, 5), 1.0)),
        ("noncentral Gamma radial pdf normalization K=3", 1e-8,
         lambda: _pdf_norm(lambda r: specfun.noncentral_gamma_radial_pdf(r, 0.5, 2.0, 3), 3.0)),
        ("gamma marginalization K=8 N=32", 1e-6,
         lambda: _gamma_marginalization(40.0, 104.0, 8, 32, 0.5, 3.0)),
    ]


def run_checks(checks: List[Check], tolerance_scale: float = 1.0) -> List[CheckResult]:
    results = []
    for name, tolerance, measure in checks:
        limit = tolerance * tolerance_scale
        try:
            error = float(measure())
        except EvidenciaError as e:
            results.append(CheckResult(name, math.inf, limit, CheckStatus.FAIL, str(e)))
            continue
        status = CheckStatus.PASS if error <= limit else CheckStatus.FAIL
        results.append(CheckResult(name, error, limit, status))
        logger.debug("%s: error %.3e (tolerance %.1e)", name, error, limit)
    return results


@handle_evidencia_errors
def run_selfcheck(args: argparse.Namespace, config: ConfigManager) -> int:
    if args.tolerance_scale < 0:
        raise ConfigError("--tolerance-scale must be nonnegative")
    results = run_checks(default_checks(), args.tolerance_scale)
    for result in results:
        line = (f"{result.status.value.upper():4}  {result.name:<48} "
                f"error={format_error(result.measured_error):>8}  tolerance={result.tolerance:.1e}")
        if result.detail:
            line += f"  ({result.detail})"
        print(line)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0
