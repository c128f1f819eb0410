"""Weighted integrals I_s(w) = int_0^1 kappa^s exp(-kappa w) (1-kappa)^(b-1) h(kappa) dkappa.

Every quantity the estimator needs is a ratio or a log of these integrals:

    log m(y)  = -(p/2) log(2 pi) + log I_{p/2+a-1}(|y|^2 / 2)
    E[kappa|y] = I_{p/2+a}(w) / I_{p/2+a-1}(w)

All accumulation happens in log space.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.special import betaln, gammaln, logsumexp, roots_jacobi, roots_legendre

from shrinkprior.modules import tanh_sinh
from shrinkprior.modules.prior import PriorSpec, log_h
from shrinkprior.modules.tanh_sinh import IntegralResult, Nodes
from shrinkprior.util import logger, performance
from shrinkprior.util.errors import DomainError, IntegrabilityError, ValidationError

__all__ = [
    "Scheme",
    "QuadConfig",
    "IntegralResult",
    "weighted_integral",
    "log_weighted_integrals",
    "log_marginal",
    "posterior_kappa_mean",
    "log_kummer_m",
    "log_integral_oracle",
    "tauberian_log_integral",
]

GJ_MAX_NODES = 1024
# rows integrated together; bounds the (rows x nodes) work array
CHUNK_ROWS = 1024


class Scheme(str, Enum):
    DOUBLE_EXPONENTIAL = "double_exponential"
    GAUSS_JACOBI_COMPOSITE = "gauss_jacobi_composite"


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-300
    max_levels: int = 12
    scheme: Scheme = Scheme.DOUBLE_EXPONENTIAL

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-4:
            raise ValidationError(f"rel_tol must lie in (0, 1e-4], got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValidationError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_levels < 4:
            raise ValidationError(f"max_levels must be at least 4, got {self.max_levels}")
        object.__setattr__(self, "scheme", Scheme(self.scheme))


def _check_integrable(spec: PriorSpec, s: float):
    if spec.b <= 0:
        raise IntegrabilityError(f"(1 - kappa)^(b - 1) is not integrable at 1 for b = {spec.b}")
    if s < -1:
        raise IntegrabilityError(f"kappa^s is not integrable at 0 for s = {s}")
    if s == -1 and not spec.h.boundary_integrable():
        raise IntegrabilityError(
            f"s = -1 needs a finite integral of h(kappa)/kappa, which {spec.h.kind} does not have"
        )


def _check_w(ws: np.ndarray):
    if not np.all(np.isfinite(ws) & (ws >= 0)):
        raise DomainError(f"w must be finite and non-negative, got {ws}")


def _log_kernel(spec: PriorSpec, exponents: np.ndarray, ws: np.ndarray):
    """Batched log-integrand times kappa (1 - kappa); row i uses exponent ``exponents[i]`` and weight ``ws[i]``."""

    def evaluate(nodes: Nodes, rows: np.ndarray) -> np.ndarray:
        log_h_part = spec.h.log_h_from_logs(nodes.log_kappa, nodes.log_1m_kappa)
        return (
            (exponents[rows, None] + 1.0) * nodes.log_kappa[None, :]
            + spec.b * nodes.log_1m_kappa[None, :]
            - ws[rows, None] * nodes.kappa[None, :]
            + log_h_part[None, :]
        )

    return evaluate


def _double_exponential(spec, exponents, ws, cfg):
    outputs = []
    for start in range(0, len(ws), CHUNK_ROWS):
        part_e, part_w = exponents[start : start + CHUNK_ROWS], ws[start : start + CHUNK_ROWS]
        checked = [int(np.argmin(part_w)), int(np.argmax(part_w)), int(np.argmin(part_e)), int(np.argmax(part_e))]
        with np.errstate(over="ignore", invalid="ignore"):
            outputs.append(
                tanh_sinh.integrate_batch(
                    _log_kernel(spec, part_e, part_w), len(part_w), checked, cfg.rel_tol, cfg.abs_tol, cfg.max_levels
                )
            )
    return tuple(np.concatenate(column) for column in zip(*outputs))


def _gj_panels(w: float):
    start = min(0.5, 1.0 / max(w, 1.0))
    edges = [start]
    while edges[-1] < 0.5:
        edges.append(min(0.5, edges[-1] * 2.0))
    return edges


def _gj_log_sum(spec, s, w, n):
    """Composite Gauss rule with n nodes per panel; Jacobi weights absorb both endpoint powers."""
    edges = _gj_panels(w)
    parts = []

    # [0, r0] with kappa^s carried by the Jacobi weight (1 + x)^s
    r0 = edges[0]
    x, wts = roots_jacobi(n, 0.0, s)
    kappa = r0 * (1.0 + x) / 2.0
    log_k = np.log(kappa)
    log_1mk = np.log1p(-kappa)
    parts.append(
        (s + 1.0) * math.log(r0 / 2.0)
        + np.log(wts)
        + (spec.b - 1.0) * log_1mk
        - w * kappa
        + spec.h.log_h_from_logs(log_k, log_1mk)
    )

    x, wts = roots_legendre(n)
    for lo, hi in zip(edges[:-1], edges[1:]):
        kappa = lo + (hi - lo) * (1.0 + x) / 2.0
        log_k = np.log(kappa)
        log_1mk = np.log1p(-kappa)
        parts.append(
            math.log((hi - lo) / 2.0)
            + np.log(wts)
            + s * log_k
            + (spec.b - 1.0) * log_1mk
            - w * kappa
            + spec.h.log_h_from_logs(log_k, log_1mk)
        )

    # [0.5, 1] with (1 - kappa)^(b - 1) carried by (1 - x)^(b - 1)
    x, wts = roots_jacobi(n, spec.b - 1.0, 0.0)
    kappa = (3.0 + x) / 4.0
    log_k = np.log(kappa)
    log_1mk = np.log((1.0 - x) / 4.0)
    parts.append(
        spec.b * math.log(0.25)
        + np.log(wts)
        + s * log_k
        - w * kappa
        + spec.h.log_h_from_logs(log_k, log_1mk)
    )
    return float(logsumexp(np.concatenate(parts)))


def _gauss_jacobi(spec, exponents, ws, cfg):
    if np.any(exponents <= -1):
        raise IntegrabilityError("the Gauss-Jacobi scheme needs s > -1; use the double-exponential scheme")
    count = len(ws)
    values = np.full(count, np.nan)
    errors = np.full(count, np.inf)
    levels = np.zeros(count, dtype=int)
    for i in range(count):
        previous = None
        for level in range(cfg.max_levels + 1):
            n = min(2 ** (level + 2), GJ_MAX_NODES)
            current = _gj_log_sum(spec, float(exponents[i]), float(ws[i]), n)
            values[i], levels[i] = current, level
            if previous is not None:
                errors[i] = abs(math.expm1(current - previous))
                if errors[i] <= cfg.rel_tol or n == GJ_MAX_NODES:
                    break
            previous = current
    converged = np.isfinite(values) & (errors <= cfg.rel_tol)
    return values, errors, converged, levels


def _integrate(spec, exponents, ws, cfg):
    if cfg.scheme is Scheme.GAUSS_JACOBI_COMPOSITE:
        return _gauss_jacobi(spec, exponents, ws, cfg)
    return _double_exponential(spec, exponents, ws, cfg)


@performance
def weighted_integral(spec: PriorSpec, s: float, w: float, cfg: QuadConfig = QuadConfig()) -> IntegralResult:
    _check_integrable(spec, s)
    _check_w(np.asarray(w, dtype=float))
    values, errors, converged, levels = _integrate(spec, np.array([float(s)]), np.array([float(w)]), cfg)
    result = IntegralResult(float(values[0]), float(errors[0]), bool(converged[0]), int(levels[0]))
    if not result.converged:
        logger.warning(f"I_s(w) did not converge for s={s}, w={w}: est_rel_err={result.est_rel_err:.3g}")
    return result


@performance
def log_weighted_integrals(
    spec: PriorSpec, s: float, ws, cfg: QuadConfig = QuadConfig()
) -> Tuple[np.ndarray, np.ndarray]:
    """log I_s and log I_{s+1} at every w in ``ws``, sharing one node set."""
    _check_integrable(spec, s)
    ws = np.atleast_1d(np.asarray(ws, dtype=float))
    _check_w(ws)
    count = len(ws)
    exponents = np.concatenate([np.full(count, float(s)), np.full(count, float(s) + 1.0)])
    values, errors, converged, _ = _integrate(spec, exponents, np.concatenate([ws, ws]), cfg)
    if not np.all(converged):
        logger.warning(
            f"{int(np.sum(~converged))} of {2 * count} integrals did not converge "
            f"(worst est_rel_err {np.max(errors):.3g})"
        )
    return values[:count], values[count:]


def log_marginal(spec: PriorSpec, y_norm_sq: float, cfg: QuadConfig = QuadConfig()) -> float:
    """log m(y) as a function of |y|^2."""
    if y_norm_sq < 0:
        raise DomainError(f"|y|^2 must be non-negative, got {y_norm_sq}")
    s = spec.p / 2.0 + spec.a - 1.0
    return -spec.p / 2.0 * math.log(2.0 * math.pi) + weighted_integral(spec, s, y_norm_sq / 2.0, cfg).log_value


def posterior_kappa_mean(spec: PriorSpec, w, cfg: QuadConfig = QuadConfig()):
    """E[kappa | |y|^2 = 2w]; vectorised over ``w``."""
    log_lower, log_upper = log_weighted_integrals(spec, spec.p / 2.0 + spec.a - 1.0, w, cfg)
    mean = np.exp(log_upper - log_lower)
    return float(mean[0]) if np.ndim(w) == 0 else mean


def log_kummer_m(alpha: float, beta: float, z: float) -> float:
    """log M(alpha; beta; z) from the raw series, for alpha, beta > 0.

    For z < 0 Kummer's transformation M(alpha; beta; z) = e^z M(beta - alpha; beta; -z)
    keeps every summed term positive; this needs beta > alpha.
    """
    if z == 0:
        return 0.0
    if z < 0:
        if beta <= alpha:
            raise DomainError(f"Kummer transformation needs beta > alpha, got alpha={alpha}, beta={beta}")
        return z + log_kummer_m(beta - alpha, beta, -z)
    if alpha <= 0 or beta <= 0:
        raise DomainError(f"series oracle needs alpha, beta > 0, got alpha={alpha}, beta={beta}")
    terms = int(z + 40.0 * math.sqrt(z + 1.0) + 200)
    n = np.arange(terms, dtype=float)
    log_terms = (
        gammaln(alpha + n) - gammaln(alpha) - gammaln(beta + n) + gammaln(beta) + n * math.log(z) - gammaln(n + 1.0)
    )
    return float(logsumexp(log_terms))


def log_integral_oracle(s: float, b: float, w: float) -> float:
    """Closed form of log I_s(w) for constant h: log B(s+1, b) + log M(s+1; s+1+b; -w)."""
    return float(betaln(s + 1.0, b)) + log_kummer_m(s + 1.0, s + 1.0 + b, -w)


def tauberian_log_integral(spec: PriorSpec, s: float, w: float) -> float:
    """Large-w asymptote log(Gamma(s+1) h(1/w) / w^(s+1))."""
    if w <= 1:
        raise DomainError(f"the asymptote is only meaningful for w > 1, got {w}")
    return float(gammaln(s + 1.0) + log_h(spec.h, 1.0 / w) - (s + 1.0) * math.log(w))
