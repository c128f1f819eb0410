"""Generalized Bayes estimator through Tweedie's formula, and the James-Stein baseline."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from shrinkprior.modules.prior import PriorSpec
from shrinkprior.modules.quadrature import QuadConfig, posterior_kappa_mean
from shrinkprior.util.errors import DomainError


@dataclass(frozen=True)
class ShrinkCurve:
    y_norm: np.ndarray
    phi: np.ndarray
    spec: PriorSpec

    def __post_init__(self):
        if self.y_norm.shape != self.phi.shape:
            raise ValueError("y_norm and phi must have the same shape")

    @property
    def limit(self) -> float:
        return phi_limit(self.spec)

    @property
    def points(self):
        return list(zip(self.y_norm.tolist(), self.phi.tolist()))


def _as_vector(spec: PriorSpec, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.p,):
        raise DomainError(f"y must have length p={spec.p}, got shape {y.shape}")
    return y


def shrinkage_factor(spec: PriorSpec, y_norm_sq, cfg: QuadConfig = QuadConfig()):
    """phi(|y|^2) = |y|^2 E[kappa | y]; zero at the origin."""
    y_norm_sq = np.asarray(y_norm_sq, dtype=float)
    if np.any(y_norm_sq < 0):
        raise DomainError(f"|y|^2 must be non-negative, got {y_norm_sq}")
    phi = y_norm_sq * posterior_kappa_mean(spec, y_norm_sq / 2.0, cfg)
    return float(phi) if np.ndim(phi) == 0 else phi


def bayes_estimate(spec: PriorSpec, y, cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    y = _as_vector(spec, y)
    mean_kappa = posterior_kappa_mean(spec, float(y @ y) / 2.0, cfg)
    return (1.0 - mean_kappa) * y


def grad_log_marginal(spec: PriorSpec, y, cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """Gradient of log m at y, which Tweedie's formula equates with estimate - y."""
    y = _as_vector(spec, y)
    return -posterior_kappa_mean(spec, float(y @ y) / 2.0, cfg) * y


def james_stein(y) -> np.ndarray:
    """Plain (not positive-part) James-Stein estimate."""
    y = np.asarray(y, dtype=float)
    p = y.shape[0]
    if p < 3:
        raise DomainError(f"James-Stein needs p >= 3, got p={p}")
    norm_sq = float(y @ y)
    if norm_sq == 0:
        raise DomainError("James-Stein is undefined at y = 0")
    return (1.0 - (p - 2) / norm_sq) * y


def phi_limit(spec: PriorSpec) -> float:
    return spec.p + 2.0 * spec.a


def approaches_from_above(spec: PriorSpec) -> bool:
    """Sufficient condition 1 - b + liminf h'/h > 0 for phi to overshoot its limit."""
    return 1.0 - spec.b + spec.h.limit_ratio() > 0


def baranchik_check(curve: ShrinkCurve, tol: float = 1e-12) -> Tuple[bool, bool]:
    """(phi non-decreasing, 0 <= phi <= 2(p-2)) on the curve's grid."""
    order = np.argsort(curve.y_norm)
    phi = curve.phi[order]
    monotone = bool(np.all(np.diff(phi) >= -tol))
    bounded = bool(np.all((phi >= -tol) & (phi <= 2.0 * (curve.spec.p - 2) + tol)))
    return monotone, bounded
