"""Risk, shrinkage-factor and prior-density sweeps.

Risk is estimated at beta = r e_1; every implemented estimator is orthogonally
equivariant, so the risk depends on beta only through r. For beta_hat = c y

    |beta_hat - beta|^2 = c^2 |y|^2 - 2 c r y_1 + r^2

so a replication only needs y_1 and |y|^2.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from shrinkprior.modules.estimator import ShrinkCurve, shrinkage_factor
from shrinkprior.modules.prior import PriorSpec, log_prior_kappa
from shrinkprior.modules.quadrature import QuadConfig
from shrinkprior.shrink import Bayes, Estimator
from shrinkprior.util import logger, stream
from shrinkprior.util.errors import DomainError, ValidationError
from shrinkprior.util.rng import RISK_STREAM

MIN_REPS = 100
DEFAULT_REPS = 20_000


@dataclass(frozen=True)
class RiskCurve:
    grid: np.ndarray
    names: List[str]
    risks: np.ndarray
    mc_se: np.ndarray
    reps: Optional[int] = None
    seed: Optional[int] = None

    def column(self, name: str):
        index = self.names.index(name)
        return self.risks[:, index], self.mc_se[:, index]


@dataclass(frozen=True)
class PriorDensityCurve:
    kappa: np.ndarray
    log_pi: np.ndarray

    @property
    def points(self):
        return list(zip(self.kappa.tolist(), self.log_pi.tolist()))


def worker_count(threads: Optional[int] = None) -> int:
    """Worker pool size from the argument or SHRINKPRIOR_THREADS; 0 means one per CPU."""
    if threads is None:
        raw = os.environ.get("SHRINKPRIOR_THREADS", "0")
        try:
            threads = int(raw)
        except ValueError as e:
            raise ValidationError(f"SHRINKPRIOR_THREADS must be an integer, got {raw!r}") from e
    if threads < 0:
        raise ValidationError(f"thread count must be non-negative, got {threads}")
    return threads or os.cpu_count() or 1


def _risk_at(index: int, radius: float, estimators: Sequence[Estimator], p: int, reps: int, seed: int):
    rng = stream(seed, RISK_STREAM, index)
    y = rng.standard_normal((reps, p))
    y[:, 0] += radius
    norm_sq = np.sum(y * y, axis=1)
    means, errors = [], []
    # common random numbers: every estimator sees the same y
    for estimator in estimators:
        c = np.asarray(estimator.shrink(norm_sq, p), dtype=float)
        loss = c * c * norm_sq - 2.0 * c * radius * y[:, 0] + radius * radius
        means.append(loss.mean())
        errors.append(loss.std(ddof=1) / np.sqrt(reps))
    return np.array(means), np.array(errors)


def risk_sweep(
    estimators: Sequence[Estimator],
    p: int,
    grid: Sequence[float],
    reps: int = DEFAULT_REPS,
    seed: int = 0,
    threads: Optional[int] = None,
    progress: bool = False,
) -> RiskCurve:
    grid = np.asarray(grid, dtype=float)
    if reps < MIN_REPS:
        raise ValidationError(f"reps must be at least {MIN_REPS}, got {reps}")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ValidationError("risk grid values must be finite and non-negative")
    for estimator in estimators:
        if isinstance(estimator, Bayes) and estimator.spec.p != p:
            raise DomainError(f"{estimator.name} is for p={estimator.spec.p}, sweep is for p={p}")
    names = [estimator.name for estimator in estimators]
    if len(set(names)) != len(names):
        raise ValidationError(f"estimator names must be unique, got {names}")

    workers = min(worker_count(threads), max(len(grid), 1))
    logger.experiment(f"risk sweep: {len(grid)} points x {reps} reps x {len(estimators)} estimators, {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        jobs = pool.map(lambda item: _risk_at(item[0], item[1], estimators, p, reps, seed), enumerate(grid))
        results = list(tqdm(jobs, total=len(grid), desc="risk", disable=not progress))

    risks = np.array([means for means, _ in results]).reshape(len(grid), len(estimators))
    mc_se = np.array([errors for _, errors in results]).reshape(len(grid), len(estimators))
    return RiskCurve(grid, names, risks, mc_se, reps, seed)


def shrink_sweep(spec: PriorSpec, y_norm: Sequence[float], cfg: QuadConfig = QuadConfig()) -> ShrinkCurve:
    y_norm = np.asarray(y_norm, dtype=float)
    if np.any(y_norm < 0):
        raise ValidationError("|y| grid values must be non-negative")
    phi = np.atleast_1d(shrinkage_factor(spec, y_norm * y_norm, cfg))
    logger.experiment(f"shrinkage factor on {len(y_norm)} points, limit p + 2a = {spec.p + 2 * spec.a:.6g}")
    return ShrinkCurve(y_norm, phi, spec)


def prior_density_sweep(spec: PriorSpec, kappa: Sequence[float]) -> PriorDensityCurve:
    kappa = np.asarray(kappa, dtype=float)
    return PriorDensityCurve(kappa, np.atleast_1d(log_prior_kappa(spec, kappa)))
