"""Metropolis-within-Gibbs sampler for (beta, kappa) given y.

Each iteration

1. records beta_t ~ N_p((1 - kappa_{t-1}) y, (1 - kappa_{t-1}) I_p), or its
   conditional mean (1 - kappa_{t-1}) y in Rao-Blackwell mode,
2. proposes kappa' ~ Beta(a~, b~) independently of the current state and
   accepts it with the Metropolis-Hastings probability of ``mh_log_accept``.

The chain starts at kappa_0 = 0.5. All random numbers of a chain are drawn up
front from one Philox stream, so a trace is a pure function of
(spec, y, config).
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from shrinkprior.modules.prior import PriorSpec, h_logratio
from shrinkprior.util import logger, performance, stream
from shrinkprior.util.errors import DomainError, ValidationError
from shrinkprior.util.rng import CHAIN_STREAM

KAPPA_START = 0.5


@dataclass(frozen=True)
class SamplerConfig:
    iterations: int = 100_000
    burn_in: int = 1000
    seed: int = 0
    proposal_a: Optional[float] = None
    proposal_b: float = 0.5
    rao_blackwell: bool = True
    chain_id: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError(f"iterations must be positive, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise ValidationError(f"burn_in must lie in [0, iterations), got {self.burn_in}")
        if self.proposal_a is not None and not self.proposal_a > 0:
            raise ValidationError(f"proposal_a must be positive, got {self.proposal_a}")
        if not self.proposal_b > 0:
            raise ValidationError(f"proposal_b must be positive, got {self.proposal_b}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def proposal(self, spec: PriorSpec) -> Tuple[float, float]:
        a_tilde = max(spec.a, 0.5) if self.proposal_a is None else self.proposal_a
        return a_tilde, self.proposal_b


@dataclass(frozen=True)
class ChainTrace:
    y: np.ndarray
    kappa: np.ndarray
    kappa_prev: np.ndarray
    accepted: np.ndarray
    burn_in: int
    rao_blackwell: bool
    beta: Optional[np.ndarray] = None

    def __post_init__(self):
        for array in (self.y, self.kappa, self.kappa_prev, self.accepted, self.beta):
            if array is not None:
                array.setflags(write=False)

    @property
    def iterations(self) -> int:
        return len(self.kappa)

    @property
    def accept_count(self) -> int:
        return int(np.count_nonzero(self.accepted))

    @property
    def records(self) -> np.ndarray:
        """Per-iteration beta records: draws, or (1 - kappa_{t-1}) y in Rao-Blackwell mode."""
        if self.beta is not None:
            return self.beta
        return np.outer(1.0 - self.kappa_prev, self.y)


def _log_weight_factory(spec: PriorSpec, cfg: SamplerConfig, y_norm_sq: float):
    """Log target-over-proposal ratio of kappa, up to a constant."""
    a_tilde, b_tilde = cfg.proposal(spec)
    power_k = spec.a - a_tilde + spec.p / 2.0
    power_1mk = spec.b - b_tilde
    w = y_norm_sq / 2.0

    def log_weight(kappa: np.ndarray) -> np.ndarray:
        log_k = np.log(kappa)
        log_1mk = np.log1p(-kappa)
        return power_k * log_k + power_1mk * log_1mk - w * kappa + spec.h.log_h_from_logs(log_k, log_1mk)

    return log_weight


def mh_log_accept(spec: PriorSpec, cfg: SamplerConfig, y_norm_sq: float, kappa_new: float, kappa_old: float) -> float:
    """log of the acceptance probability for moving kappa_old -> kappa_new."""
    for name, value in (("kappa_new", kappa_new), ("kappa_old", kappa_old)):
        if not 0.0 < value < 1.0:
            raise DomainError(f"{name} must lie in (0, 1), got {value}")
    a_tilde, b_tilde = cfg.proposal(spec)
    log_ratio = (
        (spec.a - a_tilde + spec.p / 2.0) * (math.log(kappa_new) - math.log(kappa_old))
        + (spec.b - b_tilde) * (math.log1p(-kappa_new) - math.log1p(-kappa_old))
        - y_norm_sq / 2.0 * (kappa_new - kappa_old)
        + h_logratio(spec.h, kappa_new, kappa_old)
    )
    return min(0.0, log_ratio)


@performance
def run_chain(spec: PriorSpec, y, cfg: SamplerConfig = SamplerConfig(), progress: bool = False) -> ChainTrace:
    y = np.array(y, dtype=float)
    if y.shape != (spec.p,):
        raise DomainError(f"y must have length p={spec.p}, got shape {y.shape}")
    n = cfg.iterations
    a_tilde, b_tilde = cfg.proposal(spec)
    rng = stream(cfg.seed, CHAIN_STREAM, cfg.chain_id)

    # Beta(a~, b~) as G1 / (G1 + G2); draw order is part of the reproducibility contract
    g1 = rng.standard_gamma(a_tilde, n)
    g2 = rng.standard_gamma(b_tilde, n)
    log_u = np.log(rng.random(n))
    noise = None if cfg.rao_blackwell else rng.standard_normal((n, spec.p))

    with np.errstate(invalid="ignore", divide="ignore"):
        proposals = g1 / (g1 + g2)
    # proposals that round to 0 or 1 (or 0/0) are rejected outright
    valid = (proposals > 0.0) & (proposals < 1.0)
    log_weight = _log_weight_factory(spec, cfg, float(y @ y))
    proposal_weights = np.full(n, -np.inf)
    proposal_weights[valid] = log_weight(proposals[valid])

    kappa = np.empty(n)
    kappa_prev = np.empty(n)
    accepted = np.zeros(n, dtype=bool)
    current = KAPPA_START
    current_weight = float(log_weight(np.asarray(KAPPA_START)))
    for t in tqdm(range(n), desc=f"chain {cfg.chain_id}", disable=not progress, mininterval=0.5):
        kappa_prev[t] = current
        # log_u < min(0, ratio) is the same event as log_u < ratio since log_u < 0
        if valid[t] and log_u[t] < proposal_weights[t] - current_weight:
            current = proposals[t]
            current_weight = proposal_weights[t]
            accepted[t] = True
        kappa[t] = current

    beta = None
    if noise is not None:
        beta = np.outer(1.0 - kappa_prev, y) + np.sqrt(1.0 - kappa_prev)[:, None] * noise

    trace = ChainTrace(y, kappa, kappa_prev, accepted, cfg.burn_in, cfg.rao_blackwell, beta)
    logger.debug(
        f"chain {cfg.chain_id}: {n} iterations, acceptance {acceptance_rate(trace):.3f}, "
        f"{int(np.count_nonzero(~valid))} degenerate proposals"
    )
    return trace


def acceptance_rate(trace: ChainTrace) -> float:
    return trace.accept_count / trace.iterations


def _post_burn_in(trace: ChainTrace, values: np.ndarray) -> np.ndarray:
    kept = values[trace.burn_in:]
    if len(kept) == 0:
        raise DomainError("no draws left after burn-in")
    return kept


def batch_means_se(values: np.ndarray) -> float:
    """Monte Carlo standard error by non-overlapping batch means with floor(sqrt(n)) batches."""
    n = len(values)
    batches = int(math.isqrt(n))
    if batches < 2:
        return math.inf
    size = n // batches
    means = values[: batches * size].reshape(batches, size).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(batches))


def posterior_mean(trace: ChainTrace) -> np.ndarray:
    if trace.beta is None:
        kept = _post_burn_in(trace, trace.kappa_prev)
        return (1.0 - kept.mean()) * trace.y
    return _post_burn_in(trace, trace.beta).mean(axis=0)


def posterior_kappa(trace: ChainTrace) -> Tuple[float, float]:
    """Post-burn-in mean of the kappa values that drive the beta step, with its batch-means error."""
    kept = _post_burn_in(trace, trace.kappa_prev)
    return float(kept.mean()), batch_means_se(kept)


def chain_shrinkage_factor(trace: ChainTrace) -> Tuple[float, float]:
    norm_sq = float(trace.y @ trace.y)
    mean, se = posterior_kappa(trace)
    return norm_sq * mean, norm_sq * se


def write_trace_csv(trace: ChainTrace, path, include_beta: bool = False):
    columns = [np.arange(trace.iterations), trace.kappa, trace.accepted.astype(int)]
    header = ["iter", "kappa", "accept"]
    fmt = ["%d", "%.17g", "%d"]
    if include_beta:
        records = trace.records
        columns.extend(records.T)
        header.extend(f"beta_{i + 1}" for i in range(records.shape[1]))
        fmt.extend(["%.17g"] * records.shape[1])
    np.savetxt(path, np.column_stack(columns), fmt=fmt, delimiter=",", header=",".join(header), comments="")
    logger.debug(f"wrote {trace.iterations} trace rows to {path}")
