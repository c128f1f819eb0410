"""Log-space double-exponential quadrature on (0, 1).

The unit interval is reached through kappa = expit(pi * sinh(t)), so that

    log kappa       = log_expit(pi * sinh(t))
    log(1 - kappa)  = log_expit(-pi * sinh(t))
    d kappa / d t   = pi * cosh(t) * kappa * (1 - kappa)

are all available in closed form without ever forming 1 - kappa by
subtraction. An integrand f is supplied as log(f(kappa) kappa (1 - kappa))
evaluated on a ``Nodes`` bundle: the kappa (1 - kappa) part of the
Jacobian is folded into the integrand's own powers of kappa and 1 - kappa,
because far out in t the two log terms are huge and of opposite sign. The
remaining pi cosh(t) is added here, the terms are summed with logsumexp and
the trapezoidal step is halved until two consecutive levels agree.
"""
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import expit, log_expit, logsumexp

from shrinkprior.util import logger

# sinh(t) overflows just past t = 710
T_CAP = 600.0
MIN_LEVEL = 3
SCAN = np.arange(-12.0, 12.0 + 1e-12, 0.125)


class Nodes(NamedTuple):
    t: np.ndarray
    kappa: np.ndarray
    log_kappa: np.ndarray
    log_1m_kappa: np.ndarray
    # log(pi cosh t); with log_kappa + log_1m_kappa this is log d kappa / d t
    log_scale: np.ndarray


@dataclass(frozen=True)
class IntegralResult:
    log_value: float
    est_rel_err: float
    converged: bool
    level: int = 0
    divergent: bool = False

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    @property
    def finite(self) -> bool:
        return not self.divergent and math.isfinite(self.log_value)


def nodes_at(t: np.ndarray) -> Nodes:
    t = np.asarray(t, dtype=float)
    u = np.pi * np.sinh(t)
    log_k = log_expit(u)
    log_1mk = log_expit(-u)
    log_cosh = np.logaddexp(t, -t) - math.log(2.0)
    return Nodes(t, expit(u), log_k, log_1mk, math.log(math.pi) + log_cosh)


def level_nodes(level: int, lo: float, hi: float) -> Nodes:
    step = 2.0 ** -level
    k = np.arange(math.ceil(-lo / step), math.floor(hi / step) + 1)
    return nodes_at(k * step)


LogIntegrand = Callable[[Nodes, Optional[np.ndarray]], np.ndarray]


def _extent(log_integrand: LogIntegrand, rows: np.ndarray, sign: float, floor: np.ndarray, start: float = 1.0) -> float:
    reach = start
    while reach < T_CAP:
        at = nodes_at(np.array([sign * reach]))
        edge = log_integrand(at, rows)[..., 0] + at.log_scale[0]
        if np.all(edge < floor):
            return reach
        reach += max(0.5, reach / 8.0)
    return T_CAP


def window(log_integrand: LogIntegrand, check_rows: np.ndarray, cut: float, log_abs_tol: float):
    """Truncation window [-lo, hi] in t outside which every checked row is below its tail floor.

    Each side is searched outward from the farthest scanned peak on that side, so the
    window always contains every checked row's mass (for large w it sits deep at negative t).
    """
    scan = nodes_at(SCAN)
    values = log_integrand(scan, check_rows) + scan.log_scale
    peak = np.max(values, axis=-1)
    peak_t = SCAN[np.argmax(values, axis=-1)]
    floor = np.maximum(peak - cut, log_abs_tol)
    lo = _extent(log_integrand, check_rows, -1.0, floor, max(1.0, float(np.max(-peak_t))))
    hi = _extent(log_integrand, check_rows, 1.0, floor, max(1.0, float(np.max(peak_t))))
    return lo, hi


def integrate_batch(
    log_integrand: LogIntegrand,
    n_rows: int,
    check_rows: Sequence[int],
    rel_tol: float,
    abs_tol: float,
    max_levels: int,
):
    """Integrate ``n_rows`` log-integrands sharing one node set.

    ``log_integrand(nodes, rows)`` must return an array of shape
    ``(len(rows), len(nodes.t))``. Returns ``(log_values, est_rel_err,
    converged, level)`` arrays of length ``n_rows``.
    """
    checked = np.unique(np.asarray(check_rows, dtype=int))
    cut = -math.log(rel_tol) + 20.0
    lo, hi = window(log_integrand, checked, cut, math.log(abs_tol))
    truncated = lo < T_CAP and hi < T_CAP
    if not truncated:
        logger.warning(f"integrand tail not negligible at |t| = {T_CAP}; result will be flagged non-converged")

    values = np.full(n_rows, np.nan)
    errors = np.full(n_rows, np.inf)
    levels = np.zeros(n_rows, dtype=int)
    active = np.arange(n_rows)
    previous = None
    for level in range(max_levels + 1):
        nodes = level_nodes(level, lo, hi)
        terms = log_integrand(nodes, active) + nodes.log_scale
        current = logsumexp(terms, axis=-1) - level * math.log(2.0)
        values[active] = current
        levels[active] = level
        if previous is not None:
            delta = np.abs(np.expm1(current - previous))
            errors[active] = delta
            done = (delta <= rel_tol) & (level >= MIN_LEVEL)
            if np.all(done):
                active = active[:0]
                break
            active = active[~done]
            current = current[~done]
        previous = current
    converged = np.isfinite(values) & (errors <= rel_tol) & truncated
    logger.debug(
        f"tanh-sinh window [-{lo:.2f}, {hi:.2f}], levels up to {levels.max(initial=0)}, "
        f"{int(np.sum(~converged))} of {n_rows} unconverged"
    )
    return values, errors, converged, levels


def integrate(log_integrand: Callable[[Nodes], np.ndarray], rel_tol: float, abs_tol: float, max_levels: int) -> IntegralResult:
    """Scalar front end of :func:`integrate_batch`."""

    def batch(nodes, rows):
        return np.atleast_2d(log_integrand(nodes))

    values, errors, converged, levels = integrate_batch(batch, 1, [0], rel_tol, abs_tol, max_levels)
    return IntegralResult(float(values[0]), float(errors[0]), bool(converged[0]), int(levels[0]))
