"""Sufficient conditions for minimaxity of the generalized Bayes estimator.

Every checker evaluates the same certifying inequality

    3p/2 + a - (p + 2a + 2 + 2 max H2) / b + min{0, p/2 + a + 2 + H1(1)} >= 0

under -p/2 <= a < p/2 - 2, either from analytic H1/H2 (monotone H) or from a
grid. The corollaries only differ in how H1/H2 are obtained and which
side conditions are checked, so their margins are directly comparable.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from shrinkprior.modules.prior import (
    H_GRID_POINTS,
    Constant,
    HyperIB,
    LogAdjusted,
    Monotone,
    PriorSpec,
    H1_H2_grid,
)
from shrinkprior.util import logger
from shrinkprior.util.errors import CorollaryInapplicableError, DomainError, RelaxedSpecError

# margins this far below zero are reported as sitting on the boundary
BOUNDARY_BAND = 1e-9
# ties are judged relative to the rounding of the terms that cancel
TIE_ULPS = 64


class Verdict(str, Enum):
    PROVEN = "ProvenMinimax"
    NOT_PROVEN = "NotProvenByTheseConditions"


class Rule(str, Enum):
    THM1 = "Thm1"
    COR1_1 = "Cor1_1"
    COR1_2 = "Cor1_2"
    COR2_1 = "Cor2_1"
    COR2_2 = "Cor2_2"
    COR3_1 = "Cor3_1"
    COR3_2 = "Cor3_2"


@dataclass(frozen=True)
class MinimaxReport:
    verdict: Verdict
    rule: Rule
    margin: float
    b_threshold: float
    details: str
    spec: Optional[PriorSpec] = field(default=None, compare=False)

    @property
    def proven(self) -> bool:
        return self.verdict is Verdict.PROVEN

    def to_dict(self) -> Dict[str, Any]:
        document = {
            "verdict": self.verdict.value,
            "rule": self.rule.value,
            "margin": self.margin,
            "b_threshold": self.b_threshold,
            "details": self.details,
        }
        if self.spec is not None:
            document["prior"] = self.spec.to_dict()
        return document


def _require_compliant(spec: PriorSpec):
    if spec.relaxed:
        raise RelaxedSpecError(
            f"minimaxity conditions need a < 1 and 0 < b < 1, got a={spec.a}, b={spec.b}"
        )


def _a_in_range(spec: PriorSpec) -> bool:
    return -spec.p / 2.0 <= spec.a < spec.p / 2.0 - 2.0


def _evaluate(spec: PriorSpec, rule: Rule, max_h2: float, h1_at_one: float, side_ok: bool = True, note: str = ""):
    p, a, b = spec.p, spec.a, spec.b
    base = 1.5 * p + a
    clipped = min(0.0, p / 2.0 + a + 2.0 + h1_at_one)
    numerator = p + 2.0 * a + 2.0 + 2.0 * max_h2
    denominator = base + clipped
    margin = base - numerator / b + clipped
    threshold = numerator / denominator if denominator > 0 else math.inf

    tolerance = TIE_ULPS * np.finfo(float).eps * max(abs(base), abs(numerator / b), abs(clipped), 1.0)
    notes = [note] if note else []
    if abs(margin) <= tolerance:
        margin = 0.0
        notes.append("margin is zero up to rounding")
    satisfied = margin >= 0
    if not satisfied and margin >= -BOUNDARY_BAND:
        notes.append("numerically-at-boundary")

    in_range = _a_in_range(spec)
    if not in_range:
        notes.append(f"a={a} is outside [-p/2, p/2 - 2) = [{-p / 2.0}, {p / 2.0 - 2.0})")
    if not side_ok:
        notes.append("side condition on H(1) fails")

    proven = satisfied and in_range and side_ok
    details = f"b threshold {threshold:.6g}, b={b:.6g}"
    if notes:
        details += "; " + "; ".join(notes)
    logger.debug(f"{rule.value}: margin={margin:.6g} threshold={threshold:.6g} proven={proven}")
    return MinimaxReport(Verdict.PROVEN if proven else Verdict.NOT_PROVEN, rule, margin, threshold, details, spec)


def H_extrema(h, grid: bool = False):
    """(max H2 over [0, 1], H1(1)); analytic for monotone H unless ``grid`` is set."""
    direction = None if grid else h.monotonicity()
    if direction is None:
        return _grid_extrema(h)
    h_one = float(h.big_H(np.asarray(1.0)))
    if direction is Monotone.NON_INCREASING:
        return 0.0, min(h_one, 0.0)
    return max(h_one, 0.0), 0.0


def _grid_extrema(h):
    """Running-infimum grid values, refined near the argmax of H2."""
    grid = np.linspace(0.0, 1.0, H_GRID_POINTS)
    h1, h2 = H1_H2_grid(h, grid)
    i = int(np.argmax(h2))
    left = max(i - 1, 0)
    lo, hi = grid[left], grid[min(i + 1, len(grid) - 1)]
    # inside one grid cell H1 stays at its left-edge value unless H itself dips below it
    floor = h1[left]
    refined = minimize_scalar(
        lambda k: -(float(h.big_H(np.asarray(k))) - floor),
        bounds=(lo, hi),
        method="bounded",
        options={"maxiter": 50, "xatol": 1e-12},
    )
    max_h2 = max(float(h2[i]), -float(refined.fun))
    return max(max_h2, 0.0), float(h1[-1])


def check_theorem1(spec: PriorSpec) -> MinimaxReport:
    _require_compliant(spec)
    h = spec.h
    h_one = float(h.big_H(np.asarray(1.0)))
    direction = h.monotonicity()
    max_h2, h1_one = H_extrema(h)
    if direction is Monotone.NON_INCREASING:
        rule = Rule.COR1_1 if h_one >= -(spec.p / 2.0 + spec.a + 2.0) else Rule.THM1
        return _evaluate(spec, rule, max_h2, h1_one, note="H non-increasing")
    if direction is Monotone.NON_DECREASING:
        rule = Rule.COR1_2 if h_one < (spec.p / 2.0 - spec.a - 2.0) / 2.0 else Rule.THM1
        return _evaluate(spec, rule, max_h2, h1_one, note="H non-decreasing")
    return _evaluate(spec, Rule.THM1, max_h2, h1_one, note=f"H1/H2 from a {H_GRID_POINTS}-point grid")


def _grid_direction(h) -> Optional[Monotone]:
    values = h.big_H(np.linspace(0.0, 1.0, H_GRID_POINTS))
    steps = np.diff(values)
    if np.all(steps <= 0):
        return Monotone.NON_INCREASING
    if np.all(steps >= 0):
        return Monotone.NON_DECREASING
    return None


def _corollary(spec: PriorSpec, direction: Monotone, part1: Rule, part2: Rule, note: str = "") -> MinimaxReport:
    p, a = spec.p, spec.a
    h_one = float(spec.h.big_H(np.asarray(1.0)))
    if direction is Monotone.NON_INCREASING:
        side_ok = h_one >= -(p / 2.0 + a + 2.0)
        return _evaluate(spec, part1, 0.0, min(h_one, 0.0), side_ok, note)
    side_ok = h_one < (p / 2.0 - a - 2.0) / 2.0
    return _evaluate(spec, part2, max(h_one, 0.0), 0.0, side_ok, note)


def check_corollary1(spec: PriorSpec) -> MinimaxReport:
    _require_compliant(spec)
    direction = spec.h.monotonicity() or _grid_direction(spec.h)
    if direction is None:
        raise CorollaryInapplicableError(f"H is not monotone on [0, 1] for {spec.h}")
    return _corollary(spec, direction, Rule.COR1_1, Rule.COR1_2)


def check_log_adjusted(spec: PriorSpec) -> MinimaxReport:
    _require_compliant(spec)
    h = spec.h
    if not isinstance(h, LogAdjusted):
        raise CorollaryInapplicableError(f"log-adjusted corollary needs a log_adjusted h, got {h.kind}")
    if h.c2 == 0:
        return check_corollary1(spec)
    p, a = spec.p, spec.a
    if h.c2 > 0:
        upper = (p / 2.0 + a + 2.0) / h.c1
        note = f"needs 0 < c2 <= {upper:.6g}"
        return _corollary(spec, Monotone.NON_INCREASING, Rule.COR2_1, Rule.COR2_2, note)
    lower = -(p / 2.0 - a - 2.0) / (2.0 * h.c1)
    note = f"needs {lower:.6g} < c2 < 0"
    return _corollary(spec, Monotone.NON_DECREASING, Rule.COR2_1, Rule.COR2_2, note)


def check_hyper_ib(spec: PriorSpec) -> MinimaxReport:
    _require_compliant(spec)
    h = spec.h
    if not isinstance(h, HyperIB):
        raise CorollaryInapplicableError(f"hyper-inverted-beta corollary needs a hyper_ib h, got {h.kind}")
    direction = h.monotonicity()
    if direction is None:
        logger.debug(f"{h} is outside both monotone regimes; falling back to the grid evaluation")
        return check_theorem1(spec)
    return _corollary(spec, direction, Rule.COR3_1, Rule.COR3_2)


def certify(spec: PriorSpec) -> MinimaxReport:
    """Family-specific corollary first, the general inequality if that does not prove it."""
    _require_compliant(spec)
    if isinstance(spec.h, LogAdjusted):
        report = check_log_adjusted(spec)
    elif isinstance(spec.h, HyperIB):
        report = check_hyper_ib(spec)
    else:
        report = check_corollary1(spec)
    if report.proven:
        return report
    general = check_theorem1(spec)
    return general if general.proven else report


def a_star(p: int) -> float:
    """Smallest a = b meeting the constant-h threshold; the fixed point of a = (p+2a+2)/(3p/2+a)."""
    if p < 7:
        raise DomainError(f"a* lies in (0, 1) only for p >= 7 (a*(6) = 1 already violates b < 1), got p={p}")
    # rationalised form of (-3p + 4 + sqrt(9p^2 - 8p + 48)) / 4, free of cancellation
    return 4.0 * (p + 2.0) / (math.sqrt(9.0 * p * p - 8.0 * p + 48.0) + 3.0 * p - 4.0)


def _prior1(p):
    a = a_star(p)
    return PriorSpec(p, a, a, Constant())


def _prior2(p):
    if p < 5:
        raise DomainError(f"the log-adjusted boundary prior is minimax only for p >= 5, got p={p}")
    return PriorSpec(p, 0.0, (5.0 * p + 4.0) / (6.0 * p), LogAdjusted(c1=(p - 4.0) / 16.0, c2=-2.0))


def _baseline(p, h):
    if p < 3:
        raise DomainError(f"baseline priors need p >= 3, got p={p}")
    return PriorSpec(p, 0.5, 0.5, h)


NAMED_PRIORS = {
    "prior1": _prior1,
    "prior2": _prior2,
    "halfcauchy": lambda p: _baseline(p, Constant()),
    "polsonscott": lambda p: _baseline(p, HyperIB(c3=1.0, c4=-1.0, d=0.0)),
}


def canonical_name(name: str) -> str:
    return name.lower().replace("_", "").replace("-", "")


def named_prior(name: str, p: int) -> PriorSpec:
    key = canonical_name(name)
    if key not in NAMED_PRIORS:
        raise DomainError(f"unknown named prior {name!r}; expected one of prior1, prior2, half_cauchy, polson_scott")
    return NAMED_PRIORS[key](p)
