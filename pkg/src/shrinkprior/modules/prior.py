"""U-shaped priors on the shrinkage coefficient kappa.

pi(kappa) = kappa^(a-1) (1-kappa)^(b-1) h(kappa), unnormalised, with h one of
three slowly varying families. H(kappa) = kappa h'(kappa) / h(kappa) and its
running-infimum split H = H1 + H2 drive the minimaxity conditions.
"""
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from shrinkprior.modules import tanh_sinh
from shrinkprior.modules.tanh_sinh import IntegralResult
from shrinkprior.util.errors import DomainError, ValidationError

ArrayLike = Union[float, np.ndarray]

# uniform grid used whenever H has to be handled numerically
H_GRID_POINTS = 10_001
KAPPA_FLOOR = 1e-300
KAPPA_CEIL = 1.0 - 1e-16


class Monotone(str, Enum):
    NON_INCREASING = "non-increasing"
    NON_DECREASING = "non-decreasing"


class Propriety(str, Enum):
    PROPER = "proper"
    PROPER_BOUNDARY = "proper_boundary"
    IMPROPER = "improper"


def _check_open_unit(kappa: ArrayLike, name: str = "kappa") -> np.ndarray:
    values = np.asarray(kappa, dtype=float)
    if not np.all((values > 0.0) & (values < 1.0)):
        raise DomainError(f"{name} must lie in the open interval (0, 1), got {kappa}")
    return values


def _check_closed_unit(kappa: ArrayLike) -> np.ndarray:
    values = np.asarray(kappa, dtype=float)
    if not np.all((values >= 0.0) & (values <= 1.0)):
        raise DomainError(f"kappa must lie in [0, 1], got {kappa}")
    return values


def _logs(kappa: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    clamped = np.clip(kappa, KAPPA_FLOOR, KAPPA_CEIL)
    return np.log(clamped), np.log1p(-clamped)


class HFamily:
    """Slowly varying factor h(kappa). Subclasses are frozen dataclasses."""

    kind = ""

    def log_h_from_logs(self, log_kappa: np.ndarray, log_1m_kappa: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def big_H(self, kappa: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def monotonicity(self) -> Optional[Monotone]:
        """Analytic direction of H on [0, 1], or None when not covered."""
        raise NotImplementedError

    def limit_ratio(self) -> float:
        """liminf of h'(kappa) / h(kappa) as kappa -> 0."""
        raise NotImplementedError

    def boundary_integrable(self) -> bool:
        """Whether the integral of h(kappa) / kappa over (0, 1) is finite."""
        raise NotImplementedError

    def parameters(self) -> Dict[str, float]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, **self.parameters()}


@dataclass(frozen=True)
class Constant(HFamily):
    kind = "constant"

    def log_h_from_logs(self, log_kappa, log_1m_kappa):
        return np.zeros_like(np.asarray(log_kappa, dtype=float))

    def big_H(self, kappa):
        return np.zeros_like(np.asarray(kappa, dtype=float))

    def monotonicity(self):
        return Monotone.NON_INCREASING

    def limit_ratio(self):
        return 0.0

    def boundary_integrable(self):
        return False


@dataclass(frozen=True)
class LogAdjusted(HFamily):
    """h(kappa) = {1 + c1 log(1/kappa)}^c2 with c1 > 0."""

    c1: float = 1.0
    c2: float = 0.0
    kind = "log_adjusted"

    def __post_init__(self):
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)) or self.c1 <= 0:
            raise ValidationError(f"log_adjusted requires finite c2 and c1 > 0, got c1={self.c1}, c2={self.c2}")

    def log_h_from_logs(self, log_kappa, log_1m_kappa):
        return self.c2 * np.log1p(-self.c1 * np.asarray(log_kappa, dtype=float))

    def big_H(self, kappa):
        kappa = np.asarray(kappa, dtype=float)
        with np.errstate(divide="ignore"):
            log_inv = -np.log(kappa)
        return np.where(kappa > 0, -self.c2 * self.c1 / (1.0 + self.c1 * log_inv), 0.0)

    def monotonicity(self):
        # H increases from 0 when c2 < 0 and decreases from 0 when c2 > 0
        return Monotone.NON_DECREASING if self.c2 < 0 else Monotone.NON_INCREASING

    def limit_ratio(self):
        if self.c2 == 0:
            return 0.0
        return math.inf if self.c2 < 0 else -math.inf

    def boundary_integrable(self):
        return self.c2 < -1

    def parameters(self):
        return {"c1": self.c1, "c2": self.c2}


@dataclass(frozen=True)
class HyperIB(HFamily):
    """h(kappa) = (1 + c3 kappa)^c4 exp(d kappa) with c3 > 0."""

    c3: float = 1.0
    c4: float = 0.0
    d: float = 0.0
    kind = "hyper_ib"

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.c3, self.c4, self.d)) or self.c3 <= 0:
            raise ValidationError(f"hyper_ib requires finite c4, d and c3 > 0, got c3={self.c3}")

    def log_h_from_logs(self, log_kappa, log_1m_kappa):
        kappa = np.exp(np.asarray(log_kappa, dtype=float))
        return self.c4 * np.log1p(self.c3 * kappa) + self.d * kappa

    def big_H(self, kappa):
        kappa = np.asarray(kappa, dtype=float)
        return self.d * kappa + self.c4 * self.c3 * kappa / (1.0 + self.c3 * kappa)

    def monotonicity(self):
        c3, c4, d = self.c3, self.c4, self.d
        if (d >= 0 and c4 <= -((c3 + 1) ** 2) * d / c3) or (d < 0 and c4 <= -d / c3):
            return Monotone.NON_INCREASING
        if (d >= 0 and c4 >= -d / c3) or (d < 0 and c4 > -((c3 + 1) ** 2) * d / c3):
            return Monotone.NON_DECREASING
        return None

    def limit_ratio(self):
        return self.d + self.c3 * self.c4

    def boundary_integrable(self):
        # h(0) = 1, so h(kappa) / kappa behaves like 1 / kappa
        return False

    def parameters(self):
        return {"c3": self.c3, "c4": self.c4, "d": self.d}


H_FAMILIES = {cls.kind: cls for cls in (Constant, LogAdjusted, HyperIB)}


def h_from_dict(document: Dict[str, Any]) -> HFamily:
    if not isinstance(document, dict) or "kind" not in document:
        raise ValidationError(f"h must be an object with a 'kind' field, got {document!r}")
    kind = document["kind"]
    if kind not in H_FAMILIES:
        raise ValidationError(f"unknown h kind {kind!r}; expected one of {sorted(H_FAMILIES)}")
    cls = H_FAMILIES[kind]
    expected = set(cls.__dataclass_fields__)
    given = set(document) - {"kind"}
    missing = expected - given
    if missing and kind != "constant":
        raise ValidationError(f"h kind {kind!r} is missing {sorted(missing)}")
    unknown = given - expected
    if unknown:
        raise ValidationError(f"h kind {kind!r} does not take {sorted(unknown)}")
    try:
        return cls(**{name: float(document[name]) for name in given})
    except (TypeError, ValueError) as e:
        raise ValidationError(f"invalid parameters for h kind {kind!r}: {e}") from e


def _dimension(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"p must be an integer, got {value!r}")
    if isinstance(value, float) and not (math.isfinite(value) and value.is_integer()):
        raise ValidationError(f"p must be an integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class PriorSpec:
    p: int
    a: float
    b: float
    h: HFamily = field(default_factory=Constant)

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, (int, np.integer)) or self.p < 1:
            raise ValidationError(f"p must be a positive integer, got {self.p!r}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValidationError(f"a and b must be finite, got a={self.a}, b={self.b}")
        if not isinstance(self.h, HFamily):
            raise ValidationError(f"h must be an HFamily, got {self.h!r}")

    @property
    def compliant(self) -> bool:
        """a < 1 and 0 < b < 1; anything else is a relaxed-mode spec."""
        return self.a < 1 and 0 < self.b < 1

    @property
    def relaxed(self) -> bool:
        return not self.compliant

    def to_dict(self) -> Dict[str, Any]:
        return {"p": int(self.p), "a": self.a, "b": self.b, "h": self.h.to_dict()}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, document: Dict[str, Any], p: Optional[int] = None) -> "PriorSpec":
        if not isinstance(document, dict):
            raise ValidationError(f"prior spec must be a JSON object, got {type(document).__name__}")
        unknown = set(document) - {"p", "a", "b", "h"}
        if unknown:
            raise ValidationError(f"unknown prior spec fields {sorted(unknown)}")
        dimension = p
        if "p" in document:
            dimension = _dimension(document["p"])
            if p is not None and dimension != p:
                raise ValidationError(f"prior spec has p={dimension} but p={p} was requested")
        if dimension is None:
            raise ValidationError("prior spec does not carry p and none was supplied")
        for name in ("a", "b"):
            if name not in document:
                raise ValidationError(f"prior spec is missing {name!r}")
        try:
            a, b = float(document["a"]), float(document["b"])
        except (TypeError, ValueError) as e:
            raise ValidationError(f"a and b must be numbers: {e}") from e
        h = h_from_dict(document.get("h", {"kind": "constant"}))
        return cls(p=dimension, a=a, b=b, h=h)

    @classmethod
    def from_json(cls, text: str, p: Optional[int] = None) -> "PriorSpec":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"prior spec is not valid JSON: {e}") from e
        return cls.from_dict(document, p=p)


@dataclass(frozen=True)
class ProprietyReport:
    prior_proper: Propriety
    marginal_finite: Propriety
    reason: str


def log_h(h: HFamily, kappa: ArrayLike) -> np.ndarray:
    values = _check_open_unit(kappa)
    return h.log_h_from_logs(*_logs(values))


def log_prior_kappa(spec: PriorSpec, kappa: ArrayLike):
    """Unnormalised log pi(kappa); accepts scalars or arrays inside (0, 1)."""
    values = _check_open_unit(kappa)
    log_k, log_1mk = _logs(values)
    result = (spec.a - 1.0) * log_k + (spec.b - 1.0) * log_1mk + spec.h.log_h_from_logs(log_k, log_1mk)
    return float(result) if np.ndim(result) == 0 else result


def h_logratio(h: HFamily, kappa_new: float, kappa_old: float) -> float:
    """log h(kappa_new) - log h(kappa_old) without forming h itself."""
    new = _check_open_unit(kappa_new, "kappa_new")
    old = _check_open_unit(kappa_old, "kappa_old")
    if isinstance(h, Constant):
        return 0.0
    if isinstance(h, HyperIB):
        # keeps the exponential part exact for large |d|
        return float(h.c4 * (np.log1p(h.c3 * new) - np.log1p(h.c3 * old)) + h.d * (new - old))
    return float(h.log_h_from_logs(*_logs(new)) - h.log_h_from_logs(*_logs(old)))


def big_H(h: HFamily, kappa: ArrayLike):
    values = _check_closed_unit(kappa)
    result = h.big_H(values)
    return float(result) if np.ndim(result) == 0 else result


def h_limit_ratio(h: HFamily) -> float:
    return float(h.limit_ratio())


def h_monotonicity(h: HFamily) -> Optional[Monotone]:
    return h.monotonicity()


def H1_H2_grid(h: HFamily, kappa: ArrayLike, points: int = H_GRID_POINTS):
    """Running infimum of H on a uniform grid, refined by the query point itself."""
    values = _check_closed_unit(kappa)
    grid = np.linspace(0.0, 1.0, points)
    running = np.minimum.accumulate(np.minimum(h.big_H(grid), 0.0))
    index = np.searchsorted(grid, values, side="right") - 1
    here = h.big_H(values)
    h1 = np.minimum(running[index], here)
    h1 = np.minimum(h1, 0.0)
    h2 = here - h1
    if np.ndim(values) == 0:
        return float(h1), float(h2)
    return h1, h2


def H1_H2(h: HFamily, kappa: ArrayLike):
    """(H1, H2) with H1 the running infimum of H (clipped at H(0) = 0) and H2 = H - H1."""
    direction = h.monotonicity()
    if direction is None:
        return H1_H2_grid(h, kappa)
    values = _check_closed_unit(kappa)
    here = h.big_H(values)
    zero = np.zeros_like(here)
    if direction is Monotone.NON_INCREASING:
        h1, h2 = here, zero
    else:
        h1, h2 = zero, here
    if np.ndim(values) == 0:
        return float(h1), float(h2)
    return h1, h2


def classify_propriety(spec: PriorSpec) -> ProprietyReport:
    """Lemma-1 style classification of the prior and of the marginal of y."""
    a, half_p = spec.a, spec.p / 2.0
    integrable = spec.h.boundary_integrable()

    if a > 0:
        prior, prior_reason = Propriety.PROPER, "a > 0"
    elif a == 0 and integrable:
        prior, prior_reason = Propriety.PROPER_BOUNDARY, "a = 0 and the integral of h(kappa)/kappa is finite"
    elif a == 0:
        prior, prior_reason = Propriety.IMPROPER, "a = 0 but the integral of h(kappa)/kappa diverges"
    else:
        prior, prior_reason = Propriety.IMPROPER, "a < 0"

    if a > -half_p:
        marginal, marginal_reason = Propriety.PROPER, "a > -p/2"
    elif a == -half_p and integrable:
        marginal, marginal_reason = Propriety.PROPER_BOUNDARY, "a = -p/2 and the integral of h(kappa)/kappa is finite"
    elif a == -half_p:
        marginal, marginal_reason = Propriety.IMPROPER, "a = -p/2 but the integral of h(kappa)/kappa diverges"
    else:
        marginal, marginal_reason = Propriety.IMPROPER, "a < -p/2"

    if spec.b <= 0:
        prior, marginal = Propriety.IMPROPER, Propriety.IMPROPER
        prior_reason = marginal_reason = "b <= 0 makes (1 - kappa)^(b - 1) non-integrable at 1"

    return ProprietyReport(prior, marginal, f"prior: {prior_reason}; marginal: {marginal_reason}")


def log_prior_beta(spec: PriorSpec, beta, rel_tol: float = 1e-10, max_levels: int = 12) -> IntegralResult:
    """log pi(beta) as the kappa-mixture of normals; divergence is flagged, not raised."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (spec.p,):
        raise DomainError(f"beta must have length p={spec.p}, got shape {beta.shape}")
    norm_sq = float(beta @ beta)
    half_p = spec.p / 2.0

    near_zero_ok = spec.a > -half_p or (spec.a == -half_p and spec.h.boundary_integrable())
    # for beta != 0 the exp(-|beta|^2 kappa / 2(1 - kappa)) factor beats any power of 1 - kappa
    near_one_ok = norm_sq > 0 or spec.b > half_p
    if not (near_zero_ok and near_one_ok):
        return IntegralResult(math.inf, math.inf, False, divergent=True)

    log_const = -half_p * math.log(2.0 * math.pi)

    def log_integrand(nodes):
        odds = np.exp(nodes.log_kappa - nodes.log_1m_kappa) if norm_sq > 0 else 0.0
        return (
            log_const
            + (half_p + spec.a) * nodes.log_kappa
            + (spec.b - half_p) * nodes.log_1m_kappa
            - 0.5 * norm_sq * odds
            + spec.h.log_h_from_logs(nodes.log_kappa, nodes.log_1m_kappa)
        )

    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        return tanh_sinh.integrate(log_integrand, rel_tol, 1e-300, max_levels)
