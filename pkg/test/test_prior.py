import math

import numpy as np
import pytest
from scipy.integrate import quad, trapezoid
from scipy.stats import ortho_group

from conftest import load_table
from shrinkprior.modules.prior import (
    Constant,
    HyperIB,
    LogAdjusted,
    Monotone,
    PriorSpec,
    Propriety,
    big_H,
    classify_propriety,
    h_limit_ratio,
    h_logratio,
    h_monotonicity,
    H1_H2,
    H1_H2_grid,
    log_h,
    log_prior_beta,
    log_prior_kappa,
)
from shrinkprior.util import logger
from shrinkprior.util.errors import DomainError, ValidationError

FAMILIES = [
    Constant(),
    LogAdjusted(c1=0.375, c2=-2.0),
    LogAdjusted(c1=1.0, c2=1.0),
    HyperIB(c3=1.0, c4=-1.0, d=0.0),
    HyperIB(c3=1.0, c4=2.0, d=0.0),
    HyperIB(c3=1.0, c4=1.5, d=-1.0),
]


def test_log_prior_kappa_at_half(prior1, prior2):
    assert log_prior_kappa(prior1, 0.5) == pytest.approx(0.1865, abs=5e-4)
    assert log_prior_kappa(prior2, 0.5) == pytest.approx(0.3003, abs=5e-4)


def test_log_prior_kappa_reference_table(prior1, prior2):
    header, rows = load_table("log_prior_p10.csv")
    assert header == ["kappa", "prior1", "prior2"]
    kappa = rows[:, 0]
    np.testing.assert_allclose(log_prior_kappa(prior1, kappa), rows[:, 1], atol=5e-4)
    np.testing.assert_allclose(log_prior_kappa(prior2, kappa), rows[:, 2], atol=5e-4)


def test_flat_prior_is_zero():
    spec = PriorSpec(10, 1.0, 1.0)
    np.testing.assert_array_equal(log_prior_kappa(spec, np.array([0.1, 0.5, 0.9])), 0.0)


@pytest.mark.parametrize("kappa", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_log_prior_kappa_outside_open_interval(prior1, kappa):
    with pytest.raises(DomainError):
        log_prior_kappa(prior1, kappa)


@pytest.mark.parametrize("name", ["prior1", "prior2", "half_cauchy"])
def test_u_shape(request, name):
    spec = request.getfixturevalue(name)
    exponents = np.arange(2, 13)
    towards_zero = log_prior_kappa(spec, 10.0 ** -exponents)
    towards_one = log_prior_kappa(spec, 1.0 - 10.0 ** -exponents)
    assert np.all(np.diff(towards_zero) > 0)
    assert np.all(np.diff(towards_one) > 0)
    middle = log_prior_kappa(spec, 0.5)
    assert towards_zero[0] > middle - 1.0 and towards_zero[-1] > middle
    assert towards_one[-1] > middle


def test_prior1_is_symmetric(prior1):
    kappa = np.linspace(0.01, 0.49, 49)
    np.testing.assert_allclose(log_prior_kappa(prior1, kappa), log_prior_kappa(prior1, 1.0 - kappa), atol=1e-12)


def test_h_logratio():
    assert h_logratio(Constant(), 0.3, 0.8) == 0.0
    assert h_logratio(LogAdjusted(1.0, 1.0), 0.4, 0.4) == 0.0
    assert h_logratio(HyperIB(c3=1.0, c4=0.0, d=2.0), 0.75, 0.25) == pytest.approx(1.0, abs=1e-12)
    h = LogAdjusted(0.375, -2.0)
    expected = -2.0 * (math.log(1 + 0.375 * math.log(1 / 0.2)) - math.log(1 + 0.375 * math.log(1 / 0.7)))
    assert h_logratio(h, 0.2, 0.7) == pytest.approx(expected, rel=1e-12)


def test_h_logratio_large_exponential_part():
    h = HyperIB(c3=1.0, c4=1.0, d=2000.0)
    expected = math.log1p(0.75) - math.log1p(0.25) + 1000.0
    assert h_logratio(h, 0.75, 0.25) == pytest.approx(expected, rel=1e-14)


def test_h_logratio_domain():
    with pytest.raises(DomainError):
        h_logratio(Constant(), 0.0, 0.5)


def test_h_limit_ratio():
    assert h_limit_ratio(Constant()) == 0.0
    assert h_limit_ratio(LogAdjusted(0.375, -2.0)) == math.inf
    assert h_limit_ratio(LogAdjusted(1.0, 1.0)) == -math.inf
    assert h_limit_ratio(LogAdjusted(1.0, 0.0)) == 0.0
    assert h_limit_ratio(HyperIB(c3=1.0, c4=-1.0, d=0.0)) == -1.0
    assert h_limit_ratio(HyperIB(c3=2.0, c4=0.5, d=0.25)) == pytest.approx(1.25)


def test_h_monotonicity():
    assert h_monotonicity(Constant()) is Monotone.NON_INCREASING
    assert h_monotonicity(LogAdjusted(0.375, -2.0)) is Monotone.NON_DECREASING
    assert h_monotonicity(LogAdjusted(1.0, 1.0)) is Monotone.NON_INCREASING
    assert h_monotonicity(HyperIB(c3=1.0, c4=-1.0, d=0.0)) is Monotone.NON_INCREASING
    assert h_monotonicity(HyperIB(c3=1.0, c4=0.5, d=0.0)) is Monotone.NON_DECREASING
    # H dips below zero and comes back up
    assert h_monotonicity(HyperIB(c3=1.0, c4=1.5, d=-1.0)) is None


@pytest.mark.parametrize("h", FAMILIES)
def test_h_monotonicity_matches_grid(h):
    direction = h_monotonicity(h)
    steps = np.diff(big_H(h, np.linspace(0.0, 1.0, 1001)))
    if direction is Monotone.NON_INCREASING:
        assert np.all(steps <= 1e-12)
    elif direction is Monotone.NON_DECREASING:
        assert np.all(steps >= -1e-12)


def test_big_H_values():
    assert big_H(Constant(), 0.3) == 0.0
    assert big_H(LogAdjusted(0.375, -2.0), 1.0) == pytest.approx(0.75)
    assert big_H(HyperIB(c3=1.0, c4=2.0, d=0.0), 1.0) == pytest.approx(1.0)
    for h in FAMILIES:
        assert big_H(h, 0.0) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_big_H_matches_log_derivative(seed):
    rng = np.random.default_rng(seed)
    families = [
        LogAdjusted(c1=rng.uniform(0.1, 2.0), c2=rng.uniform(-3.0, 3.0)),
        HyperIB(c3=rng.uniform(0.1, 3.0), c4=rng.uniform(-3.0, 3.0), d=rng.uniform(-2.0, 2.0)),
    ]
    kappa = np.linspace(0.001, 0.999, 1000)
    step = 1e-5
    for h in families:
        # kappa h'/h is the derivative of log h with respect to log kappa
        difference = (log_h(h, kappa * math.exp(step)) - log_h(h, kappa * math.exp(-step))) / (2 * step)
        np.testing.assert_allclose(big_H(h, kappa), difference, rtol=1e-6, atol=1e-8)


def test_H1_H2_examples():
    assert H1_H2(Constant(), 0.7) == (0.0, 0.0)
    h1, h2 = H1_H2(LogAdjusted(0.375, -2.0), 1.0)
    assert h1 == 0.0 and h2 == pytest.approx(0.75)
    h1, h2 = H1_H2(LogAdjusted(1.0, 1.0), 1.0)
    assert h1 == pytest.approx(-1.0) and h2 == 0.0


@pytest.mark.parametrize("h", FAMILIES, ids=repr)
def test_H1_H2_decomposition(h):
    kappa = np.linspace(0.0, 1.0, 501)
    h1, h2 = H1_H2(h, kappa)
    assert np.all(h1 <= 0)
    assert np.all(np.diff(h1) <= 1e-15)
    assert np.all(h2 >= -1e-15)
    np.testing.assert_allclose(h1 + h2, big_H(h, kappa), atol=1e-12)
    assert h1[0] == 0.0 and h2[0] == 0.0


def test_non_monotone_H_has_negative_infimum():
    h = HyperIB(c3=1.0, c4=1.5, d=-1.0)
    assert h.monotonicity() is None
    h1, h2 = H1_H2(h, np.linspace(0.0, 1.0, 101))
    assert h1[-1] == pytest.approx(-0.25)
    assert np.max(h2) > 0


@pytest.mark.parametrize("h", [f for f in FAMILIES if f.monotonicity() is not None], ids=repr)
def test_grid_and_analytic_H1_H2_agree(h):
    kappa = np.linspace(0.0, 1.0, 333)
    analytic = H1_H2(h, kappa)
    grid = H1_H2_grid(h, kappa)
    np.testing.assert_allclose(grid[0], analytic[0], atol=1e-12)
    np.testing.assert_allclose(grid[1], analytic[1], atol=1e-12)


def test_classify_propriety_examples(half_cauchy, prior2):
    report = classify_propriety(half_cauchy)
    assert (report.prior_proper, report.marginal_finite) == (Propriety.PROPER, Propriety.PROPER)
    report = classify_propriety(prior2)
    assert (report.prior_proper, report.marginal_finite) == (Propriety.PROPER_BOUNDARY, Propriety.PROPER)
    report = classify_propriety(PriorSpec(10, -0.5, 0.5))
    assert (report.prior_proper, report.marginal_finite) == (Propriety.IMPROPER, Propriety.PROPER)
    assert classify_propriety(PriorSpec(10, 0.0, 0.5)).prior_proper is Propriety.IMPROPER
    boundary = PriorSpec(10, -5.0, 0.5, LogAdjusted(1.0, -2.0))
    assert classify_propriety(boundary).marginal_finite is Propriety.PROPER_BOUNDARY
    assert classify_propriety(PriorSpec(10, -5.0, 0.5)).marginal_finite is Propriety.IMPROPER
    assert classify_propriety(PriorSpec(10, -6.0, 0.5)).marginal_finite is Propriety.IMPROPER


def _increments_near_zero(spec):
    """Mass of pi over the decades [1e-3, 1e-2] and [1e-12, 1e-11]."""

    def mass(lo, hi):
        u = np.linspace(math.log(lo), math.log(hi), 20001)
        kappa = np.exp(u)
        return trapezoid(np.exp(log_prior_kappa(spec, kappa)) * kappa, u)

    return mass(1e-3, 1e-2), mass(1e-12, 1e-11)


@pytest.mark.parametrize(
    "spec",
    [
        PriorSpec(10, 0.5, 0.5),
        PriorSpec(10, 0.0, 0.9, LogAdjusted(0.375, -2.0)),
        PriorSpec(10, 0.0, 0.5),
        PriorSpec(10, -0.5, 0.5),
        PriorSpec(10, 0.0, 0.5, LogAdjusted(1.0, -0.5)),
    ],
    ids=repr,
)
def test_classify_propriety_agrees_with_truncated_mass(spec):
    first, last = _increments_near_zero(spec)
    proper = classify_propriety(spec).prior_proper is not Propriety.IMPROPER
    logger.info(f"{spec}: decade masses {first:.4g} -> {last:.4g}")
    assert (last / first < 0.2) == proper


def test_prior_spec_json_round_trip(prior2):
    assert PriorSpec.from_json(prior2.to_json()) == prior2
    spec = PriorSpec(7, 0.25, 0.75, HyperIB(c3=2.0, c4=-1.0, d=0.5))
    assert PriorSpec.from_json(spec.to_json(indent=2)) == spec


def test_prior_spec_p_supplied_separately():
    spec = PriorSpec.from_json('{"a": 0.5, "b": 0.5, "h": {"kind": "constant"}}', p=10)
    assert spec.p == 10 and spec.h == Constant()
    assert PriorSpec.from_json('{"a": 0.5, "b": 0.5}', p=4).h == Constant()


@pytest.mark.parametrize(
    "text",
    [
        '{"a": 0.5, "b": 0.5, "h": {"kind": "polynomial"}}',
        '{"a": 0.5, "b": 0.5, "h": {"kind": "log_adjusted", "c2": -2}}',
        '{"a": 0.5, "b": 0.5, "h": {"kind": "constant", "c1": 1}}',
        '{"a": 0.5, "b": 0.5, "c": 1}',
        '{"p": 8, "a": 0.5, "b": 0.5}',
        '{"b": 0.5}',
        '{"a": "half", "b": 0.5}',
        '{"a": 0.5, "b": 0.5, "h": {"kind": "log_adjusted", "c1": 0, "c2": -2}}',
        "[0.5, 0.5]",
        "{not json",
    ],
)
def test_prior_spec_json_errors(text):
    with pytest.raises(ValidationError):
        PriorSpec.from_json(text, p=10)


def test_prior_spec_needs_p():
    with pytest.raises(ValidationError):
        PriorSpec.from_json('{"a": 0.5, "b": 0.5}')
    with pytest.raises(ValidationError):
        PriorSpec(0, 0.5, 0.5)


@pytest.mark.parametrize("p", ['"x"', "null", "true", "10.5", "[10]"])
def test_prior_spec_malformed_p(p):
    with pytest.raises(ValidationError):
        PriorSpec.from_json(f'{{"p": {p}, "a": 0.5, "b": 0.5}}')
    with pytest.raises(ValidationError):
        PriorSpec.from_json(f'{{"p": {p}, "a": 0.5, "b": 0.5}}', p=10)
    assert PriorSpec.from_json('{"p": 10.0, "a": 0.5, "b": 0.5}').p == 10


def test_relaxed_mode():
    assert PriorSpec(10, 1.0, 1.0).relaxed
    assert PriorSpec(10, 0.5, 0.0).relaxed
    assert PriorSpec(10, -3.0, 0.2).compliant


def test_family_validation():
    with pytest.raises(ValidationError):
        LogAdjusted(c1=0.0, c2=1.0)
    with pytest.raises(ValidationError):
        HyperIB(c3=-1.0, c4=0.0, d=0.0)


def test_log_prior_beta_symmetries(prior1, rng):
    beta = rng.normal(size=10)
    reference = log_prior_beta(prior1, beta).log_value
    assert log_prior_beta(prior1, -beta[::-1]).log_value == pytest.approx(reference, abs=1e-12)
    q = ortho_group.rvs(10, random_state=3)
    assert log_prior_beta(prior1, q @ beta).log_value == pytest.approx(reference, abs=1e-10)


def test_log_prior_beta_divergent_at_origin():
    spec = PriorSpec(2, 1.0, 1.0)
    result = log_prior_beta(spec, np.zeros(2))
    assert result.divergent and not result.finite
    # the horseshoe-type spike at the origin
    assert log_prior_beta(PriorSpec(10, 0.5, 0.5), np.zeros(10)).divergent
    assert log_prior_beta(PriorSpec(10, 0.5, 0.5), np.full(10, 0.1)).finite


def test_log_prior_beta_improper_in_b_is_finite_away_from_origin():
    spec = PriorSpec(10, 0.5, -0.5)
    assert log_prior_beta(spec, np.zeros(10)).divergent
    beta = np.zeros(10)
    beta[0] = 1.0
    result = log_prior_beta(spec, beta)
    assert result.finite and not result.divergent

    def density(kappa):
        normal = (kappa / (2 * math.pi * (1 - kappa))) ** 5 * math.exp(-kappa / (2 * (1 - kappa)))
        return normal * kappa**-0.5 * (1 - kappa) ** -1.5

    expected, _ = quad(density, 0.0, 1.0, epsabs=0.0, epsrel=1e-10, limit=200)
    assert result.log_value == pytest.approx(math.log(expected), abs=1e-7)


def test_log_prior_beta_matches_trapezoid(prior1):
    beta = np.zeros(10)
    beta[0] = 2.0
    kappa = np.linspace(1e-12, 1.0 - 1e-12, 1_000_001)
    a, b, p = prior1.a, prior1.b, prior1.p
    integrand = (
        (2 * np.pi) ** (-p / 2)
        * kappa ** (p / 2 + a - 1)
        * (1 - kappa) ** (b - 1 - p / 2)
        * np.exp(-0.5 * 4.0 * kappa / (1 - kappa))
    )
    oracle = trapezoid(integrand, kappa)
    result = log_prior_beta(prior1, beta)
    assert result.converged
    assert result.log_value == pytest.approx(math.log(oracle), abs=1e-6)


def test_log_prior_beta_shape(prior1):
    with pytest.raises(DomainError):
        log_prior_beta(prior1, np.ones(3))
