import json
import math

import numpy as np
import pytest

from shrinkprior.modules.minimax import (
    H_extrema,
    Rule,
    Verdict,
    a_star,
    certify,
    check_corollary1,
    check_hyper_ib,
    check_log_adjusted,
    check_theorem1,
    named_prior,
)
from shrinkprior.modules.prior import Constant, HyperIB, LogAdjusted, PriorSpec
from shrinkprior.util import logger
from shrinkprior.util.errors import CorollaryInapplicableError, DomainError, RelaxedSpecError


def test_a_star():
    # published constants are rounded to six digits
    assert a_star(10) == pytest.approx(0.865461, abs=5e-6)
    assert a_star(10) == pytest.approx((-26 + math.sqrt(868)) / 4, abs=1e-12)
    assert 10 + 2 * a_star(10) == pytest.approx(11.730922, abs=5e-6)
    assert a_star(7) == pytest.approx((-17 + math.sqrt(433)) / 4, abs=1e-12)
    with pytest.raises(DomainError):
        a_star(6)


@pytest.mark.parametrize("p", range(7, 51))
def test_a_star_is_fixed_point(p):
    a = a_star(p)
    assert 0 < a < 1
    assert abs(a * (1.5 * p + a) - (p + 2 * a + 2)) < 1e-10


def test_prior1_is_proven_on_the_boundary(prior1):
    report = check_theorem1(prior1)
    assert report.verdict is Verdict.PROVEN
    assert report.rule is Rule.COR1_1
    assert report.margin == 0.0
    assert report.b_threshold == pytest.approx(prior1.b, abs=1e-12)


def test_prior2_is_proven_on_the_boundary(prior2):
    report = check_theorem1(prior2)
    assert report.proven and report.rule is Rule.COR1_2
    assert report.margin == 0.0
    report = certify(prior2)
    assert report.rule is Rule.COR2_2 and report.proven
    assert report.b_threshold == pytest.approx(0.9, abs=1e-12)


@pytest.mark.parametrize("p", range(3, 31))
def test_half_cauchy_is_not_proven(p):
    report = certify(named_prior("half_cauchy", p))
    assert report.verdict is Verdict.NOT_PROVEN
    assert not check_theorem1(named_prior("half_cauchy", p)).proven


def test_polson_scott_is_not_proven():
    report = certify(named_prior("polson_scott", 10))
    assert report.verdict is Verdict.NOT_PROVEN
    assert report.rule is Rule.COR3_1


def test_corollary1_examples():
    report = check_corollary1(PriorSpec(10, 0.0, 0.85, Constant()))
    assert report.proven and report.rule is Rule.COR1_1
    assert report.b_threshold == pytest.approx(0.8)
    report = check_corollary1(PriorSpec(10, 0.0, 0.9, LogAdjusted(0.375, -2.0)))
    assert report.proven and report.rule is Rule.COR1_2
    assert report.b_threshold == pytest.approx(0.9)
    # H(1) = -20 breaks the side condition H(1) >= -(p/2 + a + 2)
    report = check_corollary1(PriorSpec(10, 0.0, 0.9, LogAdjusted(1.0, 20.0)))
    assert report.verdict is Verdict.NOT_PROVEN
    assert "side condition" in report.details


def test_corollary1_needs_monotone_H():
    spec = PriorSpec(10, 0.0, 0.9, HyperIB(c3=1.0, c4=1.5, d=-1.0))
    with pytest.raises(CorollaryInapplicableError):
        check_corollary1(spec)
    # the general inequality still applies
    assert check_theorem1(spec).rule is Rule.THM1


def test_relaxed_specs_are_refused():
    for check in (check_theorem1, check_corollary1, certify):
        with pytest.raises(RelaxedSpecError):
            check(PriorSpec(10, 1.0, 0.5))
        with pytest.raises(RelaxedSpecError):
            check(PriorSpec(10, 0.0, 1.0))


def test_log_adjusted_corollary():
    assert check_log_adjusted(PriorSpec(10, 0.0, 0.95, LogAdjusted(0.375, 0.0))).rule is Rule.COR1_1
    report = check_log_adjusted(PriorSpec(10, 0.0, 0.95, LogAdjusted(1.0, 20.0)))
    assert report.rule is Rule.COR2_1 and not report.proven
    report = check_log_adjusted(PriorSpec(10, 0.0, 0.95, LogAdjusted(0.375, -5.0)))
    assert report.rule is Rule.COR2_2 and not report.proven
    with pytest.raises(CorollaryInapplicableError):
        check_log_adjusted(PriorSpec(10, 0.0, 0.95))


def test_hyper_ib_corollary():
    report = check_hyper_ib(PriorSpec(10, 0.0, 0.95, HyperIB(c3=1.0, c4=0.0, d=0.0)))
    assert report.rule is Rule.COR3_1 and report.proven
    assert report.b_threshold == pytest.approx(0.8)
    report = check_hyper_ib(PriorSpec(10, 0.0, 0.95, HyperIB(c3=1.0, c4=2.0, d=0.0)))
    assert report.rule is Rule.COR3_2 and report.proven
    assert report.b_threshold == pytest.approx(14 / 15)
    report = check_hyper_ib(PriorSpec(10, 0.0, 0.95, HyperIB(c3=1.0, c4=-1.0, d=-1.0)))
    assert report.rule is Rule.COR3_1 and report.proven
    assert report.b_threshold == pytest.approx(0.8)
    # outside both monotone regimes the grid evaluation takes over
    report = check_hyper_ib(PriorSpec(10, 0.0, 0.95, HyperIB(c3=1.0, c4=1.5, d=-1.0)))
    assert report.rule is Rule.THM1
    with pytest.raises(CorollaryInapplicableError):
        check_hyper_ib(PriorSpec(10, 0.0, 0.95))


def test_a_outside_range_is_not_proven():
    report = check_theorem1(PriorSpec(5, 0.75, 0.99))
    assert not report.proven
    assert "outside" in report.details


def test_numerically_at_boundary():
    report = check_theorem1(PriorSpec(10, 0.0, 0.8 - 1e-11))
    assert report.verdict is Verdict.NOT_PROVEN
    assert "numerically-at-boundary" in report.details
    assert check_theorem1(PriorSpec(10, 0.0, 0.8)).proven


def test_only_rounding_level_ties_are_snapped():
    # threshold is exactly 0.8 here; margin = 15 - 12 / b
    within = check_theorem1(PriorSpec(10, 0.0, 0.8 - 1e-15))
    assert within.proven and within.margin == 0.0
    assert "zero up to rounding" in within.details
    beyond = check_theorem1(PriorSpec(10, 0.0, 0.8 - 1e-13))
    assert not beyond.proven
    assert -1e-9 < beyond.margin < 0
    assert "numerically-at-boundary" in beyond.details


def _random_spec(rng):
    p = int(rng.integers(5, 31))
    a = rng.uniform(-p / 2, min(0.99, p / 2 - 2))
    b = rng.uniform(0.05, 0.99)
    kind = rng.integers(3)
    if kind == 0:
        h = Constant()
    elif kind == 1:
        h = LogAdjusted(c1=rng.uniform(0.05, 2.0), c2=rng.uniform(-4.0, 4.0))
    else:
        h = HyperIB(c3=rng.uniform(0.1, 3.0), c4=rng.uniform(-4.0, 4.0), d=rng.uniform(-2.0, 2.0))
    return PriorSpec(p, a, b, h)


def test_corollaries_never_outrun_the_general_inequality():
    rng = np.random.default_rng(2022)
    proven = 0
    for _ in range(200):
        spec = _random_spec(rng)
        try:
            if isinstance(spec.h, LogAdjusted):
                fast = check_log_adjusted(spec)
            elif isinstance(spec.h, HyperIB):
                fast = check_hyper_ib(spec)
            else:
                fast = check_corollary1(spec)
        except CorollaryInapplicableError:
            continue
        if fast.proven:
            proven += 1
            assert check_theorem1(spec).proven, spec
    logger.info(f"{proven} of 200 random priors proven by a corollary")


@pytest.mark.parametrize(
    "h",
    [
        Constant(),
        LogAdjusted(0.375, -2.0),
        LogAdjusted(1.0, 1.0),
        HyperIB(c3=1.0, c4=-1.0, d=0.0),
        HyperIB(c3=1.0, c4=2.0, d=0.0),
        HyperIB(c3=1.0, c4=-1.0, d=-1.0),
    ],
    ids=repr,
)
def test_grid_extrema_match_analytic(h):
    analytic = H_extrema(h)
    grid = H_extrema(h, grid=True)
    assert grid[0] == pytest.approx(analytic[0], abs=1e-6)
    assert grid[1] == pytest.approx(analytic[1], abs=1e-6)


def test_grid_extrema_for_non_monotone_H():
    h = HyperIB(c3=1.0, c4=1.5, d=-1.0)
    max_h2, h1_one = H_extrema(h)
    # H rises to its maximum where (1 + kappa)^2 = 1.5, then falls to H(1) = -0.25
    peak = math.sqrt(1.5) - 1
    assert max_h2 == pytest.approx(-peak + 1.5 * peak / (1 + peak), abs=1e-6)
    assert h1_one == pytest.approx(-0.25, abs=1e-6)


@pytest.mark.parametrize("h", [Constant(), LogAdjusted(0.375, -2.0), HyperIB(c3=1.0, c4=1.5, d=-1.0)], ids=repr)
def test_margin_increases_with_b(h):
    margins = [check_theorem1(PriorSpec(10, 0.0, b, h)).margin for b in np.linspace(0.05, 0.99, 50)]
    assert np.all(np.diff(margins) >= 0)


def test_report_serialises(prior2):
    document = certify(prior2).to_dict()
    decoded = json.loads(json.dumps(document))
    assert decoded["verdict"] == "ProvenMinimax"
    assert decoded["rule"] == "Cor2_2"
    assert decoded["prior"]["h"] == {"kind": "log_adjusted", "c1": 0.375, "c2": -2.0}


def test_named_priors():
    spec = named_prior("Prior2", 10)
    assert spec.a == 0.0 and spec.b == pytest.approx(0.9)
    assert spec.h == LogAdjusted(0.375, -2.0)
    assert named_prior("half-cauchy", 4) == PriorSpec(4, 0.5, 0.5)
    assert named_prior("polson_scott", 3).h == HyperIB(c3=1.0, c4=-1.0, d=0.0)
    with pytest.raises(DomainError):
        named_prior("prior1", 5)
    with pytest.raises(DomainError):
        named_prior("prior2", 4)
    with pytest.raises(DomainError):
        named_prior("horseshoe", 10)
