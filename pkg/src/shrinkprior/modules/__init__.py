from .prior import (
    Constant,
    HyperIB,
    LogAdjusted,
    PriorSpec,
    Propriety,
    ProprietyReport,
    big_H,
    classify_propriety,
    h_limit_ratio,
    h_logratio,
    h_monotonicity,
    H1_H2,
    log_prior_beta,
    log_prior_kappa,
)
from .quadrature import QuadConfig, Scheme, log_marginal, posterior_kappa_mean, weighted_integral
from .estimator import ShrinkCurve, bayes_estimate, james_stein, phi_limit, shrinkage_factor
from .minimax import (
    MinimaxReport,
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
from .sampler import ChainTrace, SamplerConfig, mh_log_accept, posterior_mean, run_chain
