__version__ = "0.1.0"

from .util import logger, performance
from .modules import (
    Constant,
    HyperIB,
    LogAdjusted,
    PriorSpec,
    QuadConfig,
    SamplerConfig,
    bayes_estimate,
    certify,
    named_prior,
    run_chain,
    shrinkage_factor,
)
from .shrink import Bayes, Identity, JamesStein
from .prior_manager import PriorManager
