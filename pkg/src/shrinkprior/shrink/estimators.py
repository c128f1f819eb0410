import numpy as np

from shrinkprior.modules.prior import PriorSpec
from shrinkprior.modules.quadrature import QuadConfig, posterior_kappa_mean
from shrinkprior.util import performance
from shrinkprior.util.errors import DomainError


class Estimator:
    """Spherically symmetric estimator beta_hat = c(|y|^2) y."""

    name = "estimator"

    def shrink(self, norm_sq: np.ndarray, p: int) -> np.ndarray:
        raise NotImplementedError

    @performance
    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        norm_sq = np.sum(y * y, axis=-1)
        coefficient = np.asarray(self.shrink(norm_sq, y.shape[-1]))
        return coefficient[..., None] * y

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class Bayes(Estimator):
    def __init__(self, spec: PriorSpec, cfg: QuadConfig = QuadConfig(), name: str = None):
        self.spec = spec
        self.cfg = cfg
        self.name = name or f"bayes_a{spec.a:.4g}_b{spec.b:.4g}_{spec.h.kind}"

    def shrink(self, norm_sq, p):
        if p != self.spec.p:
            raise DomainError(f"prior is for p={self.spec.p}, got y of length {p}")
        return 1.0 - posterior_kappa_mean(self.spec, np.asarray(norm_sq, dtype=float) / 2.0, self.cfg)


class JamesStein(Estimator):
    name = "james_stein"

    def shrink(self, norm_sq, p):
        if p < 3:
            raise DomainError(f"James-Stein needs p >= 3, got p={p}")
        norm_sq = np.asarray(norm_sq, dtype=float)
        if np.any(norm_sq == 0):
            raise DomainError("James-Stein is undefined at y = 0")
        return 1.0 - (p - 2) / norm_sq


class Identity(Estimator):
    name = "identity"

    def shrink(self, norm_sq, p):
        return np.ones_like(np.asarray(norm_sq, dtype=float))
