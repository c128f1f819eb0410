from .estimators import Bayes, Estimator, Identity, JamesStein
