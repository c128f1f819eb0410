from .risk import PriorDensityCurve, RiskCurve, prior_density_sweep, risk_sweep, shrink_sweep
from .csvio import (
    parse_grid,
    read_density_csv,
    read_risk_csv,
    read_shrink_csv,
    write_density_csv,
    write_risk_csv,
    write_shrink_csv,
)
