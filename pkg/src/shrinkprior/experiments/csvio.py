"""CSV artifacts of the sweeps. Floats carry 17 significant digits so a re-read is exact."""
import math
import re

import numpy as np

from shrinkprior.experiments.risk import PriorDensityCurve, RiskCurve
from shrinkprior.modules.estimator import ShrinkCurve
from shrinkprior.modules.prior import PriorSpec
from shrinkprior.util import logger
from shrinkprior.util.errors import ValidationError

FLOAT_FORMAT = "%.17g"
GRID_PATTERN = re.compile(r"^\s*([^:]+):([^:]+):([^:]+)\s*$")


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:step`` inclusive of lo, and of hi when (hi - lo) / step is integral within 1e-9.

    A comma separated list of values is accepted as well.
    """
    match = GRID_PATTERN.match(text)
    if match is None:
        try:
            values = np.array([float(v) for v in text.split(",") if v.strip()])
        except ValueError:
            values = np.array([])
        if len(values) == 0:
            raise ValidationError(f"grid must look like lo:hi:step or v1,v2,..., got {text!r}")
        return values
    try:
        lo, hi, step = (float(part) for part in match.groups())
    except ValueError as e:
        raise ValidationError(f"grid bounds must be numbers, got {text!r}") from e
    if not all(math.isfinite(v) for v in (lo, hi, step)) or step <= 0 or hi < lo:
        raise ValidationError(f"grid needs finite lo <= hi and step > 0, got {text!r}")
    intervals = (hi - lo) / step
    nearest = round(intervals)
    count = nearest + 1 if abs(intervals - nearest) <= 1e-9 else math.floor(intervals) + 1
    return lo + step * np.arange(count)


def _read(path, expected_first: str):
    with open(path) as handle:
        header = handle.readline().strip().split(",")
    if not header or header[0] != expected_first:
        raise ValidationError(f"{path}: expected a header starting with {expected_first!r}, got {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise ValidationError(f"{path}: {data.shape[1]} columns but {len(header)} header fields")
    return header, data


def _write(path, header, columns):
    np.savetxt(path, np.column_stack(columns), fmt=FLOAT_FORMAT, delimiter=",", header=",".join(header), comments="")
    logger.debug(f"wrote {len(columns[0])} rows to {path}")


def write_risk_csv(curve: RiskCurve, path):
    header, columns = ["beta_norm"], [curve.grid]
    for index, name in enumerate(curve.names):
        header.extend([name, f"{name}_se"])
        columns.extend([curve.risks[:, index], curve.mc_se[:, index]])
    _write(path, header, columns)


def read_risk_csv(path) -> RiskCurve:
    header, data = _read(path, "beta_norm")
    if len(header) % 2 != 1:
        raise ValidationError(f"{path}: risk columns must come in (value, se) pairs")
    names = header[1::2]
    for name, se_name in zip(names, header[2::2]):
        if se_name != f"{name}_se":
            raise ValidationError(f"{path}: column {name!r} is not followed by {name + '_se'!r}")
    return RiskCurve(data[:, 0], names, data[:, 1::2], data[:, 2::2])


def write_shrink_csv(curve: ShrinkCurve, path):
    _write(path, ["y_norm", "phi"], [curve.y_norm, curve.phi])


def read_shrink_csv(path, spec: PriorSpec) -> ShrinkCurve:
    header, data = _read(path, "y_norm")
    if header != ["y_norm", "phi"]:
        raise ValidationError(f"{path}: expected header y_norm,phi, got {header}")
    return ShrinkCurve(data[:, 0], data[:, 1], spec)


def write_density_csv(curve: PriorDensityCurve, path):
    _write(path, ["kappa", "log_pi"], [curve.kappa, curve.log_pi])


def read_density_csv(path) -> PriorDensityCurve:
    header, data = _read(path, "kappa")
    if header != ["kappa", "log_pi"]:
        raise ValidationError(f"{path}: expected header kappa,log_pi, got {header}")
    return PriorDensityCurve(data[:, 0], data[:, 1])
