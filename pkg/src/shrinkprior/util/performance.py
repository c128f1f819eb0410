import time
from functools import wraps
from typing import TypeVar

import numpy as np

from shrinkprior.util.logger import logger

T = TypeVar("T")


def performance(function: T) -> T:
    """Run a log-space numeric kernel with underflow and log(0) warnings silenced."""

    @wraps(function)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        with np.errstate(under="ignore", divide="ignore"):
            result = function(*args, **kwargs)
        logger.trace(f"{function.__qualname__} took {time.perf_counter() - start:.4f}s")
        return result

    return wrapper
