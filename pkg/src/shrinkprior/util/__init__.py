from .performance import performance
from .logger import logger
from .rng import stream
