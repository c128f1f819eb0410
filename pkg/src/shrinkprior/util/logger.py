"""loguru setup shared by the library and the command line.

Sweep progress, stage status lines and user-facing results go to stdout;
numerical diagnostics, warnings and errors go to stderr. CSV and JSON
results are never written through the logger.
"""
import sys
from functools import partialmethod

from loguru import logger

EXPERIMENT_LEVELS = ["EXPERIMENT"]
INIT_LEVELS = ["INIT", "INIT_OK", "INIT_WARN", "INIT_ERR"]
MESSAGE_LEVELS = ["MESSAGE"]
ROUTED_LEVELS = EXPERIMENT_LEVELS + INIT_LEVELS + MESSAGE_LEVELS

# (name, severity, colour); MESSAGE carries results the user asked for, so it survives any -q
LEVELS = [
    ("EXPERIMENT", 24, "<cyan>"),
    ("INIT", 31, "<white>"),
    ("INIT_OK", 31, "<green>"),
    ("INIT_WARN", 31, "<yellow>"),
    ("INIT_ERR", 31, "<red>"),
    ("MESSAGE", 61, "<green>"),
]

# INFO and above until -v / -q move the threshold
verbosity = 20
quiet = 0


def set_logger_verbosity(count):
    global verbosity
    # each -v lowers the threshold by one level: INFO, DEBUG, TRACE
    verbosity = 20 - (count * 10)


def quiesce_logger(count):
    global quiet
    quiet = count * 10


def threshold():
    return verbosity + quiet


def routed_to(levels):
    def accept(record):
        return record["level"].name in levels and record["level"].no >= threshold()

    return accept


def is_stderr_log(record):
    return record["level"].name not in ROUTED_LEVELS and record["level"].no >= threshold()


stderr_format = (
    "<level>{level: <10}</level> | <green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<green>{name}</green>:<green>{function}</green>:<green>{line}</green> - <level>{message}</level>"
)
experiment_format = "<level>{level: <10}</level> @ <green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{message}</level>"
init_format = "<magenta>INIT      </magenta> | <level>{extra[status]: <11}</level> | <magenta>{message}</magenta>"
message_format = "<level>{level: <10}</level> | <level>{message}</level>"

for name, number, color in LEVELS:
    try:
        logger.level(name, no=number, color=color)
    except TypeError:
        # registered by an earlier import
        pass
    setattr(logger.__class__, name.lower(), partialmethod(logger.__class__.log, name))

logger.configure(
    handlers=[
        {"sink": sys.stderr, "format": stderr_format, "colorize": True, "filter": is_stderr_log},
        {
            "sink": sys.stdout,
            "format": experiment_format,
            "level": "EXPERIMENT",
            "colorize": True,
            "filter": routed_to(EXPERIMENT_LEVELS),
        },
        {"sink": sys.stdout, "format": init_format, "level": "INIT", "colorize": True, "filter": routed_to(INIT_LEVELS)},
        {
            "sink": sys.stdout,
            "format": message_format,
            "level": "MESSAGE",
            "colorize": True,
            "filter": routed_to(MESSAGE_LEVELS),
        },
    ]
)
