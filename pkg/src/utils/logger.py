import json
import logging
import sys

from src.utils.settings import LOG_LEVEL

_CONFIGURED = False


def get_logger(name: str) -> logging.Logger:
    """Module logger; the first call wires a single stderr handler for the package."""
    global _CONFIGURED
    if not _CONFIGURED:
        root = logging.getLogger("src")
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)
        root.setLevel(LOG_LEVEL)
        root.propagate = False
        _CONFIGURED = True
    return logging.getLogger(name)


def pretty_print(label: str, data):
    """Prints the data in a JSON- like pretty format"""
    print(f'"{label}":', json.dumps(data, indent=2, ensure_ascii=False, default=str))
