from __future__ import annotations

import logging
import os

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def get_logger(name: str) -> logging.Logger:
    """Module logger with a single stream handler, level taken from WALKLAB_LOG_LEVEL."""
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False
    logger.setLevel(os.getenv("WALKLAB_LOG_LEVEL", "INFO").upper())
    return logger
