"""
Decorators for pipeline subcommands
"""

import functools
import logging
import time

from utils.helpers import format_duration
from utils.logger import memory_usage

logger = logging.getLogger(__name__)


def log_command(name: str):
    """Log start, duration and memory of a subcommand; failures are logged and re-raised"""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger.info(f"⚡ Command: {name}")
            started = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.debug(f"{name} failed after {format_duration(time.perf_counter() - started)}: "
                             f"{type(e).__name__}")
                raise
            logger.info(f"⏱️ {name} done in {format_duration(time.perf_counter() - started)}")
            logger.debug(f"📊 Performance: rss after {name} = {memory_usage()}")
            return result
        return wrapper
    return decorator
