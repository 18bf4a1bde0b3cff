"""
Logging configuration for dtembed
Colored console output, optional rotating file log
"""

import logging
import os
from datetime import timedelta
from logging.handlers import RotatingFileHandler
from typing import Optional, Sequence

import colorlog
import humanize
import psutil

# Library modules log under their package names; they share the pipeline's handlers
LIBRARY_LOGGERS = ("core", "storage", "pipeline", "utils")


def setup_logger(name: str = "dtembed", log_file: Optional[str] = None,
                 level: str = "INFO") -> logging.Logger:
    """
    Setup a logger with colored console output and file logging
    """
    logger = logging.getLogger(name)

    # Don't add handlers if they already exist
    if logger.handlers:
        return logger

    logger.setLevel(logging.DEBUG)
    handlers = []

    # Console Handler with colors
    console_handler = colorlog.StreamHandler()
    console_handler.setLevel(getattr(logging, level.upper(), logging.INFO))
    console_format = colorlog.ColoredFormatter(
        "%(cyan)s[%(asctime)s]%(reset)s "
        "%(log_color)s%(levelname)-8s%(reset)s "
        "%(blue)s%(name)s%(reset)s "
        "%(white)s%(message)s%(reset)s",
        datefmt="%H:%M:%S",
        log_colors={
            'DEBUG': 'purple',
            'INFO': 'green',
            'WARNING': 'yellow',
            'ERROR': 'red',
            'CRITICAL': 'red,bg_white',
        },
    )
    console_handler.setFormatter(console_format)
    handlers.append(console_handler)

    # File Handler
    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir, exist_ok=True)

        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10 MB
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '[%(asctime)s] %(levelname)-8s | %(name)s | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        handlers.append(file_handler)

    for target in (logger, *(logging.getLogger(n) for n in LIBRARY_LOGGERS)):
        if target is not logger and target.handlers:
            continue
        target.setLevel(logging.DEBUG)
        target.propagate = False
        for handler in handlers:
            target.addHandler(handler)

    logger.debug("dtembed logger initialized")
    return logger


def memory_usage() -> str:
    """Resident set size of this process"""
    return humanize.naturalsize(psutil.Process().memory_info().rss, binary=True)


class PipelineLogger:
    """
    Logger wrapper with pipeline-stage messages
    """

    def __init__(self, logger: logging.Logger):
        self.logger = logger

    def startup(self, version: str, command: str, seed: int, deterministic: bool):
        """Log run start"""
        mode = "deterministic" if deterministic else "parallel"
        self.logger.info("=" * 50)
        self.logger.info(f"🚀 dtembed {version} | {command} | seed={seed} | {mode}")

    def stage(self, name: str, details: Optional[str] = None):
        """Log a pipeline stage"""
        if details:
            self.logger.info(f"⚙️ {name} | {details}")
        else:
            self.logger.info(f"⚙️ {name}")

    def graph(self, label: str, nodes: int, edges: int):
        self.logger.info(
            f"🕸️ {label}: {humanize.intcomma(nodes)} nodes, {humanize.intcomma(edges)} edges"
        )

    def artifact(self, kind: str, path: str):
        """Log a written output file"""
        self.logger.info(f"💾 Wrote {kind}: {path}")

    def coverage(self, input_sizes: Sequence[int], kept: int, examples: Sequence[str] = ()):
        """Log vocabulary coverage of a combination"""
        sizes = " x ".join(humanize.intcomma(s) for s in input_sizes)
        self.logger.info(f"📐 Vocabulary: {sizes} -> {humanize.intcomma(kept)} shared words")
        if examples:
            self.logger.debug(f"📐 Dropped e.g.: {', '.join(examples)}")

    def error(self, error: str, context: Optional[str] = None):
        """Log error with context"""
        if context:
            self.logger.error(f"❌ Error in {context}: {error}")
        else:
            self.logger.error(f"❌ Error: {error}")

    def warning(self, message: str):
        """Log warning"""
        self.logger.warning(f"⚠️ Warning: {message}")

    def success(self, message: str):
        """Log success message"""
        self.logger.info(f"✅ Success: {message}")

    def performance(self, metric: str, value):
        """Log performance metrics"""
        self.logger.debug(f"📊 Performance: {metric} = {value}")

    def memory(self):
        self.performance("rss", memory_usage())

    def shutdown(self, elapsed_seconds: float):
        """Log run end"""
        self.logger.info(f"🔄 Finished in {humanize.precisedelta(timedelta(seconds=elapsed_seconds))}")
        self.logger.info("=" * 50)
