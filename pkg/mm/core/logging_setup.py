# mm/core/logging_setup.py
from loguru import logger
import sys, pathlib, datetime
from typing import Optional

LOG_PATH = pathlib.Path.home() / ".modmetrics"


def default_log_file() -> pathlib.Path:
    LOG_PATH.mkdir(exist_ok=True)
    return LOG_PATH / f"modmetrics_{datetime.datetime.now():%Y%m%d}.log"


def setup_logging(level: str = "INFO", log_file: Optional[pathlib.Path] = None) -> None:
    """Routes loguru to stderr (stdout carries reports) and optionally a rotating file."""
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), backtrace=True, diagnose=False)
    if log_file is not None:
        log_file = pathlib.Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        logger.add(str(log_file), rotation="5 MB", retention="10 days", level="DEBUG",
                   enqueue=True, backtrace=True, diagnose=True)
        logger.debug("Logger initialised → {}", log_file)
