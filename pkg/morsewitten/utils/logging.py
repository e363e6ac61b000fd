"""
Logging configuration for morse-witten-lab.

Stdlib handlers (console and an optional rotating file) carry structlog
events rendered either as JSON lines or as human readable console output.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Any, List

import structlog

from ..config import LoggingSettings


def _shared_processors() -> List[Any]:
    return [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        structlog.processors.StackInfoRenderer(),
    ]


def setup_logging(settings: LoggingSettings) -> None:
    """
    Setup application logging configuration.

    Args:
        settings: Logging configuration settings
    """
    level = getattr(logging, settings.level.upper())
    shared = _shared_processors()

    structlog.configure(
        processors=shared + [structlog.stdlib.ProcessorFormatter.wrap_for_formatter],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    if settings.format == "json":
        renderer: Any = structlog.processors.JSONRenderer(sort_keys=True)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)
    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=shared,
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            structlog.processors.format_exc_info,
            renderer,
        ],
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    # Console handler; stderr keeps stdout free for command output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if settings.file_path:
        log_file_path = Path(settings.file_path)
        log_file_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            filename=str(log_file_path),
            maxBytes=settings.max_size_mb * 1024 * 1024,
            backupCount=settings.backup_count,
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    _configure_third_party_loggers()

    logger = structlog.get_logger(__name__)
    logger.debug("logging_configured", level=settings.level, format=settings.format, file=settings.file_path)


def _configure_third_party_loggers() -> None:
    """Keep the event loop of batch runs and plotly at warnings."""
    for name in ("asyncio", "plotly"):
        logging.getLogger(name).setLevel(logging.WARNING)
