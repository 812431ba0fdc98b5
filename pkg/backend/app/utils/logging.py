"""
Logging estruturado com structlog
"""

import sys
import time
import logging
from contextlib import contextmanager
from typing import Iterator

import structlog

from ..config import settings


def configure_logging(level: str = None, fmt: str = None) -> None:
    """
    Configurar structlog sobre o logging padrão

    Os logs vão sempre para stderr; stdout fica reservado para os dados.

    Args:
        level: Nível de log (padrão: settings.log_level); ignorado com settings.debug
        fmt: 'json' ou 'console' (padrão: settings.log_format)
    """
    level = "DEBUG" if settings.debug else (level or settings.log_level).upper()
    fmt = fmt or settings.log_format

    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(message)s",
        force=True,
    )

    renderer = (
        structlog.processors.JSONRenderer()
        if fmt == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


@contextmanager
def log_duration(logger, event: str, **context) -> Iterator[dict]:
    """
    Registrar início, fim e falha de uma operação com a duração

    Emite `<event>_started`, `<event>_completed` ou `<event>_failed`.
    O dicionário devolvido pode receber campos extras para o log final.
    """
    start_time = time.time()
    extra: dict = {}

    logger.debug(f"{event}_started", **context)

    try:
        yield extra
    except Exception as e:
        duration = time.time() - start_time
        logger.error(
            f"{event}_failed",
            duration=f"{duration:.3f}s",
            error=str(e),
            **context,
        )
        raise

    duration = time.time() - start_time
    logger.info(
        f"{event}_completed",
        duration=f"{duration:.3f}s",
        **context,
        **extra,
    )
