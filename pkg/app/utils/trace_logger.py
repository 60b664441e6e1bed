"""
Stage tracing for experiment runs
One `Stage=... | Module=... | Detail=...` line per subcommand stage on the trace logger
"""
import logging
from typing import Any, Dict, Optional

from .logger import ROOT_LOGGER_NAME

trace_logger = logging.getLogger(f'{ROOT_LOGGER_NAME}.trace')


def _fields(values: Dict[str, Any]) -> str:
    return " | ".join(f"{key}={value}" for key, value in values.items())


def trace_log(stage: str, module: str, detail: str, extra: Optional[Dict[str, Any]] = None):
    """
    Emit one trace line

    Args:
        stage: Start, Result or Error
        module: Subcommand name
        detail: Free text for the stage
        extra: Key/value pairs appended after the detail
    """
    parts = [_fields({"Stage": stage, "Module": module, "Detail": detail})]
    if extra:
        parts.append(_fields(extra))
    trace_logger.info(" | ".join(parts))


def trace_start(subcommand: str, params: Optional[Dict[str, Any]] = None):
    trace_log('Start', subcommand, 'running', params)


def trace_result(subcommand: str, rows: Optional[int] = None, duration_ms: Optional[float] = None):
    summary = {}
    if rows is not None:
        summary["Rows"] = rows
    if duration_ms is not None:
        summary["Duration"] = f"{duration_ms:.0f}ms"
    trace_log('Result', subcommand, _fields(summary) if summary else 'done')


def trace_error(subcommand: str, error: str):
    trace_log('Error', subcommand, f'Error: {error}')
