# solver/riccati_spectrum/cli/deps.py

import functools
import logging
import time
from typing import Any, Callable, Dict, Optional, Tuple

import typer
from pydantic import ValidationError
from rich.console import Console

from ..core.exceptions import InvalidRunConfig, RiccatiSpectrumError
from ..db.session import session_scope
from ..schemas.coefficients import CoefficientSet
from ..schemas.run_config import RunConfig
from ..services import reference_systems
from ..services.coeffs_service import load_coefficient_set
from ..services.log_service import log_run_event
from ..utils.io import to_json_bytes

logger = logging.getLogger(__name__)

_console: Optional[Console] = None


def get_console() -> Console:
    """Rich console on stderr; stdout is reserved for command output."""
    global _console
    if _console is None:
        _console = Console(stderr=True)
    return _console


def build_config(**options: Any) -> RunConfig:
    try:
        return RunConfig.model_validate(options)
    except ValidationError as e:
        raise InvalidRunConfig(f"Invalid options: {e}") from e


def load_system(cfg: RunConfig) -> CoefficientSet:
    if cfg.config_path is not None:
        return load_coefficient_set(cfg.config_path)
    return reference_systems.get_system(cfg.system)


def emit(payload: Any) -> None:
    typer.echo(to_json_bytes(payload).decode("utf-8"), nl=False)


def tracked(command: str) -> Callable:
    """
    Wraps a command body: maps solver errors to exit codes, reports them on the
    console and records one run-log row.

    The body returns ``(system_label, extra_data)`` for the run log.
    """

    def decorator(fn: Callable[..., Tuple[Optional[str], Dict[str, Any]]]) -> Callable:
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            status, details, system, extra, code = "SUCCESS", None, None, {}, 0
            try:
                system, extra = fn(*args, **kwargs)
            except RiccatiSpectrumError as e:
                status, details, code = "FAILURE", str(e), e.exit_code
                logger.error(f"{command} failed ({type(e).__name__}): {e}")
                get_console().print(f"[bold red]{type(e).__name__}[/bold red]: {e}")
            except Exception as e:
                status, details, code = "FAILURE", str(e), 4
                logger.critical(f"Unexpected error in {command}: {e}", exc_info=True)
                get_console().print(f"[bold red]Unexpected error[/bold red]: {e}")
            latency_ms = (time.perf_counter() - start) * 1000
            with session_scope() as db:
                if db is not None:
                    log_run_event(
                        db,
                        command,
                        status=status,
                        details=details,
                        system_name=system,
                        latency_ms=round(latency_ms, 2),
                        extra_data={**extra, "exit_code": code},
                    )
            if code:
                raise typer.Exit(code)

        return wrapper

    return decorator
