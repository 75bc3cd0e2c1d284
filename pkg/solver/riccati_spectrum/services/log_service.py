# solver/riccati_spectrum/services/log_service.py

import logging
from typing import Any, Dict, Optional

from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session

from ..db import models

logger = logging.getLogger(__name__)


def log_run_event(
    db: Optional[Session],
    command: str,
    status: Optional[str] = "SUCCESS",
    details: Optional[str] = None,
    system_name: Optional[str] = None,
    latency_ms: Optional[float] = None,
    extra_data: Optional[Dict[str, Any]] = None,
) -> None:
    """
    Records one CLI run in the SolverRunLog table. Never raises.
    """
    if not db:
        logger.warning(f"Database session not available. Skipping run log for: {command}")
        return

    try:
        entry = models.SolverRunLog(
            command=command,
            status=status.upper() if status else None,
            details=details,
            system_name=system_name,
            latency_ms=latency_ms,
            extra_data=extra_data,
        )
        db.add(entry)
        db.flush()
        logger.debug(f"Run log entry prepared: {command}, status: {status}")
    except SQLAlchemyError as e:
        logger.error(f"Failed to log run '{command}' to database: {e}", exc_info=True)
    except Exception as e:
        logger.error(f"Unexpected error logging run '{command}' to DB: {e}", exc_info=True)
