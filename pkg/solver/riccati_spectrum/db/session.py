# solver/riccati_spectrum/db/session.py

import logging
from contextlib import contextmanager
from typing import Generator, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

from ..core.config import settings
from .models import Base

logger = logging.getLogger(__name__)

_engine: Optional[Engine] = None
_session_factory: Optional[sessionmaker] = None


def _redacted(uri: str) -> str:
    return uri[: uri.find("@")] if "@" in uri else uri


def get_session_factory(uri: Optional[str] = None) -> Optional[sessionmaker]:
    """
    Lazily builds the engine and session maker; None when no database is configured.

    Tables are created on first use.
    """
    global _engine, _session_factory
    uri = uri or settings.SQLALCHEMY_DATABASE_URI
    if not uri:
        return None
    if _session_factory is not None and _engine is not None and str(_engine.url) == uri:
        return _session_factory
    try:
        logger.info(f"Initializing SQLAlchemy engine for: {_redacted(uri)}")
        connect_args = {"check_same_thread": False} if uri.startswith("sqlite") else {}
        _engine = create_engine(uri, pool_pre_ping=True, connect_args=connect_args)
        _session_factory = sessionmaker(autocommit=False, autoflush=False, bind=_engine)
        Base.metadata.create_all(bind=_engine)
        logger.info("Run log tables checked/created.")
    except Exception as e:
        logger.error(f"Failed to initialize SQLAlchemy: {e}", exc_info=True)
        _engine = None
        _session_factory = None
    return _session_factory


@contextmanager
def session_scope(uri: Optional[str] = None) -> Generator[Optional[Session], None, None]:
    """Yields a session committed on exit, or None if the database is not configured."""
    factory = get_session_factory(uri)
    if factory is None:
        yield None
        return
    db = factory()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()
