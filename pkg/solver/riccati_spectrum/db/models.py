# solver/riccati_spectrum/db/models.py

from sqlalchemy import JSON, Column, DateTime, Float, Integer, String, Text
from sqlalchemy.orm import declarative_base
from sqlalchemy.schema import Index
from sqlalchemy.sql import func

Base = declarative_base()
"""Base class for SQLAlchemy declarative models."""


class SolverRunLog(Base):
    """One row per CLI command run."""

    __tablename__ = "solver_run_logs"

    id = Column(Integer, primary_key=True, index=True)
    timestamp = Column(DateTime(timezone=True), server_default=func.now(), index=True)
    command = Column(String(50), index=True, nullable=False)  # e.g. "spectrum", "oracle"
    status = Column(String(20), index=True, nullable=True)  # SUCCESS / FAILURE
    details = Column(Text, nullable=True)
    system_name = Column(String(255), nullable=True)  # built-in name or config path
    latency_ms = Column(Float, nullable=True)
    extra_data = Column(JSON, nullable=True)  # eigenvalues, exit code, options

    __table_args__ = (Index("ix_solver_run_logs_command_time", "command", "timestamp"),)

    def __repr__(self):
        return f"<SolverRunLog(id={self.id}, command='{self.command}', status='{self.status}')>"
