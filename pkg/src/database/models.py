"""SQLAlchemy ORM models for the run catalog."""

from __future__ import annotations

from datetime import datetime
from typing import List, Optional

from sqlalchemy import DateTime, Float, ForeignKey, Index, Integer, String, Text, func
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship


class Base(DeclarativeBase):
    """Base class for ORM models."""


class RunModel(Base):
    """One solver run: identity, outcome and headline diagnostics."""

    __tablename__ = "runs"
    __table_args__ = (
        Index("idx_runs_kind", "kind"),
        Index("idx_runs_sweep", "sweep_id"),
    )

    id: Mapped[str] = mapped_column(String, primary_key=True)
    kind: Mapped[str] = mapped_column(String, nullable=False)
    epsilon: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    content_hash: Mapped[str] = mapped_column(String, nullable=False)
    status: Mapped[str] = mapped_column(String, nullable=False)
    message: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    out_dir: Mapped[Optional[str]] = mapped_column(String, nullable=True)
    final_time: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    steps: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)
    mass_drift: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    max_director: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    energy_drift: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    sweep_id: Mapped[Optional[str]] = mapped_column(String, nullable=True)
    created_at: Mapped[datetime] = mapped_column(DateTime(timezone=True), server_default=func.now(), nullable=False)
    updated_at: Mapped[datetime] = mapped_column(
        DateTime(timezone=True),
        server_default=func.now(),
        onupdate=func.now(),
        nullable=False,
    )

    metrics: Mapped[List["MetricModel"]] = relationship(
        back_populates="run",
        cascade="all, delete-orphan",
    )


class MetricModel(Base):
    """A named scalar measured on a run (difference norms, fitted rates)."""

    __tablename__ = "metrics"
    __table_args__ = (Index("idx_metrics_run", "run_id"),)

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[str] = mapped_column(String, ForeignKey("runs.id", ondelete="CASCADE"), nullable=False)
    name: Mapped[str] = mapped_column(String, nullable=False)
    value: Mapped[float] = mapped_column(Float, nullable=False)

    run: Mapped[RunModel] = relationship(back_populates="metrics")
