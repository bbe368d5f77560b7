"""
SQLAlchemy database models and utilities for persisting compile runs and
experiment results.

This module provides:
- SQLAlchemy ORM models for database storage
- Async database session management
- Helper functions to save Pydantic records to the database
"""

import logging
import os
from datetime import datetime, timezone
from typing import Optional

logger = logging.getLogger(__name__)

from sqlalchemy import BigInteger, Boolean, DateTime, Float, Integer, String, Text
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column

from core.models import CompileStats, ErrorReport

# Database URL - run records default to a local SQLite file
DATABASE_URL = os.getenv("DATABASE_URL", "sqlite+aiosqlite:///compiler_runs.db")

# Detect if using PostgreSQL vs SQLite
IS_POSTGRES = DATABASE_URL.startswith("postgresql")

# PgBouncer-fronted PostgreSQL requires statement_cache_size=0
# SQLite does not support connect_args with this setting
engine = create_async_engine(
    DATABASE_URL,
    echo=False,
    connect_args={"statement_cache_size": 0} if IS_POSTGRES else {},
)
AsyncSessionLocal = async_sessionmaker(engine, class_=AsyncSession, expire_on_commit=False)


def _utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(tzinfo=None)


class Base(DeclarativeBase):
    """Base class for all ORM models."""
    pass


class CompileRunModel(Base):
    """One row per compile invocation."""
    __tablename__ = "compile_runs"

    id: Mapped[int] = mapped_column(primary_key=True, autoincrement=True)
    run_id: Mapped[str] = mapped_column(String(64), index=True)
    n: Mapped[int] = mapped_column(Integer)
    m: Mapped[int] = mapped_column(Integer)
    m_bar: Mapped[int] = mapped_column(Integer)
    group_mode: Mapped[str] = mapped_column(String(16))
    t: Mapped[float] = mapped_column(Float)
    epsilon_requested: Mapped[float] = mapped_column(Float)
    epsilon: Mapped[float] = mapped_column(Float)
    chi: Mapped[int] = mapped_column(Integer)
    r: Mapped[int] = mapped_column(Integer)
    rigorous: Mapped[bool] = mapped_column(Boolean)
    gateset: Mapped[str] = mapped_column(String(16))
    h_count: Mapped[int] = mapped_column(Integer)
    t_count: Mapped[int] = mapped_column(Integer)
    rz_count: Mapped[int] = mapped_column(Integer)
    cnot_count: Mapped[int] = mapped_column(Integer)
    depth: Mapped[int] = mapped_column(Integer)
    measured_error: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    verified: Mapped[Optional[bool]] = mapped_column(Boolean, nullable=True)
    stats_json: Mapped[str] = mapped_column(Text)

    # Metadata
    created_at: Mapped[datetime] = mapped_column(DateTime, default=_utcnow)

    def __repr__(self) -> str:
        return f"<CompileRun(id={self.id}, n={self.n}, chi={self.chi}, r={self.r})>"


class ErrorSampleModel(Base):
    """One row per (n, t, sample) Trotter error measurement."""
    __tablename__ = "error_samples"

    id: Mapped[int] = mapped_column(primary_key=True, autoincrement=True)
    run_id: Mapped[str] = mapped_column(String(64), index=True)
    n: Mapped[int] = mapped_column(Integer)
    t: Mapped[float] = mapped_column(Float)
    r: Mapped[int] = mapped_column(Integer)
    order: Mapped[int] = mapped_column(Integer)
    sample: Mapped[int] = mapped_column(Integer)
    seed: Mapped[int] = mapped_column(BigInteger)
    norm_h: Mapped[float] = mapped_column(Float)
    measured: Mapped[float] = mapped_column(Float)
    bound: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    fit: Mapped[Optional[float]] = mapped_column(Float, nullable=True)

    created_at: Mapped[datetime] = mapped_column(DateTime, default=_utcnow)


class ExperimentReportModel(Base):
    """Any experiment report, stored as a JSON blob."""
    __tablename__ = "experiment_reports"

    id: Mapped[str] = mapped_column(String(64), primary_key=True)
    kind: Mapped[str] = mapped_column(String(64), index=True)
    report_json: Mapped[str] = mapped_column(Text, nullable=False)
    created_at: Mapped[datetime] = mapped_column(DateTime, default=_utcnow)


async def init_db():
    """Create all database tables if they don't exist."""
    logger.info("init_db creating tables driver=%s", "postgresql" if IS_POSTGRES else "sqlite")
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)


async def save_compile_run(stats: CompileStats, run_id: str) -> CompileRunModel:
    """
    Save the stats of one compile run.

    Args:
        stats: CompileStats produced by the pipeline
        run_id: Identifier shared with any artifacts written for the run

    Returns:
        The saved CompileRunModel with generated ID
    """
    verification = stats.verification
    async with AsyncSessionLocal() as session:
        row = CompileRunModel(
            run_id=run_id,
            n=stats.n,
            m=stats.m,
            m_bar=stats.m_bar,
            group_mode=stats.group_mode.value,
            t=stats.t,
            epsilon_requested=stats.epsilon_requested,
            epsilon=stats.epsilon,
            chi=stats.chi,
            r=stats.r,
            rigorous=stats.rigorous,
            gateset=stats.gateset.value,
            h_count=stats.counts.h,
            t_count=stats.counts.t,
            rz_count=stats.counts.rz,
            cnot_count=stats.counts.cnot,
            depth=stats.depth,
            measured_error=verification.measured_error if verification else None,
            verified=verification.passed if verification else None,
            stats_json=stats.model_dump_json(),
        )
        session.add(row)
        await session.commit()
        await session.refresh(row)
        logger.info("save_compile_run id=%s run=%s n=%s r=%s", row.id, run_id, row.n, row.r)
        return row


async def save_error_samples(report: ErrorReport, run_id: str) -> int:
    """Save every per-sample record of an error report; returns the row count."""
    async with AsyncSessionLocal() as session:
        session.add_all(
            ErrorSampleModel(run_id=run_id, **record.model_dump()) for record in report.samples
        )
        await session.commit()
    logger.info("save_error_samples run=%s rows=%s order=%s", run_id, len(report.samples), report.order)
    return len(report.samples)
