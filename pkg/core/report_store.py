"""
Database-backed store for experiment reports.

Any pydantic report (ErrorReport, NormFit, a list of ExtrapolationRow, ...) is
kept as one JSON blob per id. Uses the same async engine / session factory
configured in core.database. The `reports` CLI subcommand lists, shows and
deletes what `--record` saved.
"""

from __future__ import annotations

import logging
import uuid
from typing import Any, TypeVar

from pydantic import BaseModel, TypeAdapter
from sqlalchemy import delete, select

from core.database import AsyncSessionLocal, ExperimentReportModel
from core.errors import ReportNotFoundError
from core.models import ErrorReport, ExtrapolationRow, GroupScalingRow, NormFit

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Report kinds written by `--record`, keyed by CLI subcommand.
REPORT_TYPES: dict[str, Any] = {
    "ts-error": ErrorReport,
    "norm-fit": NormFit,
    "extrapolate": list[ExtrapolationRow],
    "group-scaling": list[GroupScalingRow],
}


def dump_report(report: Any, indent: int | None = None) -> str:
    if isinstance(report, BaseModel):
        return report.model_dump_json(indent=indent)
    return TypeAdapter(type(report)).dump_json(report, indent=indent).decode()


class ReportStore:
    """Saves and loads experiment reports by id and kind."""

    async def save_report(self, kind: str, report: Any, report_id: str | None = None) -> str:
        report_id = report_id or uuid.uuid4().hex
        payload = dump_report(report)
        async with AsyncSessionLocal() as session:
            row = await session.get(ExperimentReportModel, report_id)
            is_new = row is None
            if row is None:
                session.add(ExperimentReportModel(id=report_id, kind=kind, report_json=payload))
            else:
                row.kind = kind
                row.report_json = payload
            await session.commit()
        logger.info("save_report id=%s kind=%s new=%s", report_id, kind, is_new)
        return report_id

    async def load_report(self, report_id: str, report_type: type[T] | None = None) -> T:
        """Validate a stored report; without report_type the type registered for its kind is used."""
        async with AsyncSessionLocal() as session:
            row = await session.get(ExperimentReportModel, report_id)
            if row is None:
                raise ReportNotFoundError(f"Report {report_id} not found")
            target = report_type or REPORT_TYPES.get(row.kind, Any)
            return TypeAdapter(target).validate_json(row.report_json)

    async def list_reports(self, kind: str, limit: int = 50) -> list[str]:
        """Ids of the most recent reports of one kind, newest first."""
        async with AsyncSessionLocal() as session:
            stmt = (
                select(ExperimentReportModel.id)
                .where(ExperimentReportModel.kind == kind)
                .order_by(ExperimentReportModel.created_at.desc(), ExperimentReportModel.id.desc())
                .limit(limit)
            )
            result = await session.execute(stmt)
            return list(result.scalars().all())

    async def delete_report(self, report_id: str) -> None:
        async with AsyncSessionLocal() as session:
            result = await session.execute(
                delete(ExperimentReportModel).where(ExperimentReportModel.id == report_id)
            )
            await session.commit()
        if result.rowcount == 0:
            raise ReportNotFoundError(f"Report {report_id} not found")
        logger.info("delete_report id=%s", report_id)
