"""Run catalog repository and session helpers."""

from __future__ import annotations

from contextlib import asynccontextmanager
from typing import TYPE_CHECKING, Any, AsyncIterator, Mapping, Optional, cast

from sqlalchemy import delete, select
from sqlalchemy.ext.asyncio import AsyncEngine, AsyncSession, async_sessionmaker, create_async_engine

from src.database.models import Base, MetricModel, RunModel

if TYPE_CHECKING:
    from src.solvers.runner import RunResult


def build_async_db_url(database_url: str) -> str:
    """Convert a sync SQLAlchemy URL to an async-compatible URL."""
    if database_url.startswith("sqlite:///"):
        return database_url.replace("sqlite:///", "sqlite+aiosqlite:///")
    if database_url.startswith("sqlite://"):
        return database_url.replace("sqlite://", "sqlite+aiosqlite://")
    return database_url


def create_engine(database_url: str) -> AsyncEngine:
    """Create an async SQLAlchemy engine for the given database URL."""
    return create_async_engine(build_async_db_url(database_url), future=True)


async def init_db(engine: AsyncEngine) -> None:
    """Create database tables if they do not exist."""
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)


@asynccontextmanager
async def get_session(database_url: str) -> AsyncIterator[AsyncSession]:
    """Yield an async database session, creating tables on first use."""
    engine = create_engine(database_url)
    await init_db(engine)
    session_maker = async_sessionmaker(engine, expire_on_commit=False)
    async with session_maker() as session:
        yield session
    await engine.dispose()


class RunRepository:
    """Repository for catalogued runs and their metrics."""

    def __init__(self, session: AsyncSession):
        self.session = session

    async def save(
        self,
        result: "RunResult",
        *,
        out_dir: Optional[str] = None,
        sweep_id: Optional[str] = None,
    ) -> RunModel:
        """Insert or update the catalog entry of a finished run."""
        return await self.save_summary(
            result.run_id,
            result.kind,
            result.content_hash,
            result.diagnostics.to_dict(),
            epsilon=result.epsilon,
            out_dir=out_dir,
            sweep_id=sweep_id,
        )

    async def save_summary(
        self,
        run_id: str,
        kind: str,
        content_hash: str,
        diagnostics: Mapping[str, Any],
        *,
        epsilon: Optional[float] = None,
        out_dir: Optional[str] = None,
        sweep_id: Optional[str] = None,
    ) -> RunModel:
        """Insert or update a run from its diagnostics mapping."""
        model = await self.get_by_id(run_id)
        if model is None:
            model = RunModel(id=run_id)
        model.kind = kind
        model.epsilon = epsilon
        model.content_hash = content_hash
        model.status = str(diagnostics.get("status", "completed"))
        model.message = diagnostics.get("message") or None
        model.out_dir = out_dir
        model.final_time = diagnostics.get("final_time")
        model.steps = diagnostics.get("steps")
        model.mass_drift = diagnostics.get("mass_drift")
        model.max_director = diagnostics.get("max_director")
        model.energy_drift = diagnostics.get("energy_drift")
        model.sweep_id = sweep_id
        self.session.add(model)
        await self.session.commit()
        await self.session.refresh(model)
        return model

    async def save_failure(
        self,
        run_id: str,
        kind: str,
        content_hash: str,
        message: str,
        *,
        epsilon: Optional[float] = None,
        sweep_id: Optional[str] = None,
    ) -> RunModel:
        """Record an aborted run."""
        return await self.save_summary(
            run_id,
            kind,
            content_hash,
            {"status": "failed", "message": message},
            epsilon=epsilon,
            sweep_id=sweep_id,
        )

    async def save_metrics(self, run_id: str, metrics: Mapping[str, Optional[float]]) -> list[MetricModel]:
        """Replace the metrics of a run; None values are skipped."""
        await self.session.execute(delete(MetricModel).where(MetricModel.run_id == run_id))
        models = [
            MetricModel(run_id=run_id, name=name, value=float(value))
            for name, value in sorted(metrics.items())
            if value is not None
        ]
        self.session.add_all(models)
        await self.session.commit()
        return models

    async def get_by_id(self, run_id: str) -> Optional[RunModel]:
        """Get run by catalog ID."""
        result = await self.session.scalars(select(RunModel).where(RunModel.id == run_id))
        return cast(Optional[RunModel], result.one_or_none())

    async def list_all(
        self,
        limit: Optional[int] = None,
        offset: int = 0,
        order_by: str = "created_at",
        kind: Optional[str] = None,
    ) -> list[RunModel]:
        """List catalogued runs."""
        order_column = _resolve_order_column(order_by)
        stmt = select(RunModel)
        if kind:
            stmt = stmt.where(RunModel.kind == kind)
        stmt = stmt.order_by(order_column, RunModel.id)
        if offset:
            stmt = stmt.offset(offset)
        if limit is not None:
            stmt = stmt.limit(limit)
        result = await self.session.execute(stmt)
        return list(result.scalars())

    async def list_for_sweep(self, sweep_id: str) -> list[RunModel]:
        """Runs of one sweep, largest epsilon first (reference last)."""
        result = await self.session.execute(select(RunModel).where(RunModel.sweep_id == sweep_id))
        runs = list(result.scalars())
        return sorted(runs, key=lambda run: -(run.epsilon if run.epsilon is not None else -1.0))

    async def metrics_for(self, run_id: str) -> dict[str, float]:
        result = await self.session.execute(
            select(MetricModel).where(MetricModel.run_id == run_id).order_by(MetricModel.name)
        )
        return {metric.name: metric.value for metric in result.scalars()}


def _resolve_order_column(order_by: str):
    column = getattr(RunModel, order_by, None)
    if column is None:
        raise ValueError(f"Invalid order_by column: {order_by}")
    return column
