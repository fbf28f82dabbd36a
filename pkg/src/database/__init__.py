"""Run catalog models and operations module."""

from src.database.models import Base, MetricModel, RunModel
from src.database.repository import RunRepository, build_async_db_url, create_engine, get_session, init_db

__all__ = [
    "Base",
    "MetricModel",
    "RunModel",
    "RunRepository",
    "build_async_db_url",
    "create_engine",
    "get_session",
    "init_db",
]
