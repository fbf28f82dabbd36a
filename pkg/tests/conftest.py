"""Pytest configuration and shared fixtures."""

from typing import AsyncIterator

import pytest
from sqlalchemy.ext.asyncio import AsyncSession

from src.config.settings import GridSettings, ModesSettings, OutputSettings, Settings, TimeSettings
from src.database.repository import RunRepository, get_session
from src.fields.grid import Grid
from src.spectral.basis import SpectralBasis, build_basis
from src.spectral.domain import Domain


@pytest.fixture
def square_grid() -> Grid:
    """32 x 32 cells on the π-square."""
    return Grid(Domain.rectangle(), 32)


@pytest.fixture
def square_basis() -> SpectralBasis:
    """Constant mode plus the 12 lowest modes of the π-square."""
    return build_basis(Domain.rectangle(), 12)


@pytest.fixture
def small_settings(tmp_path) -> Settings:
    """A five-step run on a 16 x 16 grid that finishes in well under a second."""
    return Settings(
        grid=GridSettings(nx=16, ny=16),
        time=TimeSettings(T=0.01, dt=2e-3, output_stride=1, checkpoint_every=2),
        modes=ModesSettings(count=4),
        output=OutputSettings(dir=str(tmp_path / "out")),
    )


@pytest.fixture
async def db_session() -> AsyncIterator[AsyncSession]:
    """Yield an in-memory async database session."""
    async with get_session("sqlite:///:memory:") as session:
        yield session


@pytest.fixture
async def run_repository(db_session: AsyncSession) -> RunRepository:
    """Return a RunRepository bound to the shared session."""
    return RunRepository(db_session)
