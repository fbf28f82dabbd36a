"""Configuration settings for NematicLimit."""

import hashlib
import json
import logging
import math
import os
from functools import lru_cache
from pathlib import Path
from typing import List, Optional

import yaml
from pydantic import AliasChoices, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.errors import ConfigError

NORM_NAMES = ["rho_Lgamma", "rho_Lkappa", "u_L2L2", "d_L2H1", "Q1u_L2L2"]
PROFILES = ["equilibrium", "vortex", "acoustic", "director", "random"]


class DomainSettings(BaseSettings):
    """Geometry of the computational domain."""

    kind: str = Field(default="rectangle2d", description="rectangle2d or slab1d")
    Lx: float = Field(default=math.pi, gt=0, description="Length along x")
    Ly: float = Field(default=math.pi, gt=0, description="Length along y (ignored for slabs)")

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v: str) -> str:
        """Validate the domain kind."""
        if v not in ("rectangle2d", "slab1d"):
            raise ValueError(f"Invalid domain kind: {v}. Must be rectangle2d or slab1d")
        return v

    model_config = SettingsConfigDict(env_prefix="DOMAIN_")


class GridSettings(BaseSettings):
    """Uniform grid resolution."""

    nx: int = Field(default=64, ge=8, description="Cells along x")
    ny: int = Field(default=64, ge=8, description="Cells along y (ignored for slabs)")

    model_config = SettingsConfigDict(env_prefix="GRID_")


class ParamsSettings(BaseSettings):
    """Physical coefficients of the scaled system."""

    gamma: float = Field(default=2.0, gt=1.5, description="Adiabatic exponent")
    epsilon: float = Field(default=0.1, gt=0, lt=1, description="Mach number parameter")
    mu: float = Field(default=1.0, gt=0, description="Viscosity")
    lambda_: float = Field(
        default=1.0,
        gt=0,
        validation_alias=AliasChoices("lambda", "lambda_"),
        description="Elastic coupling constant",
    )
    theta: float = Field(default=1.0, gt=0, description="Director relaxation rate")
    sigma0: float = Field(default=0.2, gt=0, description="Ginzburg-Landau penalization length")

    model_config = SettingsConfigDict(env_prefix="PARAMS_", populate_by_name=True)


class TimeSettings(BaseSettings):
    """Time stepping controls."""

    T: float = Field(default=0.5, gt=0, description="Final time")
    dt: float = Field(default=2e-3, gt=0, description="Time step")
    output_stride: int = Field(default=5, ge=1, description="Steps between trajectory snapshots")
    checkpoint_every: int = Field(default=10, ge=1, description="Snapshots between checkpoint dumps")
    acoustic_theta: float = Field(default=1.0, ge=0.5, le=1.0, description="Time centering of the acoustic solve")
    filter: float = Field(default=0.05, ge=0, lt=1, description="Fourth-difference filter strength per step")
    energy_tolerance: float = Field(default=0.05, gt=0, description="Relative ledger growth that aborts a run")

    model_config = SettingsConfigDict(env_prefix="TIME_")


class InitSettings(BaseSettings):
    """Initial data profile."""

    profile: str = Field(default="vortex", description="Initial profile name")
    amplitude: float = Field(default=0.5, ge=0, description="Velocity (or acoustic) amplitude")
    gradient_fraction: float = Field(default=0.5, ge=0, description="Weight of the gradient part of u0")
    seed: int = Field(default=0, ge=0, description="Seed for the random profile")

    @field_validator("profile")
    @classmethod
    def validate_profile(cls, v: str) -> str:
        """Validate the profile name."""
        if v not in PROFILES:
            raise ValueError(f"Invalid initial profile: {v}. Must be one of {PROFILES}")
        return v

    model_config = SettingsConfigDict(env_prefix="INIT_")


class ModesSettings(BaseSettings):
    """Spectral basis options."""

    count: int = Field(default=32, ge=1, description="Retained nonconstant modes")
    h_tolerance: float = Field(default=1e-8, gt=0, description="Boundary trace constancy tolerance")
    steps_per_period: int = Field(default=8, ge=1, description="Mode samples per shortest acoustic period")

    model_config = SettingsConfigDict(env_prefix="MODES_")


class WaveSettings(BaseSettings):
    """Linearized acoustic runs."""

    steps_per_period: int = Field(default=32, ge=8, description="Time steps per acoustic period")
    periods: float = Field(default=6.0, gt=0, description="Run length in periods of the tracked mode")
    mode: List[int] = Field(default_factory=lambda: [1, 0], description="Tracked mode index")
    suite_epsilons: List[float] = Field(
        default_factory=lambda: [0.04, 0.01, 0.0025], description="Mach parameters of the damping suite"
    )

    @field_validator("suite_epsilons")
    @classmethod
    def validate_suite_epsilons(cls, v: List[float]) -> List[float]:
        """Require epsilons in (0, 1), sorted in decreasing order."""
        if any(not 0 < eps < 1 for eps in v):
            raise ValueError(f"Every epsilon must lie in (0, 1), got {v}")
        return sorted(v, reverse=True)

    model_config = SettingsConfigDict(env_prefix="WAVE_")


class SweepSettings(BaseSettings):
    """Epsilon sweep options."""

    epsilons: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025], description="Mach parameters")
    norms: List[str] = Field(default_factory=lambda: list(NORM_NAMES), description="Reported norms")
    workers: int = Field(default=1, ge=1, description="Worker processes")
    refinement_check: bool = Field(default=True, description="Measure the grid-refinement floor")

    @field_validator("epsilons")
    @classmethod
    def validate_epsilons(cls, v: List[float]) -> List[float]:
        """Require epsilons in (0, 1), sorted in decreasing order."""
        if not v:
            raise ValueError("At least one epsilon is required")
        if any(not 0 < eps < 1 for eps in v):
            raise ValueError(f"Every epsilon must lie in (0, 1), got {v}")
        return sorted(v, reverse=True)

    @field_validator("norms")
    @classmethod
    def validate_norms(cls, v: List[str]) -> List[str]:
        """Validate norm names."""
        unknown = [name for name in v if name not in NORM_NAMES]
        if unknown:
            raise ValueError(f"Unknown norms: {unknown}. Must be among {NORM_NAMES}")
        return v

    model_config = SettingsConfigDict(env_prefix="SWEEP_")


class OutputSettings(BaseSettings):
    """Output locations."""

    dir: str = Field(default="runs", description="Directory for run artifacts")

    model_config = SettingsConfigDict(env_prefix="OUTPUT_")


class DatabaseSettings(BaseSettings):
    """Database configuration settings."""

    url: str = Field(
        default="sqlite:///~/.nematiclimit/catalog.db",
        description="Database connection URL",
    )

    @field_validator("url")
    @classmethod
    def expand_path(cls, v: str) -> str:
        """Expand user home directory in database URL."""
        if v.startswith("sqlite:///~/"):
            expanded = v.replace("sqlite:///~/", f"sqlite:///{Path.home()}/")
            return expanded
        return v

    model_config = SettingsConfigDict(env_prefix="DATABASE_")


class LoggingSettings(BaseSettings):
    """Logging configuration settings."""

    level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    )

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        """Validate logging level."""
        v_upper = v.upper()
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v_upper not in valid_levels:
            raise ValueError(f"Invalid logging level: {v}. Must be one of {valid_levels}")
        return v_upper

    model_config = SettingsConfigDict(env_prefix="LOGGING_")


SECTIONS = {
    "domain": DomainSettings,
    "grid": GridSettings,
    "params": ParamsSettings,
    "time": TimeSettings,
    "init": InitSettings,
    "modes": ModesSettings,
    "wave": WaveSettings,
    "sweep": SweepSettings,
    "output": OutputSettings,
    "database": DatabaseSettings,
    "logging": LoggingSettings,
}

# Sections that describe where things are stored rather than what is computed.
_UNHASHED_SECTIONS = {"output", "database", "logging"}


class Settings(BaseSettings):
    """Main application settings."""

    domain: DomainSettings = Field(default_factory=DomainSettings)
    grid: GridSettings = Field(default_factory=GridSettings)
    params: ParamsSettings = Field(default_factory=ParamsSettings)
    time: TimeSettings = Field(default_factory=TimeSettings)
    init: InitSettings = Field(default_factory=InitSettings)
    modes: ModesSettings = Field(default_factory=ModesSettings)
    wave: WaveSettings = Field(default_factory=WaveSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    database: DatabaseSettings = Field(default_factory=DatabaseSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        case_sensitive=False,
    )

    @classmethod
    def from_yaml(cls, config_path: Optional[Path] = None) -> "Settings":
        """Load settings from YAML file.

        Args:
            config_path: Path to YAML config file. If None, uses default locations.

        Returns:
            Settings instance loaded from YAML file, or defaults if none is found.

        Raises:
            ConfigError: If an explicit ``config_path`` does not exist.
        """
        if config_path is not None and not config_path.exists():
            raise ConfigError(f"Configuration file not found: {config_path}")
        if config_path is None:
            possible_paths = [
                Path("config/config.yaml"),
                Path.home() / ".nematiclimit" / "config.yaml",
            ]
            for path in possible_paths:
                if path.exists():
                    config_path = path
                    break

        if config_path is None:
            return cls(**{name: section() for name, section in SECTIONS.items()})

        with open(config_path, "r", encoding="utf-8") as f:
            config_data = yaml.safe_load(f)

        if config_data is None:
            config_data = {}
        if not isinstance(config_data, dict):
            raise ConfigError(f"Configuration file {config_path} must contain a mapping")

        unknown = sorted(set(config_data) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"Unknown configuration sections in {config_path}: {unknown}")

        return cls(**{name: section(**(config_data.get(name) or {})) for name, section in SECTIONS.items()})

    def with_epsilon(self, epsilon: float) -> "Settings":
        """Copy of these settings with a different Mach parameter."""
        if not 0 < epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
        return self.model_copy(update={"params": self.params.model_copy(update={"epsilon": epsilon})})

    def with_grid(self, nx: int, ny: int) -> "Settings":
        """Copy of these settings on another grid."""
        return self.model_copy(update={"grid": GridSettings(nx=nx, ny=ny)})

    def with_output_dir(self, directory: str) -> "Settings":
        return self.model_copy(update={"output": OutputSettings(dir=directory)})

    def hashed_payload(self) -> dict:
        """Configuration that determines numerical results, as plain JSON data."""
        return self.model_dump(mode="json", exclude=_UNHASHED_SECTIONS)

    def content_hash(self) -> str:
        """SHA-256 of the canonical JSON dump of the numerical configuration."""
        canonical = json.dumps(self.hashed_payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def setup_logging(self) -> None:
        """Configure logging based on settings."""
        logging.basicConfig(
            level=getattr(logging, self.logging.level),
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )

    def ensure_directories(self) -> None:
        """Ensure required directories exist."""
        Path(self.output.dir).mkdir(parents=True, exist_ok=True)

        # Create directory for database file if using SQLite
        if self.database.url.startswith("sqlite:///"):
            db_path = self.database.url.replace("sqlite:///", "")
            Path(db_path).parent.mkdir(parents=True, exist_ok=True)


@lru_cache()
def get_settings(config_path: Optional[Path] = None) -> Settings:
    """Get cached settings instance.

    Args:
        config_path: Optional path to config file. It takes precedence over the
            NEMALIMIT_CONFIG environment variable.

    Returns:
        Cached Settings instance.
    """
    env_config_path = os.getenv("NEMALIMIT_CONFIG")
    if config_path is None and env_config_path:
        config_path = Path(env_config_path)

    return Settings.from_yaml(config_path)
