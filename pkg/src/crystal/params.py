"""Coefficients of the scaled compressible nematic system."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field

if TYPE_CHECKING:
    from src.config.settings import ParamsSettings


class ModelParams(BaseModel):
    """γ, ε, μ, λ, θ and σ₀ for one run."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(default=2.0, gt=1.5)
    epsilon: float = Field(default=0.1, gt=0, lt=1)
    mu: float = Field(default=1.0, gt=0)
    lambda_: float = Field(default=1.0, gt=0)
    theta: float = Field(default=1.0, gt=0)
    sigma0: float = Field(default=0.2, gt=0)

    @classmethod
    def from_settings(cls, settings: "ParamsSettings") -> "ModelParams":
        return cls(
            gamma=settings.gamma,
            epsilon=settings.epsilon,
            mu=settings.mu,
            lambda_=settings.lambda_,
            theta=settings.theta,
            sigma0=settings.sigma0,
        )

    def with_epsilon(self, epsilon: float) -> "ModelParams":
        return self.model_copy(update={"epsilon": epsilon})

    @property
    def kappa(self) -> float:
        """Lebesgue exponent of the sharp density rate, min(2, γ)."""
        return min(2.0, self.gamma)

    @property
    def alpha(self) -> float:
        """Exponent of the mode-amplitude consistency bound."""
        return min(1.0 - 1.0 / self.kappa, 0.5 - 1.0 / (2.0 * self.gamma))

    @property
    def sound_speed(self) -> float:
        """Linearized sound speed √γ about ρ = 1."""
        return math.sqrt(self.gamma)

    @property
    def acoustic_epsilon(self) -> float:
        """ε/√γ: the Mach parameter of the equivalent unit-speed wave system."""
        return self.epsilon / self.sound_speed
