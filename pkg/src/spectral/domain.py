"""Domain description shared by the spectral and field packages."""

from __future__ import annotations

import math
from enum import Enum
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field

if TYPE_CHECKING:
    from src.config.settings import DomainSettings


class DomainKind(str, Enum):
    """Supported geometries."""

    RECTANGLE = "rectangle2d"
    SLAB = "slab1d"


class Domain(BaseModel):
    """A rectangle [0, Lx] x [0, Ly] or the slab [0, Lx].

    ``Ly`` is carried for slabs but never used.
    """

    model_config = ConfigDict(frozen=True)

    kind: DomainKind = DomainKind.RECTANGLE
    Lx: float = Field(default=math.pi, gt=0)
    Ly: float = Field(default=math.pi, gt=0)

    @classmethod
    def rectangle(cls, Lx: float = math.pi, Ly: float = math.pi) -> "Domain":  # noqa: N803
        return cls(kind=DomainKind.RECTANGLE, Lx=Lx, Ly=Ly)

    @classmethod
    def slab(cls, Lx: float = math.pi) -> "Domain":  # noqa: N803
        return cls(kind=DomainKind.SLAB, Lx=Lx)

    @classmethod
    def from_settings(cls, settings: "DomainSettings") -> "Domain":
        """Build a domain from the ``domain`` configuration section."""
        return cls(kind=DomainKind(settings.kind), Lx=settings.Lx, Ly=settings.Ly)

    @property
    def is_slab(self) -> bool:
        return self.kind == DomainKind.SLAB

    @property
    def dim(self) -> int:
        """Number of spatial dimensions."""
        return 1 if self.is_slab else 2

    @property
    def extents(self) -> tuple[float, ...]:
        return (self.Lx,) if self.is_slab else (self.Lx, self.Ly)

    @property
    def measure(self) -> float:
        """Length of the slab or area of the rectangle."""
        return math.prod(self.extents)
