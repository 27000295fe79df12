"""Analysis result models."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field


class LayerR1(BaseModel):
    """R1 statistics of one layer."""

    layer: int
    neurons: int
    r1_fraction: float = Field(ge=0, le=1)
    mean_radius: float
    radii: list[float] = Field(default_factory=list, repr=False)


class R1Report(BaseModel):
    """Per-layer fraction of neurons on the unit sphere."""

    tolerance: float = Field(gt=0)
    layers: list[LayerR1] = Field(default_factory=list)


class BoundingBox(BaseModel):
    """Inclusive input-space pixel box; may extend past the image border."""

    y0: int
    x0: int
    y1: int
    x1: int

    @property
    def height(self) -> int:
        return self.y1 - self.y0 + 1

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    def clipped(self, height: int, width: int) -> "BoundingBox":
        """The box restricted to an image of the given size."""
        return BoundingBox(
            y0=max(self.y0, 0),
            x0=max(self.x0, 0),
            y1=min(self.y1, height - 1),
            x1=min(self.x1, width - 1),
        )


class PatchActivation(BaseModel):
    """One of a neuron's top-activating input patches."""

    image_index: int
    y: int = Field(description="Row in the layer's convolution map")
    x: int = Field(description="Column in the layer's convolution map")
    box: BoundingBox
    activation: float


@dataclass
class ReceptiveField:
    """Unit-norm input synthesized to maximize a neuron's linear response."""

    image: npt.NDArray[np.float64]
    layer: int
    neuron: int
    activation: float
    iterations: int
    converged: bool

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.image))
