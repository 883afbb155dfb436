# SPDX-License-Identifier: Apache-2.0

"""Parameter records and the rendered Overlay layer."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..core.exceptions import DimensionError, ParameterError
from ..imaging.image import Image
from .constants import (
    DEFAULT_ATMOSPHERIC_LIGHT,
    DEFAULT_DROP_TYPES,
    DEFAULT_THICKNESS_RANGE,
    DROP_TYPE_COUNT,
)


class RaindropVariant(str, Enum):
    """Raindrop model complexity."""

    FULL = "full"
    REFRACT = "refract"  # circular drops, constant thickness
    GAUSSIAN = "gaussian"  # fixed-colour gaussian blobs, no refraction


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParameterError(message)


@dataclass(frozen=True)
class DropType:
    shape: float
    size: float
    frequency: float

    def __post_init__(self):
        _require(math.isfinite(self.shape), "drop shape must be finite")
        _require(self.size > 0, f"drop size must be > 0, got {self.size}")
        _require(self.frequency >= 0, f"drop frequency must be >= 0, got {self.frequency}")


def _default_drop_types() -> Tuple[DropType, ...]:
    return tuple(DropType(*values) for values in DEFAULT_DROP_TYPES)


@dataclass(frozen=True)
class RaindropParams:
    sigma: float = 3.0
    drop_types: Tuple[DropType, ...] = field(default_factory=_default_drop_types)
    thickness_range: Tuple[float, float] = DEFAULT_THICKNESS_RANGE
    seed: int = 0
    variant: RaindropVariant = RaindropVariant.FULL

    def __post_init__(self):
        _require(self.sigma >= 0, f"sigma must be >= 0, got {self.sigma}")
        _require(
            len(self.drop_types) == DROP_TYPE_COUNT,
            f"exactly {DROP_TYPE_COUNT} drop types required, got {len(self.drop_types)}",
        )
        lo, hi = self.thickness_range
        _require(lo <= hi, f"thickness range must satisfy min <= max, got {self.thickness_range}")
        object.__setattr__(self, "variant", RaindropVariant(self.variant))


@dataclass(frozen=True)
class DirtParams:
    sigma: float = 2.0
    alpha: float = 0.6
    blob_frequency: float = 300.0
    blob_size: float = 10.0
    seed: int = 0

    def __post_init__(self):
        _require(self.sigma >= 0, f"sigma must be >= 0, got {self.sigma}")
        _require(0.0 <= self.alpha <= 1.0, f"alpha must lie in [0, 1], got {self.alpha}")
        _require(self.blob_frequency >= 0, "blob_frequency must be >= 0")
        _require(self.blob_size > 0, "blob_size must be > 0")


@dataclass(frozen=True)
class FogParams:
    beta: float = 0.01
    atmospheric_light: Tuple[float, float, float] = DEFAULT_ATMOSPHERIC_LIGHT

    def __post_init__(self):
        _require(self.beta >= 0, f"beta must be >= 0, got {self.beta}")
        _require(
            len(self.atmospheric_light) == 3
            and all(0.0 <= c <= 1.0 for c in self.atmospheric_light),
            "atmospheric_light components must lie in [0, 1]",
        )


@dataclass(frozen=True)
class CompositeParams:
    overlay_image: Image
    overlay_alpha: np.ndarray
    translation: Optional[Tuple[int, int]] = None
    seed: int = 0

    def __post_init__(self):
        alpha = np.asarray(self.overlay_alpha, dtype=np.float64)
        if alpha.shape != self.overlay_image.shape:
            raise DimensionError(
                f"overlay alpha {alpha.shape} does not match overlay image "
                f"{self.overlay_image.shape}"
            )
        _require(bool(np.all((alpha >= 0) & (alpha <= 1))), "overlay alpha must lie in [0, 1]")
        alpha.setflags(write=False)
        object.__setattr__(self, "overlay_alpha", alpha)


@dataclass(frozen=True, eq=False)
class Overlay:
    """A rendered model layer: colour raster W plus per-pixel opacity alpha_w."""

    color: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        color = np.asarray(self.color, dtype=np.float64)
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if color.ndim != 3 or color.shape[2] != 3 or alpha.shape != color.shape[:2]:
            raise DimensionError(
                f"Overlay color {color.shape} and alpha {alpha.shape} are inconsistent"
            )
        color = np.clip(color, 0.0, 1.0)
        alpha = np.clip(alpha, 0.0, 1.0)
        color.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "color", color)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def empty(cls, height: int, width: int) -> "Overlay":
        return cls(np.zeros((height, width, 3)), np.zeros((height, width)))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.alpha.shape

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Overlay)
            and np.array_equal(self.color, other.color)
            and np.array_equal(self.alpha, other.alpha)
        )

    __hash__ = None  # type: ignore[assignment]
