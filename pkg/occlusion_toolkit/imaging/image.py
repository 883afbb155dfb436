# SPDX-License-Identifier: Apache-2.0

"""Immutable raster containers."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.exceptions import DimensionError


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Image:
    """RGB raster, float64 samples in [0, 1], shape (height, width, 3).

    Samples are clamped to [0, 1] on construction, so every public operation
    returning an Image upholds the range invariant.
    """

    data: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.data, dtype=np.float64)
        if array.ndim != 3 or array.shape[2] != 3:
            raise DimensionError(f"Image data must be (H, W, 3), got {array.shape}")
        if array.shape[0] == 0 or array.shape[1] == 0:
            raise DimensionError("Image must not be empty")
        if not np.all(np.isfinite(array)):
            raise ValueError("Image samples must be finite")
        object.__setattr__(self, "data", _frozen(np.clip(array, 0.0, 1.0)))

    @classmethod
    def full(cls, width: int, height: int, value=0.0) -> "Image":
        color = np.broadcast_to(np.asarray(value, dtype=np.float64), (3,))
        return cls(np.tile(color, (height, width, 1)))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        """(height, width)."""
        return self.data.shape[:2]

    def __eq__(self, other) -> bool:
        return isinstance(other, Image) and np.array_equal(self.data, other.data)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class DepthMap:
    """Per-pixel scene depth, shape (height, width).

    Values are strictly positive; ``+inf`` marks sky pixels.
    """

    data: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.data, dtype=np.float64)
        if array.ndim != 2:
            raise DimensionError(f"DepthMap data must be (H, W), got {array.shape}")
        if np.any(np.isnan(array)):
            raise ValueError("DepthMap contains NaN")
        if np.any(array <= 0):
            raise ValueError("non-positive depth")
        object.__setattr__(self, "data", _frozen(array.copy()))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def check_matches(self, image: Image) -> None:
        if self.shape != image.shape:
            raise DimensionError(
                f"Depth map {self.width}x{self.height} does not match image "
                f"{image.width}x{image.height}"
            )
