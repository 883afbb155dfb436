# SPDX-License-Identifier: Apache-2.0

"""Guidance map and injection mask rasters."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.exceptions import DimensionError


@dataclass(frozen=True, eq=False)
class GuidanceMap:
    """Dataset-averaged saliency in [0, 1], shape (height, width)."""

    data: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.data, dtype=np.float64)
        if array.ndim != 2:
            raise DimensionError(f"GuidanceMap must be 2-D, got {array.shape}")
        if not np.all(np.isfinite(array)) or array.min() < 0 or array.max() > 1:
            raise ValueError("GuidanceMap values must lie in [0, 1]")
        array.setflags(write=False)
        object.__setattr__(self, "data", array)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean raster; True where model injection is allowed."""

    data: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.data, dtype=bool)
        if array.ndim != 2:
            raise DimensionError(f"BinaryMask must be 2-D, got {array.shape}")
        array.setflags(write=False)
        object.__setattr__(self, "data", array)

    @classmethod
    def allow_all(cls, height: int, width: int) -> "BinaryMask":
        return cls(np.ones((height, width), dtype=bool))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def check_matches(self, shape: Tuple[int, int]) -> None:
        if self.shape != tuple(shape):
            raise DimensionError(f"Mask {self.shape} does not match raster {tuple(shape)}")

    def issubset(self, other: "BinaryMask") -> bool:
        return bool(np.all(~self.data | other.data))

    def coverage(self) -> float:
        """Fraction of pixels where injection is allowed."""
        return float(self.data.mean())
