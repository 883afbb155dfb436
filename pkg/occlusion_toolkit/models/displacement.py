# SPDX-License-Identifier: Apache-2.0

"""Refraction displacement rasters (U, V) used by the raindrop model.

A drop at (u, v) shows, at its local pixel (u_i, v_i), the scene sample at
``(u + U(u_i, v_i) * rho, v + V(u_i, v_i) * rho)``. U and V are indexed in
drop-local coordinates normalized to [-1, 1] over the drop's extent.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..imaging.io import read_pgm16, write_pgm16
from .constants import (
    DISPLACEMENT_LIMIT,
    DISPLACEMENT_SCALE,
    DISPLACEMENT_SIZE,
    DISPLACEMENT_ZERO,
)

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class DisplacementField:
    """Horizontal (u) and vertical (v) offsets in pixels, both (n, n)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.v.shape or self.u.ndim != 2:
            raise ValueError(
                f"Displacement rasters must be equal 2-D shapes, got {self.u.shape} "
                f"and {self.v.shape}"
            )

    @property
    def size(self) -> Tuple[int, int]:
        return self.u.shape

    def at(
        self, dx: np.ndarray, dy: np.ndarray, extent: float
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Nearest-cell offsets for drop-local pixel offsets ``(dx, dy)``.

        Args:
            dx: Horizontal offsets from the drop centre, in pixels
            dy: Vertical offsets from the drop centre, in pixels
            extent: Drop extent in pixels mapped onto the raster half-width

        Returns:
            (U, V) arrays shaped like ``dx``
        """
        rows, cols = self.u.shape
        col = np.rint((np.asarray(dx) / extent + 1.0) * 0.5 * (cols - 1)).astype(int)
        row = np.rint((np.asarray(dy) / extent + 1.0) * 0.5 * (rows - 1)).astype(int)
        col = np.clip(col, 0, cols - 1)
        row = np.clip(row, 0, rows - 1)
        return self.u[row, col], self.v[row, col]


def radial_displacement_field(
    size: int = DISPLACEMENT_SIZE, limit: float = DISPLACEMENT_LIMIT
) -> DisplacementField:
    """Smooth radially-symmetric lens-like field inverting the view through a drop."""
    axis = np.linspace(-1.0, 1.0, size)
    a, b = np.meshgrid(axis, axis)
    falloff = 1.0 - 0.5 * (a**2 + b**2)
    return DisplacementField(u=-limit * a * falloff, v=-limit * b * falloff)


def _encode(offsets: np.ndarray) -> np.ndarray:
    return np.clip(
        np.rint(offsets * DISPLACEMENT_SCALE + DISPLACEMENT_ZERO), 0, 65535
    ).astype(np.int64)


def _decode(values: np.ndarray) -> np.ndarray:
    return (values.astype(np.float64) - DISPLACEMENT_ZERO) / DISPLACEMENT_SCALE


def save_displacement(
    field: DisplacementField, u_path: PathLike, v_path: PathLike
) -> None:
    """Write the field as the ``udisp.pgm`` / ``vdisp.pgm`` pair."""
    write_pgm16(_encode(field.u), u_path)
    write_pgm16(_encode(field.v), v_path)


def load_displacement(u_path: PathLike, v_path: PathLike) -> DisplacementField:
    """Read a signed-offset PGM pair, offset = (value - 32768) / 2048 pixels."""
    return DisplacementField(
        u=_decode(read_pgm16(u_path)), v=_decode(read_pgm16(v_path))
    )
