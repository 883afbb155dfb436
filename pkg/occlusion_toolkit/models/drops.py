# SPDX-License-Identifier: Apache-2.0

"""Drop and blob geometry shared by the raindrop and dirt models."""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..core.rng import RngStream
from ..guidance.maps import BinaryMask
from .constants import (
    DROP_SIZE_SPREAD,
    MAX_PLACEMENT_TRIES,
    SHAPE_NOISE_AMPLITUDE,
    SHAPE_NOISE_HARMONICS,
    SHAPE_NOISE_WEIGHT,
)
from .params import DropType, RaindropVariant


@dataclass(frozen=True)
class Drop:
    """One drop: centre (cx, cy) in pixels, mean radius, shape coefficient,
    water thickness and the (amplitude, phase) pairs of its shape noise."""

    cx: float
    cy: float
    size: float
    shape: float = 0.0
    thickness: float = 1.0
    harmonics: Tuple[Tuple[float, float], ...] = ()

    def noise(self, phi: np.ndarray) -> np.ndarray:
        total = np.zeros_like(phi, dtype=np.float64)
        for k, (amplitude, phase) in zip(SHAPE_NOISE_HARMONICS, self.harmonics):
            total += amplitude * np.sin(k * phi + phase)
        return total

    def radius(self, phi: np.ndarray) -> np.ndarray:
        """r(phi) = s * (1 + t * sin(2 phi) + 0.1 * n(phi)), floored at 0."""
        r = self.size * (
            1.0 + self.shape * np.sin(2.0 * phi) + SHAPE_NOISE_WEIGHT * self.noise(phi)
        )
        return np.maximum(r, 0.0)

    @property
    def extent(self) -> float:
        """Upper bound of r(phi)."""
        noise_bound = sum(abs(a) for a, _ in self.harmonics)
        return self.size * (1.0 + abs(self.shape) + SHAPE_NOISE_WEIGHT * noise_bound)


class Footprint(NamedTuple):
    rows: slice
    cols: slice
    dx: np.ndarray
    dy: np.ndarray
    inside: np.ndarray


def drop_footprint(drop: Drop, height: int, width: int) -> Optional[Footprint]:
    """Pixels covered by a drop, clipped to the raster; None if off-raster."""
    reach = drop.extent + 1.0
    x0 = max(int(math.floor(drop.cx - reach)), 0)
    x1 = min(int(math.ceil(drop.cx + reach)), width - 1)
    y0 = max(int(math.floor(drop.cy - reach)), 0)
    y1 = min(int(math.ceil(drop.cy + reach)), height - 1)
    if x0 > x1 or y0 > y1:
        return None
    dx, dy = np.meshgrid(
        np.arange(x0, x1 + 1, dtype=np.float64) - drop.cx,
        np.arange(y0, y1 + 1, dtype=np.float64) - drop.cy,
    )
    inside = np.hypot(dx, dy) <= drop.radius(np.arctan2(dy, dx))
    return Footprint(slice(y0, y1 + 1), slice(x0, x1 + 1), dx, dy, inside)


def _place(
    width: int, height: int, rng: RngStream, mask: Optional[BinaryMask]
) -> Optional[Tuple[float, float]]:
    for _ in range(MAX_PLACEMENT_TRIES):
        cx = float(rng.uniform(0.0, width))
        cy = float(rng.uniform(0.0, height))
        if mask is None or mask.data[min(int(cy), height - 1), min(int(cx), width - 1)]:
            return cx, cy
    return None


def sample_drops(
    width: int,
    height: int,
    drop_types: Sequence[DropType],
    rng: RngStream,
    thickness_range: Tuple[float, float] = (1.0, 1.0),
    variant: RaindropVariant = RaindropVariant.FULL,
    mask: Optional[BinaryMask] = None,
) -> List[Drop]:
    """Draw drops for every type: count ~ Poisson(p * megapixels), uniform centres.

    Centres falling on pixels the mask forbids are redrawn; a drop is
    abandoned after MAX_PLACEMENT_TRIES rejections. The random draws do not
    depend on the variant, so all variants share drop geometry for a seed.
    """
    if mask is not None:
        mask.check_matches((height, width))
    megapixels = width * height / 1e6
    rho_lo, rho_hi = thickness_range
    drops: List[Drop] = []
    abandoned = 0

    for drop_type in drop_types:
        count = int(rng.poisson(drop_type.frequency * megapixels))
        for _ in range(count):
            center = _place(width, height, rng, mask)
            size_factor = float(rng.uniform(1.0 - DROP_SIZE_SPREAD, 1.0 + DROP_SIZE_SPREAD))
            thickness = float(rng.uniform(rho_lo, rho_hi))
            amplitudes = rng.uniform(
                -SHAPE_NOISE_AMPLITUDE, SHAPE_NOISE_AMPLITUDE, len(SHAPE_NOISE_HARMONICS)
            )
            phases = rng.uniform(0.0, 2.0 * math.pi, len(SHAPE_NOISE_HARMONICS))
            if center is None:
                abandoned += 1
                continue

            shape = drop_type.shape
            harmonics = tuple(zip(amplitudes.tolist(), phases.tolist()))
            if variant is not RaindropVariant.FULL:
                shape = 0.0
                harmonics = ()
                thickness = 0.5 * (rho_lo + rho_hi)
            drops.append(
                Drop(
                    cx=center[0],
                    cy=center[1],
                    size=drop_type.size * size_factor,
                    shape=shape,
                    thickness=thickness,
                    harmonics=harmonics,
                )
            )

    if abandoned:
        logger.debug(f"Abandoned {abandoned} drops rejected by the injection mask")
    return drops
