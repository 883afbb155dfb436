# SPDX-License-Identifier: Apache-2.0

"""Disentanglement guidance: dataset-averaged critic saliency and its mask."""

from pathlib import Path
from typing import Sequence, Union

import numpy as np
from loguru import logger

from ..core.exceptions import DimensionError, ParameterError
from ..core.pool import ordered_map
from ..critic.critic import Critic
from ..imaging.blur import blur_array
from ..imaging.image import Image
from ..imaging.io import read_pbm, read_pgm16, write_pbm, write_pgm16
from .maps import BinaryMask, GuidanceMap

PathLike = Union[str, Path]

ZERO_MAP_THRESHOLD = 1e-12
PGM_SCALE = 65535


def saliency(critic: Critic, img: Image) -> np.ndarray:
    """|d score / d pixel| summed over channels, smoothed at patch scale."""
    gradient = np.abs(critic.input_gradient(img)).sum(axis=2)
    return blur_array(gradient, float(critic.patch_size))


def compute_guidance(
    critic: Critic, sources: Sequence[Image], threads: int = 0
) -> GuidanceMap:
    """Average per-image saliency over the sources and min-max normalize it.

    Args:
        critic: Critic fitted on the target domain
        sources: Source images, all of the same size
        threads: Worker cap for per-image saliency

    Returns:
        GuidanceMap in [0, 1]; all zeros when the averaged map vanishes

    Raises:
        ValueError: No sources
        DimensionError: Mixed image sizes
    """
    if not sources:
        raise ValueError("compute_guidance needs at least one source image")
    shape = sources[0].shape
    for img in sources:
        if img.shape != shape:
            raise DimensionError(
                f"mixed image sizes: {img.shape} differs from {shape}"
            )

    maps = ordered_map(lambda img: saliency(critic, img), sources, threads)
    averaged = np.mean(maps, axis=0)

    peak, floor = float(averaged.max()), float(averaged.min())
    if peak < ZERO_MAP_THRESHOLD:
        logger.info("Critic saliency vanishes on the sources; guidance map is empty")
        return GuidanceMap(np.zeros(shape))
    if peak - floor < ZERO_MAP_THRESHOLD:
        return GuidanceMap(np.ones(shape))
    logger.debug(f"Guidance saliency range [{floor:.3g}, {peak:.3g}]")
    return GuidanceMap((averaged - floor) / (peak - floor))


def injection_mask(dg: GuidanceMap, gamma: float) -> BinaryMask:
    """Allow injection where dg < gamma."""
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError(f"gamma must lie in [0, 1], got {gamma}")
    return BinaryMask(dg.data < gamma)


def mask_coverage(mask: BinaryMask) -> float:
    return mask.coverage()


def save_guidance(dg: GuidanceMap, path: PathLike) -> None:
    """Write the map as 16-bit PGM, value = round(dg * 65535)."""
    write_pgm16(np.rint(dg.data * PGM_SCALE).astype(np.int64), path)


def load_guidance(path: PathLike) -> GuidanceMap:
    return GuidanceMap(read_pgm16(path).astype(np.float64) / PGM_SCALE)


def save_mask(mask: BinaryMask, path: PathLike) -> None:
    write_pbm(mask.data, path)


def load_mask(path: PathLike) -> BinaryMask:
    return BinaryMask(read_pbm(path))
