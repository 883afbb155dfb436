# SPDX-License-Identifier: Apache-2.0

"""Dirt occlusion model: opaque soil blobs, brighter towards the periphery."""

from typing import Optional, Tuple

import numpy as np

from ..core.rng import RngStream
from ..guidance.maps import BinaryMask
from ..imaging.blur import blur_array
from ..imaging.image import Image
from .constants import (
    DIRT_BLOB_SHAPE,
    DIRT_CENTER_BRIGHTNESS,
    DIRT_EDGE_BRIGHTNESS,
    DIRT_SOIL_TONE,
)
from .drops import drop_footprint, sample_drops
from .params import DirtParams, DropType, Overlay


def soil_tone_field(
    height: int, width: int, tone: Tuple[float, float, float] = DIRT_SOIL_TONE
) -> np.ndarray:
    """Soil colour whose brightness grows linearly with distance from the centre."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    r_max = np.hypot(cx, cy) or 1.0
    radial = np.hypot(xx - cx, yy - cy) / r_max
    brightness = DIRT_CENTER_BRIGHTNESS + (
        DIRT_EDGE_BRIGHTNESS - DIRT_CENTER_BRIGHTNESS
    ) * radial
    return np.clip(np.asarray(tone)[None, None, :] * brightness[..., None], 0.0, 1.0)


def dirt_coverage(
    height: int,
    width: int,
    params: DirtParams,
    rng: RngStream,
    mask: Optional[BinaryMask] = None,
) -> np.ndarray:
    """Binary blob coverage before blur and opacity scaling."""
    blob_type = DropType(
        shape=DIRT_BLOB_SHAPE, size=params.blob_size, frequency=params.blob_frequency
    )
    coverage = np.zeros((height, width))
    for blob in sample_drops(width, height, [blob_type], rng, mask=mask):
        footprint = drop_footprint(blob, height, width)
        if footprint is not None:
            coverage[footprint.rows, footprint.cols][footprint.inside] = 1.0
    if mask is not None:
        coverage *= mask.data
    return coverage


def render_dirt(
    scene: Image,
    params: DirtParams,
    rng: Optional[RngStream] = None,
    mask: Optional[BinaryMask] = None,
) -> Overlay:
    """Render dirt blobs; alpha_w = alpha * blur(coverage, sigma) <= alpha."""
    if mask is not None:
        mask.check_matches(scene.shape)
    rng = rng or RngStream(params.seed)
    coverage = dirt_coverage(scene.height, scene.width, params, rng, mask)
    alpha = params.alpha * blur_array(coverage, params.sigma)
    if mask is not None:
        alpha = alpha * mask.data
    return Overlay(soil_tone_field(scene.height, scene.width), alpha)
