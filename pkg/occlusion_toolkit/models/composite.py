# SPDX-License-Identifier: Apache-2.0

"""Composite thin occluders: randomly translated alpha-blended overlays."""

from typing import Optional, Tuple

import numpy as np

from ..core.exceptions import DimensionError
from ..core.rng import RngStream
from ..guidance.maps import BinaryMask
from ..imaging.image import Image
from .params import CompositeParams, Overlay


def _translation(
    scene: Image, params: CompositeParams, rng: Optional[RngStream]
) -> Tuple[int, int]:
    height, width = scene.shape
    h, w = params.overlay_image.shape
    if h > height or w > width:
        raise DimensionError(
            f"Overlay {w}x{h} is larger than scene {width}x{height}"
        )
    if params.translation is not None:
        dx, dy = params.translation
        if not (0 <= dx <= width - w and 0 <= dy <= height - h):
            raise DimensionError(f"Translation {params.translation} leaves the scene")
        return int(dx), int(dy)
    rng = rng or RngStream(params.seed)
    dx = int(rng.integers(0, width - w + 1))
    dy = int(rng.integers(0, height - h + 1))
    return dx, dy


def render_composite(
    scene: Image,
    params: CompositeParams,
    rng: Optional[RngStream] = None,
    mask: Optional[BinaryMask] = None,
) -> Overlay:
    """Place the overlay at a uniformly drawn valid offset; zero elsewhere."""
    dx, dy = _translation(scene, params, rng)
    height, width = scene.shape
    h, w = params.overlay_image.shape
    color = np.zeros((height, width, 3))
    alpha = np.zeros((height, width))
    color[dy : dy + h, dx : dx + w] = params.overlay_image.data
    alpha[dy : dy + h, dx : dx + w] = params.overlay_alpha
    if mask is not None:
        mask.check_matches(scene.shape)
        alpha *= mask.data
    return Overlay(color, alpha)


def fence_overlay(
    width: int,
    height: int,
    spacing: int = 12,
    thickness: int = 2,
    opacity: float = 0.85,
    tone: float = 0.25,
) -> CompositeParams:
    """Fence-like grid occluder."""
    yy, xx = np.mgrid[0:height, 0:width]
    wire = ((xx + yy) % spacing < thickness) | ((xx - yy) % spacing < thickness)
    return CompositeParams(
        overlay_image=Image.full(width, height, tone),
        overlay_alpha=wire.astype(np.float64) * opacity,
    )


def watermark_overlay(
    width: int, height: int, band: int = 6, opacity: float = 0.35
) -> CompositeParams:
    """Semi-transparent white stamp: a framed box with diagonal bands."""
    yy, xx = np.mgrid[0:height, 0:width]
    frame = (
        (xx < band // 2)
        | (yy < band // 2)
        | (xx >= width - band // 2)
        | (yy >= height - band // 2)
    )
    stripes = ((xx + 2 * yy) // band) % 3 == 0
    return CompositeParams(
        overlay_image=Image.full(width, height, 1.0),
        overlay_alpha=(frame | stripes).astype(np.float64) * opacity,
    )
