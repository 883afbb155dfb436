# SPDX-License-Identifier: Apache-2.0

"""Raindrop occlusion model: refractive drops blurred by a Gaussian PSF."""

from typing import Optional, Sequence

import numpy as np
from scipy.ndimage import map_coordinates

from ..core.rng import RngStream
from ..guidance.maps import BinaryMask
from ..imaging.blur import blur_array
from ..imaging.image import Image
from .cache import get_displacement_field
from .constants import GAUSSIAN_DROP_COLOR
from .displacement import DisplacementField
from .drops import Drop, drop_footprint, sample_drops
from .params import Overlay, RaindropParams, RaindropVariant


def layer_from_coverage(
    coverage: np.ndarray, color: np.ndarray, sigma: float
) -> Overlay:
    """Blur a coverage/colour layer into an Overlay.

    Colour is blurred premultiplied by coverage and divided back by the
    blurred coverage, so the composite equals
    ``(1 - blur(c)) * scene + blur(c * color)``.
    """
    alpha = blur_array(coverage, sigma)
    blurred = blur_array(color * coverage[..., None], sigma)
    out = np.zeros_like(blurred)
    visible = alpha > 1e-12
    out[visible] = blurred[visible] / alpha[visible, None]
    return Overlay(out, alpha)


def _paint_refractive(
    scene: Image,
    drop: Drop,
    field: DisplacementField,
    coverage: np.ndarray,
    color: np.ndarray,
) -> None:
    height, width = scene.shape
    footprint = drop_footprint(drop, height, width)
    if footprint is None or not footprint.inside.any():
        return
    inside = footprint.inside
    u_off, v_off = field.at(footprint.dx[inside], footprint.dy[inside], drop.extent)
    # Sampling coordinates outside the raster clamp to the border
    coords = np.vstack(
        [drop.cy + v_off * drop.thickness, drop.cx + u_off * drop.thickness]
    )
    for channel in range(3):
        color[footprint.rows, footprint.cols, channel][inside] = map_coordinates(
            scene.data[..., channel], coords, order=1, mode="nearest"
        )
    coverage[footprint.rows, footprint.cols][inside] = 1.0


def _paint_gaussian(
    drop: Drop, height: int, width: int, coverage: np.ndarray, color: np.ndarray
) -> None:
    footprint = drop_footprint(drop, height, width)
    if footprint is None:
        return
    spread = drop.size / 2.5
    weight = np.exp(-(footprint.dx**2 + footprint.dy**2) / (2.0 * spread**2))
    region_coverage = coverage[footprint.rows, footprint.cols]
    region_color = color[footprint.rows, footprint.cols]
    stronger = weight > region_coverage
    region_coverage[stronger] = weight[stronger]
    region_color[stronger] = GAUSSIAN_DROP_COLOR


def render_drops(
    scene: Image,
    drops: Sequence[Drop],
    sigma: float,
    field: Optional[DisplacementField] = None,
    variant: RaindropVariant = RaindropVariant.FULL,
    mask: Optional[BinaryMask] = None,
) -> Overlay:
    """Render an explicit drop list over ``scene``.

    Inside each drop the colour is the scene sampled (bilinearly) at the
    displaced coordinates; later drops paint over earlier ones. The layer is
    then blurred with ``sigma`` and the blurred coverage becomes alpha_w,
    zeroed wherever ``mask`` forbids injection.
    """
    height, width = scene.shape
    if mask is not None:
        mask.check_matches(scene.shape)
    field = field or get_displacement_field()
    coverage = np.zeros((height, width))
    color = np.zeros((height, width, 3))

    for drop in drops:
        if variant is RaindropVariant.GAUSSIAN:
            _paint_gaussian(drop, height, width, coverage, color)
        else:
            _paint_refractive(scene, drop, field, coverage, color)

    if mask is not None:
        coverage *= mask.data
    layer = layer_from_coverage(coverage, color, sigma)
    if mask is not None:
        # the PSF spreads alpha across the mask boundary
        layer = Overlay(layer.color, layer.alpha * mask.data)
    return layer


def render_raindrops(
    scene: Image,
    params: RaindropParams,
    rng: Optional[RngStream] = None,
    mask: Optional[BinaryMask] = None,
    field: Optional[DisplacementField] = None,
) -> Overlay:
    """Sample drops for ``params`` and render them over ``scene``."""
    rng = rng or RngStream(params.seed)
    drops = sample_drops(
        scene.width,
        scene.height,
        params.drop_types,
        rng,
        params.thickness_range,
        params.variant,
        mask,
    )
    return render_drops(scene, drops, params.sigma, field, params.variant, mask)
