# SPDX-License-Identifier: Apache-2.0

"""Homogeneous fog driven by a depth map (Koschmieder attenuation)."""

import math
from typing import Optional

import numpy as np

from ..guidance.maps import BinaryMask
from ..imaging.image import DepthMap, Image
from .constants import VISIBILITY_CONTRAST
from .params import FogParams, Overlay


def transmittance(depth: DepthMap, beta: float) -> np.ndarray:
    """tr = exp(-beta * d); sky (+inf) gives 0 unless beta is 0."""
    if beta == 0:
        return np.ones(depth.shape)
    return np.exp(-beta * depth.data)


def render_fog(
    scene: Image,
    depth: DepthMap,
    params: FogParams,
    mask: Optional[BinaryMask] = None,
) -> Overlay:
    """Fog layer: colour = atmospheric light, alpha_w = 1 - exp(-beta * d)."""
    depth.check_matches(scene)
    alpha = 1.0 - transmittance(depth, params.beta)
    if mask is not None:
        mask.check_matches(scene.shape)
        alpha = alpha * mask.data
    color = np.broadcast_to(
        np.asarray(params.atmospheric_light, dtype=np.float64), scene.data.shape
    )
    return Overlay(color, alpha)


def max_visibility(beta: float) -> float:
    """Distance at which contrast falls to 5%: ln(20) / beta."""
    if beta <= 0:
        return math.inf
    return math.log(1.0 / VISIBILITY_CONTRAST) / beta


def beta_from_visibility(visibility: float) -> float:
    """Inverse of :func:`max_visibility`."""
    if visibility <= 0:
        raise ValueError("visibility must be positive")
    if math.isinf(visibility):
        return 0.0
    return math.log(1.0 / VISIBILITY_CONTRAST) / visibility
