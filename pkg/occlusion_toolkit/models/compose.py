# SPDX-License-Identifier: Apache-2.0

"""Composition of a scene with a rendered model layer."""

from ..core.exceptions import DimensionError
from ..imaging.image import Image
from .params import Overlay


def compose(scene: Image, overlay: Overlay) -> Image:
    """out = (1 - alpha_w) * scene + alpha_w * W, clamped to [0, 1]."""
    if overlay.shape != scene.shape:
        raise DimensionError(
            f"Overlay {overlay.shape} does not match scene {scene.shape}"
        )
    alpha = overlay.alpha[..., None]
    return Image((1.0 - alpha) * scene.data + alpha * overlay.color)
