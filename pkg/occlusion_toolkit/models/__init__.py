# SPDX-License-Identifier: Apache-2.0

"""Parametric occlusion models and the composition law."""

from .params import (
    CompositeParams,
    DirtParams,
    DropType,
    FogParams,
    Overlay,
    RaindropParams,
    RaindropVariant,
)
from .drops import Drop, sample_drops
from .displacement import (
    DisplacementField,
    load_displacement,
    radial_displacement_field,
    save_displacement,
)
from .raindrop import render_drops, render_raindrops
from .dirt import render_dirt
from .fog import beta_from_visibility, max_visibility, render_fog
from .composite import fence_overlay, render_composite, watermark_overlay
from .compose import compose
from .registry import MODELS, OcclusionModel, get_model

__all__ = [
    "CompositeParams",
    "DirtParams",
    "DropType",
    "FogParams",
    "Overlay",
    "RaindropParams",
    "RaindropVariant",
    "Drop",
    "sample_drops",
    "DisplacementField",
    "load_displacement",
    "radial_displacement_field",
    "save_displacement",
    "render_drops",
    "render_raindrops",
    "render_dirt",
    "render_fog",
    "max_visibility",
    "beta_from_visibility",
    "render_composite",
    "fence_overlay",
    "watermark_overlay",
    "compose",
    "MODELS",
    "OcclusionModel",
    "get_model",
]
