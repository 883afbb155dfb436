# SPDX-License-Identifier: Apache-2.0

"""Occlusion Toolkit - physics-based occlusion rendering and parameter estimation."""

from .critic import critic_fit, critic_score, load_critic, save_critic
from .estimate import estimate_differentiable, estimate_joint, objective
from .guidance import compute_guidance, injection_mask
from .imaging import DepthMap, Image, load_depth, load_image, save_image
from .models import compose, get_model, render_dirt, render_fog, render_raindrops

__version__ = "0.1.0"

__all__ = [
    "Image",
    "DepthMap",
    "load_image",
    "save_image",
    "load_depth",
    "get_model",
    "compose",
    "render_raindrops",
    "render_dirt",
    "render_fog",
    "critic_fit",
    "critic_score",
    "save_critic",
    "load_critic",
    "objective",
    "estimate_differentiable",
    "estimate_joint",
    "compute_guidance",
    "injection_mask",
]
