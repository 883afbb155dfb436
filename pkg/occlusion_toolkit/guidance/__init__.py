# SPDX-License-Identifier: Apache-2.0

"""Disentanglement guidance maps and injection masks."""

from .maps import BinaryMask, GuidanceMap
from .saliency import (
    compute_guidance,
    injection_mask,
    load_guidance,
    load_mask,
    mask_coverage,
    saliency,
    save_guidance,
    save_mask,
)

__all__ = [
    "BinaryMask",
    "GuidanceMap",
    "compute_guidance",
    "injection_mask",
    "load_guidance",
    "load_mask",
    "mask_coverage",
    "saliency",
    "save_guidance",
    "save_mask",
]
