# SPDX-License-Identifier: Apache-2.0

"""Realism critics with analytic input gradients."""

from .critic import (
    CRITICS,
    Critic,
    CriticScore,
    CriticStats,
    MomentCritic,
    PatchCritic,
    critic_fit,
    critic_input_gradient,
    critic_score,
    fit_stats,
    make_critic,
    pooled_features,
)
from .features import FEATURE_COUNT, FEATURE_NAMES, patch_features
from .serialization import load_critic, save_critic

__all__ = [
    "CRITICS",
    "Critic",
    "CriticScore",
    "CriticStats",
    "MomentCritic",
    "PatchCritic",
    "critic_fit",
    "critic_input_gradient",
    "critic_score",
    "fit_stats",
    "make_critic",
    "pooled_features",
    "FEATURE_COUNT",
    "FEATURE_NAMES",
    "patch_features",
    "load_critic",
    "save_critic",
]
