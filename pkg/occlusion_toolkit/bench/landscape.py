# SPDX-License-Identifier: Apache-2.0

"""Feature-space distance between image sets and parameter landscapes."""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.rng import RngStream
from ..critic.critic import DEFAULT_PATCH_SIZE, pooled_features
from ..imaging.image import DepthMap, Image
from ..models.registry import OcclusionModel
from .recovery import synthesize_ground_truth


def feature_distance(
    a: Sequence[Image], b: Sequence[Image], patch_size: int = DEFAULT_PATCH_SIZE
) -> float:
    """Frechet distance between diagonal Gaussian fits of pooled patch features.

    d = |mu_a - mu_b|^2 + sum(var_a + var_b - 2 sqrt(var_a var_b))
    """
    if not a or not b:
        raise ValueError("feature_distance needs two non-empty image sets")
    fa = pooled_features(list(a), patch_size)
    fb = pooled_features(list(b), patch_size)
    mean_term = float(np.sum((fa.mean(axis=0) - fb.mean(axis=0)) ** 2))
    cov_term = float(np.sum((np.sqrt(fa.var(axis=0)) - np.sqrt(fb.var(axis=0))) ** 2))
    return mean_term + cov_term


def sweep_landscape(
    clean: Sequence[Image],
    targets: Sequence[Image],
    model: OcclusionModel,
    parameter: str,
    grid: Sequence[float],
    base_params=None,
    seed: int = 0,
    depths: Optional[Sequence[DepthMap]] = None,
    patch_size: int = DEFAULT_PATCH_SIZE,
    threads: int = 0,
) -> List[Tuple[float, float]]:
    """Distance to ``targets`` of ``clean`` rendered at every grid value.

    All grid points reuse the same render seeds.
    """
    grid = [float(v) for v in grid]
    if len(grid) < 3:
        raise ValueError("a landscape grid needs at least 3 points")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("the landscape grid must be sorted")
    base = base_params if base_params is not None else model.default_params()

    rows = []
    for value in grid:
        params = model.from_dict({parameter: value}, base)
        rendered = synthesize_ground_truth(clean, model, params, RngStream(seed), depths, threads=threads)
        rows.append((value, feature_distance(rendered, targets, patch_size)))
    return rows


def landscape_minimum(rows: Sequence[Tuple[float, float]]) -> float:
    """Grid value with the smallest distance."""
    return min(rows, key=lambda row: row[1])[0]


def nearest_grid_point(grid: Sequence[float], value: float) -> float:
    return min(grid, key=lambda g: abs(g - value))
