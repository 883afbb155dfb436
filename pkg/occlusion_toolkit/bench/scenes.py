# SPDX-License-Identifier: Apache-2.0

"""Procedural clean corpus: sky, textured ground plane and simple objects.

Depth follows a flat ground seen from a level camera: it falls off with the
distance below the horizon and is infinite in the sky. Depths are in
kilometres so fog extinction coefficients are per kilometre.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from ..core.rng import STREAM_CORPUS, RngStream
from ..imaging.blur import blur_array
from ..imaging.image import DepthMap, Image

HORIZON_DEPTH_KM = 0.2
NEAREST_DEPTH_KM = 0.005

SKY_TOP = np.array([0.32, 0.52, 0.84])
SKY_HORIZON = np.array([0.78, 0.86, 0.95])
GROUND_TONES = (
    np.array([0.36, 0.42, 0.22]),  # grass
    np.array([0.45, 0.40, 0.33]),  # soil
    np.array([0.38, 0.38, 0.40]),  # asphalt
)


@dataclass(frozen=True)
class Corpus:
    images: List[Image]
    depths: List[DepthMap]

    def __len__(self) -> int:
        return len(self.images)

    def subset(self, indices) -> "Corpus":
        indices = list(indices)
        return Corpus([self.images[i] for i in indices], [self.depths[i] for i in indices])


def ground_depth(rows: np.ndarray, horizon: int, height: int) -> np.ndarray:
    """Depth in km of ground rows below ``horizon``."""
    falloff = (HORIZON_DEPTH_KM / NEAREST_DEPTH_KM - 1.0) / max(height - 1 - horizon, 1)
    return HORIZON_DEPTH_KM / (1.0 + falloff * (rows - horizon))


def generate_scene(size: int, rng: RngStream):
    """One (Image, DepthMap) pair of ``size x size`` pixels."""
    horizon = int(size * rng.uniform(0.35, 0.55))
    rows = np.arange(size, dtype=np.float64)[:, None] * np.ones((1, size))
    cols = np.arange(size, dtype=np.float64)[None, :] * np.ones((size, 1))

    rgb = np.zeros((size, size, 3))
    depth = np.full((size, size), np.inf)

    # sky
    t = np.clip(rows / max(horizon, 1), 0.0, 1.0)[..., None]
    sky_jitter = rng.uniform(-0.05, 0.05, 3)
    rgb[:] = (1 - t) * (SKY_TOP + sky_jitter) + t * (SKY_HORIZON + sky_jitter)

    # ground: low-frequency patches plus fine grain, coarser near the camera
    tone = GROUND_TONES[int(rng.integers(0, len(GROUND_TONES)))] + rng.uniform(-0.04, 0.04, 3)
    coarse = blur_array(rng.normal(0.0, 1.0, (size, size)), 3.0)
    fine = rng.normal(0.0, 1.0, (size, size))
    texture = 0.12 * coarse / (coarse.std() + 1e-12) + 0.05 * fine
    ground = rows >= horizon
    shade = 0.85 + 0.3 * (rows - horizon) / max(size - horizon, 1)
    rgb[ground] = (tone * (shade[..., None] + texture[..., None]))[ground]
    depth[ground] = ground_depth(rows[ground], horizon, size)

    # objects standing on the ground, painted far to near
    count = int(rng.integers(3, 7))
    bases = np.sort(rng.uniform(horizon + 2, size, count))
    for base in bases:
        base_row = min(int(base), size - 1)
        width = rng.uniform(0.05, 0.18) * size * (0.5 + (base_row - horizon) / size)
        height = width * rng.uniform(0.6, 2.5)
        cx = rng.uniform(0, size)
        color = rng.uniform(0.1, 0.9, 3)
        if rng.uniform() < 0.5:
            inside = (np.abs(cols - cx) <= width / 2) & (rows <= base_row) & (rows >= base_row - height)
        else:
            radius = width / 2
            inside = np.hypot(cols - cx, rows - (base_row - radius)) <= radius
        stripes = 0.06 * np.sin(rows * rng.uniform(0.5, 1.5))
        rgb[inside] = (color + stripes[..., None])[inside]
        depth[inside] = ground_depth(np.array(float(base_row)), horizon, size)

    rgb += rng.normal(0.0, 0.01, rgb.shape)
    return Image(np.clip(rgb, 0.0, 1.0)), DepthMap(depth)


def generate_corpus(count: int, size: int = 128, seed: int = 0) -> Corpus:
    """``count`` deterministic scenes; scene ``i`` only depends on (seed, i)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    root = RngStream(seed).fork(STREAM_CORPUS)
    pairs = [generate_scene(size, root.item(i)) for i in range(count)]
    return Corpus([p[0] for p in pairs], [p[1] for p in pairs])
