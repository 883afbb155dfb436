# SPDX-License-Identifier: Apache-2.0

"""Shared fixtures: small deterministic scenes and on-disk datasets."""

from pathlib import Path
from typing import List, Sequence

import numpy as np
import pytest

from occlusion_toolkit.bench.scenes import generate_corpus
from occlusion_toolkit.core.rng import RngStream
from occlusion_toolkit.imaging.image import DepthMap, Image
from occlusion_toolkit.imaging.io import save_depth, save_image


def random_image(seed: int, size: int = 32, low: float = 0.1, high: float = 0.9) -> Image:
    return Image(RngStream(seed).uniform(low, high, (size, size, 3)))


def write_pngs(directory: Path, images: Sequence[Image], prefix: str = "img") -> List[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, img in enumerate(images):
        path = directory / f"{prefix}{i:02d}.png"
        save_image(img, path)
        paths.append(path)
    return paths


@pytest.fixture
def scene() -> Image:
    return generate_corpus(1, 32, seed=3).images[0]


@pytest.fixture
def corpus():
    return generate_corpus(6, 32, seed=0)


@pytest.fixture
def flat_depth() -> DepthMap:
    return DepthMap(np.full((32, 32), 0.05))


@pytest.fixture
def dataset(tmp_path, corpus):
    """Sources, targets and a shared depth file on disk (depth unit 1 m)."""
    sources = write_pngs(tmp_path / "sources", corpus.images[:3])
    targets = write_pngs(tmp_path / "targets", corpus.images[3:])
    depth_path = tmp_path / "depth.pgm"
    save_depth(DepthMap(np.full((32, 32), 50.0)), depth_path, 1.0)
    return {
        "root": tmp_path,
        "sources": tmp_path / "sources",
        "targets": tmp_path / "targets",
        "depth": depth_path,
        "source_paths": sources,
        "target_paths": targets,
    }
