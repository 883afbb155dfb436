# SPDX-License-Identifier: Apache-2.0

"""Estimation objective: render, compose and score a batch of sources."""

import threading
from typing import List, Optional, Sequence

from ..core.exceptions import ConfigError, DimensionError
from ..core.pool import ordered_map
from ..core.rng import RngStream
from ..critic.critic import Critic
from ..guidance.maps import BinaryMask
from ..imaging.image import DepthMap, Image
from ..models.registry import OcclusionModel


class Objective:
    """Critic loss of model composites over a source set.

    Every evaluation takes an explicit seed list so callers control common
    random numbers: seed ``k`` drives the render of the ``k``-th selected
    source.
    """

    def __init__(
        self,
        model: OcclusionModel,
        sources: Sequence[Image],
        critic: Critic,
        depths: Optional[Sequence[DepthMap]] = None,
        mask: Optional[BinaryMask] = None,
        threads: int = 0,
    ):
        if not sources:
            raise ValueError("The objective needs at least one source image")
        if model.requires_depth:
            if depths is None:
                raise ConfigError(f"Model {model.name} needs one depth map per source")
            if len(depths) != len(sources):
                raise DimensionError(
                    f"{len(depths)} depth maps given for {len(sources)} sources"
                )
        self.model = model
        self.sources = list(sources)
        self.depths = list(depths) if depths is not None else None
        self.critic = critic
        self.mask = mask
        self.threads = threads
        self.evaluations = 0
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.sources)

    def composites(
        self, params, seeds: Sequence[int], indices: Optional[Sequence[int]] = None
    ) -> List[Image]:
        """Composite the selected sources, one seed per source."""
        indices = list(range(len(self.sources))) if indices is None else list(indices)
        if len(seeds) != len(indices):
            raise ValueError(f"{len(seeds)} seeds given for {len(indices)} images")

        def render(item):
            index, seed = item
            depth = self.depths[index] if self.depths is not None else None
            return self.model.apply(
                self.sources[index], params, RngStream(seed), self.mask, depth
            )

        return ordered_map(render, list(zip(indices, seeds)), self.threads)

    def evaluate(
        self, params, seeds: Sequence[int], indices: Optional[Sequence[int]] = None
    ) -> float:
        with self._lock:
            self.evaluations += 1
        return self.critic.score_batch(self.composites(params, seeds, indices))


def objective(
    model: OcclusionModel,
    params,
    sources: Sequence[Image],
    critic: Critic,
    rng: RngStream,
    depths: Optional[Sequence[DepthMap]] = None,
    mask: Optional[BinaryMask] = None,
    threads: int = 0,
) -> float:
    """Mean critic loss of ``params`` over the sources, fresh seeds from ``rng``."""
    model.validate(params)
    evaluator = Objective(model, sources, critic, depths, mask, threads)
    return evaluator.evaluate(params, rng.seeds(len(sources)))
