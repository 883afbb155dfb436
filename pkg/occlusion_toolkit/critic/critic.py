# SPDX-License-Identifier: Apache-2.0

"""Patch-statistics realism critics.

Both critics compare 15-dimensional patch features against per-feature
target means and variances (diagonal covariance):

* ``patch``: every patch is scored by its normalized squared distance to the
  target means; the image score is the mean over patches.
* ``moment``: the mean feature vector pooled over all scored patches is
  compared with the target mean. It is blind to how much patches vary, so
  the minimum over a model parameter sits where the target was rendered.
"""

from dataclasses import dataclass
from typing import ClassVar, Dict, List, Sequence, Type

import numpy as np
from loguru import logger

from ..core.exceptions import DimensionError, NumericalError
from ..imaging.image import Image
from .features import FEATURE_COUNT, feature_adjoint, forward, patch_features

VARIANCE_FLOOR = 1e-8
DEFAULT_PATCH_SIZE = 8


@dataclass(frozen=True, eq=False)
class CriticStats:
    """Per-feature target means and floored variances."""

    patch_size: int
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        variances = np.maximum(np.asarray(self.variances, dtype=np.float64), VARIANCE_FLOOR)
        if means.shape != (FEATURE_COUNT,) or variances.shape != (FEATURE_COUNT,):
            raise DimensionError(
                f"Critic stats need {FEATURE_COUNT} means and variances, got "
                f"{means.shape} and {variances.shape}"
            )
        means.setflags(write=False)
        variances.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)


@dataclass(frozen=True, eq=False)
class CriticScore:
    value: float
    per_patch: np.ndarray


def fit_stats(targets: Sequence[Image], patch_size: int = DEFAULT_PATCH_SIZE) -> CriticStats:
    """Feature statistics over every patch of every target image."""
    if not targets:
        raise ValueError("critic_fit needs at least one target image")
    features = np.concatenate(
        [patch_features(t.data, patch_size).reshape(-1, FEATURE_COUNT) for t in targets]
    )
    logger.debug(
        f"Fitted critic stats on {len(targets)} images ({features.shape[0]} patches)"
    )
    return CriticStats(patch_size, features.mean(axis=0), features.var(axis=0))


class Critic:
    """Critic contract: a scalar loss with a per-pixel input gradient."""

    kind: ClassVar[str] = ""

    def __init__(self, stats: CriticStats, scale: float = 1.0):
        if not scale > 0:
            raise ValueError(f"Critic scale must be positive, got {scale}")
        self.stats = stats
        self.scale = float(scale)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(patch_size={self.patch_size}, scale={self.scale})"

    @property
    def patch_size(self) -> int:
        return self.stats.patch_size

    def scaled(self, factor: float) -> "Critic":
        """Copy of the critic whose loss is multiplied by ``factor``."""
        return type(self)(self.stats, self.scale * factor)

    def score(self, img: Image) -> CriticScore:
        raise NotImplementedError

    def score_batch(self, images: Sequence[Image]) -> float:
        raise NotImplementedError

    def input_gradient(self, img: Image) -> np.ndarray:
        raise NotImplementedError

    def _whitened(self, features: np.ndarray) -> np.ndarray:
        return (features - self.stats.means) / self.stats.variances

    @staticmethod
    def _finite(value: float) -> float:
        if not np.isfinite(value):
            raise NumericalError(f"Critic produced a non-finite score ({value})")
        return float(value)


class PatchCritic(Critic):
    """Per-patch Mahalanobis-style distance, averaged over patches."""

    kind = "patch"

    def _per_patch(self, features: np.ndarray) -> np.ndarray:
        diff = features - self.stats.means
        return self.scale * np.mean(diff**2 / self.stats.variances, axis=-1)

    def score(self, img: Image) -> CriticScore:
        per_patch = self._per_patch(patch_features(img.data, self.patch_size))
        return CriticScore(self._finite(per_patch.mean()), per_patch)

    def score_batch(self, images: Sequence[Image]) -> float:
        if not images:
            raise ValueError("score_batch needs at least one image")
        return self._finite(np.mean([self.score(img).value for img in images]))

    def input_gradient(self, img: Image) -> np.ndarray:
        fwd = forward(img.data, self.patch_size)
        patches = fwd.features.shape[0] * fwd.features.shape[1]
        grad = 2.0 * self.scale * self._whitened(fwd.features) / (FEATURE_COUNT * patches)
        return feature_adjoint(fwd, grad, img.data.shape)


class MomentCritic(Critic):
    """Distance between the pooled mean patch feature and the target mean.

    The per-patch raster of a score is constant and equal to the value.
    """

    kind = "moment"

    def _value(self, mean_feature: np.ndarray) -> float:
        diff = mean_feature - self.stats.means
        return self.scale * float(np.mean(diff**2 / self.stats.variances))

    def score(self, img: Image) -> CriticScore:
        features = patch_features(img.data, self.patch_size)
        value = self._finite(
            self._value(features.reshape(-1, FEATURE_COUNT).mean(axis=0))
        )
        return CriticScore(value, np.full(features.shape[:2], value))

    def score_batch(self, images: Sequence[Image]) -> float:
        if not images:
            raise ValueError("score_batch needs at least one image")
        pooled = np.concatenate(
            [
                patch_features(img.data, self.patch_size).reshape(-1, FEATURE_COUNT)
                for img in images
            ]
        )
        return self._finite(self._value(pooled.mean(axis=0)))

    def input_gradient(self, img: Image) -> np.ndarray:
        fwd = forward(img.data, self.patch_size)
        rows, cols = fwd.features.shape[:2]
        mean_feature = fwd.features.reshape(-1, FEATURE_COUNT).mean(axis=0)
        per_patch = 2.0 * self.scale * self._whitened(mean_feature)
        per_patch = per_patch / (FEATURE_COUNT * rows * cols)
        grad = np.broadcast_to(per_patch, fwd.features.shape)
        return feature_adjoint(fwd, grad, img.data.shape)


CRITICS: Dict[str, Type[Critic]] = {
    PatchCritic.kind: PatchCritic,
    MomentCritic.kind: MomentCritic,
}


def make_critic(stats: CriticStats, kind: str = "patch", scale: float = 1.0) -> Critic:
    try:
        critic_type = CRITICS[kind]
    except KeyError:
        raise ValueError(f"Unknown critic kind '{kind}', expected one of {sorted(CRITICS)}") from None
    return critic_type(stats, scale)


def critic_fit(
    targets: Sequence[Image], patch_size: int = DEFAULT_PATCH_SIZE, kind: str = "patch"
) -> Critic:
    """Fit a critic of the given kind on the target images.

    Raises:
        ValueError: Empty target list
        DimensionError: A target smaller than ``patch_size``
    """
    return make_critic(fit_stats(targets, patch_size), kind)


def critic_score(critic: Critic, img: Image) -> CriticScore:
    return critic.score(img)


def critic_input_gradient(critic: Critic, img: Image) -> np.ndarray:
    """d score / d pixel, shape (H, W, 3)."""
    return critic.input_gradient(img)


def pooled_features(images: List[Image], patch_size: int) -> np.ndarray:
    """All patch features of a set, shape (patches, 15)."""
    return np.concatenate(
        [patch_features(img.data, patch_size).reshape(-1, FEATURE_COUNT) for img in images]
    )
