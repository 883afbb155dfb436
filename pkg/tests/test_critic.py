# SPDX-License-Identifier: Apache-2.0

"""Tests for patch features, critics and critic files."""

import struct

import numpy as np
import pytest

from occlusion_toolkit.core.exceptions import DimensionError, ImageIOError
from occlusion_toolkit.core.rng import RngStream
from occlusion_toolkit.critic import (
    FEATURE_COUNT,
    MomentCritic,
    PatchCritic,
    critic_fit,
    critic_input_gradient,
    critic_score,
    load_critic,
    patch_features,
    save_critic,
)
from occlusion_toolkit.critic.critic import CriticStats
from occlusion_toolkit.imaging.image import Image

from .conftest import random_image


def directional_check(critic, img: Image, seed: int, h: float = 1e-5):
    direction = RngStream(seed).normal(0.0, 1.0, img.data.shape)
    analytic = float(np.sum(critic_input_gradient(critic, img) * direction))
    plus = critic.score(Image(img.data + h * direction)).value
    minus = critic.score(Image(img.data - h * direction)).value
    numeric = (plus - minus) / (2 * h)
    return analytic, numeric


def test_feature_raster_shape():
    features = patch_features(random_image(1, 32).data, 8)
    assert features.shape == (4, 4, FEATURE_COUNT)


def test_partial_patches_are_ignored():
    data = random_image(1, 20).data
    assert patch_features(data, 8).shape[:2] == (2, 2)
    np.testing.assert_array_equal(patch_features(data, 8), patch_features(data[:16, :16], 8))


def test_constant_image_features():
    features = patch_features(np.full((16, 16, 3), 0.4), 8)
    np.testing.assert_allclose(features[..., 0:3], 0.4)
    np.testing.assert_array_equal(features[..., 3:6], 0.0)
    np.testing.assert_array_equal(features[..., 14], 0.0)


def test_image_smaller_than_patch():
    with pytest.raises(DimensionError):
        patch_features(np.zeros((4, 4, 3)), 8)


def test_fit_needs_targets():
    with pytest.raises(ValueError):
        critic_fit([])


def test_fit_kinds():
    targets = [random_image(i, 16) for i in range(2)]
    assert isinstance(critic_fit(targets, 8, "patch"), PatchCritic)
    assert isinstance(critic_fit(targets, 8, "moment"), MomentCritic)
    with pytest.raises(ValueError):
        critic_fit(targets, 8, "gan")


def test_moment_critic_scores_its_fit_set_near_zero():
    targets = [random_image(i, 32) for i in range(3)]
    critic = critic_fit(targets, 8, "moment")
    assert critic.score_batch(targets) < 1e-12
    assert critic.score_batch([Image.full(32, 32, 0.5)]) > 1.0


def test_moment_per_patch_is_constant():
    critic = critic_fit([random_image(1, 16)], 8, "moment")
    result = critic_score(critic, random_image(2, 16))
    np.testing.assert_array_equal(result.per_patch, result.value)


def test_patch_score_is_mean_of_per_patch():
    critic = critic_fit([random_image(1, 32)], 8, "patch")
    result = critic.score(random_image(2, 32))
    assert result.per_patch.shape == (4, 4)
    assert result.value == pytest.approx(result.per_patch.mean())
    assert np.all(result.per_patch >= 0)


def test_scaled_critic_scales_the_loss():
    critic = critic_fit([random_image(1, 16), random_image(2, 16)], 8, "patch")
    img = random_image(3, 16)
    assert critic.scaled(3.0).score(img).value == pytest.approx(3.0 * critic.score(img).value)
    with pytest.raises(ValueError):
        critic.scaled(0.0)


@pytest.mark.parametrize("kind", ["patch", "moment"])
def test_input_gradient_matches_finite_differences(kind):
    critic = critic_fit([random_image(11, 16), random_image(12, 16)], 8, kind)
    for index in range(20):
        img = random_image(100 + index, 16)
        analytic, numeric = directional_check(critic, img, index)
        assert analytic == pytest.approx(numeric, rel=1e-3)


def test_input_gradient_is_zero_outside_the_patch_grid():
    critic = critic_fit([random_image(1, 16)], 8, "patch")
    grad = critic.input_gradient(random_image(2, 20))
    assert grad.shape == (20, 20, 3)
    assert not grad[16:].any() and not grad[:, 16:].any()


def test_variance_floor():
    stats = CriticStats(8, np.zeros(FEATURE_COUNT), np.zeros(FEATURE_COUNT))
    assert stats.variances.min() == pytest.approx(1e-8)


def test_critic_file_round_trip(tmp_path):
    critic = critic_fit([random_image(1, 16), random_image(2, 16)], 8, "patch")
    save_critic(critic, tmp_path / "c.critic")
    loaded = load_critic(tmp_path / "c.critic", "moment")
    assert isinstance(loaded, MomentCritic)
    assert loaded.patch_size == 8
    np.testing.assert_array_equal(loaded.stats.means, critic.stats.means)
    np.testing.assert_array_equal(loaded.stats.variances, critic.stats.variances)


def test_critic_file_keeps_the_loss_scale(tmp_path):
    images = [random_image(1, 16), random_image(2, 16)]
    critic = critic_fit(images, 8, "moment").scaled(3.0)
    save_critic(critic, tmp_path / "c.critic")
    loaded = load_critic(tmp_path / "c.critic", "moment")
    assert loaded.scale == 3.0
    others = [random_image(3, 16), random_image(4, 16)]
    assert loaded.score_batch(others) == critic.score_batch(others)


def test_version_one_critic_file_loads_unscaled(tmp_path):
    critic = critic_fit([random_image(1, 16)], 8)
    stats = critic.stats
    payload = struct.pack("<8sIII", b"OCCRITIC", 1, 8, FEATURE_COUNT)
    payload += stats.means.astype("<f8").tobytes() + stats.variances.astype("<f8").tobytes()
    (tmp_path / "old.critic").write_bytes(payload)
    loaded = load_critic(tmp_path / "old.critic")
    assert loaded.scale == 1.0
    np.testing.assert_array_equal(loaded.stats.means, stats.means)


def test_critic_file_errors(tmp_path):
    with pytest.raises(ImageIOError, match="file not found"):
        load_critic(tmp_path / "missing.critic")
    (tmp_path / "bad.critic").write_bytes(b"NOTCRITC" + bytes(12))
    with pytest.raises(ImageIOError, match="not a critic file"):
        load_critic(tmp_path / "bad.critic")

    critic = critic_fit([random_image(1, 16)], 8)
    save_critic(critic, tmp_path / "c.critic")
    payload = (tmp_path / "c.critic").read_bytes()
    (tmp_path / "short.critic").write_bytes(payload[:-8])
    with pytest.raises(ImageIOError, match="truncated"):
        load_critic(tmp_path / "short.critic")
