# SPDX-License-Identifier: Apache-2.0

"""Tests for disentanglement guidance maps and injection masks."""

import numpy as np
import pytest

from occlusion_toolkit.core.exceptions import DimensionError, ParameterError
from occlusion_toolkit.critic import critic_fit
from occlusion_toolkit.guidance import (
    BinaryMask,
    GuidanceMap,
    compute_guidance,
    injection_mask,
    load_guidance,
    load_mask,
    mask_coverage,
    saliency,
    save_guidance,
    save_mask,
)
from occlusion_toolkit.imaging.image import Image

from .conftest import random_image


@pytest.fixture
def critic():
    return critic_fit([random_image(i, 32) for i in range(2)], 8, "patch")


def test_guidance_is_min_max_normalized(critic):
    dg = compute_guidance(critic, [random_image(5, 32), random_image(6, 32)])
    assert dg.shape == (32, 32)
    assert dg.data.min() == pytest.approx(0.0)
    assert dg.data.max() == pytest.approx(1.0)


def test_guidance_threads_do_not_change_the_result(critic):
    sources = [random_image(i, 32) for i in range(5, 9)]
    single = compute_guidance(critic, sources, threads=1)
    pooled = compute_guidance(critic, sources, threads=4)
    np.testing.assert_array_equal(single.data, pooled.data)


def test_guidance_ignores_source_order(critic):
    sources = [random_image(i, 32) for i in range(5, 9)]
    forward = compute_guidance(critic, sources)
    shuffled = compute_guidance(critic, [sources[i] for i in (2, 0, 3, 1)])
    np.testing.assert_allclose(shuffled.data, forward.data, atol=1e-12)


def test_guidance_ignores_the_critic_loss_scale(critic):
    sources = [random_image(i, 32) for i in range(5, 8)]
    base = compute_guidance(critic, sources)
    np.testing.assert_allclose(compute_guidance(critic.scaled(7.5), sources).data, base.data, atol=1e-12)


def test_guidance_vanishes_when_sources_match_targets():
    flat = Image.full(16, 16, 0.4)
    critic = critic_fit([flat], 8, "patch")
    dg = compute_guidance(critic, [flat])
    assert not dg.data.any()


def test_guidance_rejects_mixed_sizes(critic):
    with pytest.raises(DimensionError):
        compute_guidance(critic, [random_image(1, 32), random_image(2, 16)])
    with pytest.raises(ValueError):
        compute_guidance(critic, [])


def test_saliency_is_non_negative(critic):
    sal = saliency(critic, random_image(4, 32))
    assert sal.shape == (32, 32)
    assert sal.min() >= 0


def test_mask_threshold_extremes():
    dg = GuidanceMap(np.linspace(0.0, 1.0, 20).reshape(4, 5))
    assert not injection_mask(dg, 0.0).data.any()
    assert mask_coverage(injection_mask(dg, 1.0)) == pytest.approx(19 / 20)


def test_mask_grows_with_gamma():
    dg = GuidanceMap(np.random.default_rng(0).uniform(0, 1, (8, 8)))
    small, large = injection_mask(dg, 0.3), injection_mask(dg, 0.75)
    assert small.issubset(large)
    assert mask_coverage(small) <= mask_coverage(large)


def test_mask_gamma_out_of_range():
    dg = GuidanceMap(np.zeros((2, 2)))
    with pytest.raises(ParameterError):
        injection_mask(dg, 1.5)


def test_guidance_map_range_is_checked():
    with pytest.raises(ValueError):
        GuidanceMap(np.full((2, 2), 1.2))


def test_guidance_and_mask_files(tmp_path):
    dg = GuidanceMap(np.random.default_rng(1).uniform(0, 1, (6, 7)))
    save_guidance(dg, tmp_path / "dg.pgm")
    np.testing.assert_allclose(load_guidance(tmp_path / "dg.pgm").data, dg.data, atol=0.5 / 65535 + 1e-12)

    mask = injection_mask(dg, 0.5)
    save_mask(mask, tmp_path / "m.pbm")
    np.testing.assert_array_equal(load_mask(tmp_path / "m.pbm").data, mask.data)


def test_allow_all_mask():
    mask = BinaryMask.allow_all(3, 4)
    assert mask.shape == (3, 4)
    assert mask.coverage() == 1.0


def test_guidance_highlights_the_shifted_region():
    targets = [random_image(i, 32) for i in range(20, 24)]
    critic = critic_fit(targets, 8, "patch")
    sources = []
    for img in targets:
        data = np.array(img.data)
        data[:, :16] += 0.1
        sources.append(Image(data))
    dg = compute_guidance(critic, sources)
    assert dg.data[:, :16].mean() > dg.data[:, 16:].mean()
