# SPDX-License-Identifier: Apache-2.0

"""Tests for the objective, finite differences and the estimators."""

import numpy as np
import pytest

from occlusion_toolkit.core.exceptions import ConfigError, NumericalError, ParameterError
from occlusion_toolkit.core.rng import STREAM_ESTIMATE, RngStream
from occlusion_toolkit.critic import MomentCritic, critic_fit
from occlusion_toolkit.estimate import (
    CmaConfig,
    DiffEstimateConfig,
    FitnessSpec,
    JointConfig,
    Objective,
    estimate_differentiable,
    estimate_joint,
    finite_difference_gradient,
    objective,
    param_gradient,
    write_trace,
)
from occlusion_toolkit.estimate.trace import BLOCK_GENETIC, TraceRow
from occlusion_toolkit.imaging.image import DepthMap
from occlusion_toolkit.models import DirtParams, DropType, FogParams, RaindropParams, get_model

FOG_BOUNDS = {"beta": (0.0, 80.0)}


@pytest.fixture
def fog_problem(corpus):
    """Sources fogged at beta=20 with a flat 50 m depth (km units)."""
    model = get_model("fog", bounds=FOG_BOUNDS)
    sources = corpus.images[:4]
    depths = [DepthMap(np.full((32, 32), 0.05))] * len(sources)
    truth = FogParams(beta=20.0)
    targets = [model.apply(s, truth, depth=d) for s, d in zip(sources, depths)]
    critic = critic_fit(targets, 8, "moment")
    return model, sources, depths, critic


class FailingCritic(MomentCritic):
    """Moment critic that returns NaN after a number of batch scores."""

    def __init__(self, stats, healthy_calls: int):
        super().__init__(stats)
        self.calls = 0
        self.healthy_calls = healthy_calls

    def score_batch(self, images):
        self.calls += 1
        if self.calls > self.healthy_calls:
            return float("nan")
        return super().score_batch(images)


def test_central_difference_on_a_quadratic():
    result = finite_difference_gradient(
        lambda x: float(x[0] ** 2 + 3 * x[1]), [2.0, -1.0], [1e-3, 1e-3]
    )
    np.testing.assert_allclose(result.gradient, [4.0, 3.0], rtol=1e-6)
    assert result.one_sided == ()
    assert result.evaluations == 4


def test_one_sided_difference_at_a_bound():
    bounds = np.array([[0.0, 1.0], [0.0, 1.0]])
    result = finite_difference_gradient(
        lambda x: float(2 * x[0] + x[1] ** 2), [0.0, 0.5], [1e-3, 1e-3], bounds, f0=0.25
    )
    assert result.one_sided == (0,)
    np.testing.assert_allclose(result.gradient, [2.0, 1.0], rtol=1e-6)


def test_steps_must_be_positive():
    with pytest.raises(ValueError):
        finite_difference_gradient(lambda x: 0.0, [1.0], [0.0])


def test_config_validation():
    model = get_model("fog")
    with pytest.raises(ParameterError):
        DiffEstimateConfig.for_model(model, learning_rate=[-1.0])
    with pytest.raises(ParameterError):
        DiffEstimateConfig.for_model(model, lr_decay=1.5)
    cfg = DiffEstimateConfig.for_model(model, max_iters=5)
    assert cfg.bounds == ((0.0, 100.0),)
    assert cfg.learning_rate == pytest.approx((4.0,))


def test_objective_needs_depth_for_fog(corpus):
    critic = critic_fit(corpus.images[:2], 8, "moment")
    with pytest.raises(ConfigError):
        Objective(get_model("fog"), corpus.images[:2], critic)


def test_objective_is_reproducible(corpus):
    model = get_model("raindrop")
    critic = critic_fit(corpus.images[3:], 8, "moment")
    params = RaindropParams(drop_types=tuple(DropType(0.2, 4.0, 1200.0) for _ in range(4)))
    first = objective(model, params, corpus.images[:3], critic, RngStream(2))
    second = objective(model, params, corpus.images[:3], critic, RngStream(2))
    assert first == second


def test_objective_counts_evaluations(fog_problem):
    model, sources, depths, critic = fog_problem
    evaluator = Objective(model, sources, critic, depths)
    evaluator.evaluate(FogParams(beta=20.0), [0] * 4)
    evaluator.evaluate(FogParams(beta=10.0), [0, 0], indices=[1, 2])
    assert evaluator.evaluations == 2
    with pytest.raises(ValueError):
        evaluator.evaluate(FogParams(beta=10.0), [0, 0])


def test_truth_is_the_objective_minimum(fog_problem):
    model, sources, depths, critic = fog_problem
    losses = {
        beta: objective(model, FogParams(beta=beta), sources, critic, RngStream(0), depths)
        for beta in (10.0, 20.0, 30.0)
    }
    assert losses[20.0] < 1e-12
    assert losses[10.0] > losses[20.0] and losses[30.0] > losses[20.0]


def test_param_gradient_points_towards_the_truth(fog_problem):
    model, sources, depths, critic = fog_problem
    below = param_gradient(model, FogParams(beta=10.0), sources, critic, depths=depths)
    above = param_gradient(model, FogParams(beta=30.0), sources, critic, depths=depths)
    assert below.gradient[0] < 0 < above.gradient[0]


def test_fog_beta_recovery(fog_problem):
    model, sources, depths, critic = fog_problem
    cfg = DiffEstimateConfig.for_model(model, max_iters=60)
    result = estimate_differentiable(
        model, FogParams(beta=10.0), sources, critic, cfg, RngStream(1), depths
    )
    assert result.params.beta == pytest.approx(20.0, rel=0.15)
    assert result.loss < result.initial_loss
    assert result.trace[0].iteration == 0
    assert min(row.loss for row in result.trace) == result.loss


def test_dirt_opacity_vanishes_when_targets_are_the_sources(corpus):
    model = get_model("dirt", diff_free=["alpha"], nd_free=[])
    sources = corpus.images[:4]
    critic = critic_fit(sources, 8, "moment")
    start = DirtParams(sigma=1.0, alpha=0.5, blob_frequency=20000.0, blob_size=4.0)
    cfg = DiffEstimateConfig.for_model(model, max_iters=60)
    result = estimate_differentiable(model, start, sources, critic, cfg, RngStream(2))
    assert result.params.alpha < 0.05
    assert result.loss < result.initial_loss


def test_initial_parameters_outside_bounds(fog_problem):
    model, sources, depths, critic = fog_problem
    with pytest.raises(ParameterError):
        estimate_differentiable(model, FogParams(beta=95.0), sources, critic, depths=depths)


def test_non_finite_loss_keeps_the_partial_trace(fog_problem):
    model, sources, depths, critic = fog_problem
    failing = FailingCritic(critic.stats, healthy_calls=4)
    cfg = DiffEstimateConfig.for_model(model, max_iters=10)
    with pytest.raises(NumericalError) as info:
        estimate_differentiable(model, FogParams(beta=10.0), sources, failing, cfg, RngStream(0), depths)
    assert info.value.exit_code == 3
    assert len(info.value.trace) == 2


def test_joint_without_genetic_parameters_matches_descent(fog_problem):
    model, sources, depths, critic = fog_problem
    cfg = DiffEstimateConfig.for_model(model, max_iters=5)
    joint = estimate_joint(model, FogParams(beta=10.0), sources, critic, cfg, rng=RngStream(5), depths=depths)
    descent = estimate_differentiable(
        model, FogParams(beta=10.0), sources, critic, cfg, RngStream(5).fork(STREAM_ESTIMATE), depths
    )
    assert [row.loss for row in joint.trace] == [row.loss for row in descent.trace]
    assert joint.params.beta == descent.params.beta


def test_joint_alternates_blocks(corpus):
    model = get_model("raindrop", nd_free=["p0", "p1"])
    dense = tuple(DropType(0.2, 4.0, 1200.0) for _ in range(4))
    truth = RaindropParams(sigma=2.0, drop_types=dense)
    targets = [model.apply(img, truth, RngStream(i)) for i, img in enumerate(corpus.images[3:])]
    critic = critic_fit(targets, 8, "moment")
    start = model.with_nd(model.with_diff(truth, [1.0]), [1000.0, 1000.0])

    result = estimate_joint(
        model,
        start,
        corpus.images[:3],
        critic,
        DiffEstimateConfig.for_model(model),
        CmaConfig(population=4, sigma0=0.2),
        FitnessSpec(n_samples=2),
        JointConfig(k_d=2, k_g=2, max_rounds=1),
        RngStream(0),
    )
    blocks = {row.block for row in result.trace}
    assert blocks == {"d", BLOCK_GENETIC}
    assert result.loss <= result.initial_loss
    assert result.rounds == 1
    assert result.cma_state.generation == 2


def test_warm_start_length_is_checked(corpus):
    model = get_model("raindrop", nd_free=["p0"])
    critic = critic_fit(corpus.images[3:], 8, "moment")
    with pytest.raises(ParameterError):
        estimate_joint(
            model,
            model.default_params(),
            corpus.images[:3],
            critic,
            cma_cfg=CmaConfig(warm_start=[1.0, 2.0]),
            joint_cfg=JointConfig(k_d=1, k_g=1, max_rounds=1),
        )


def test_write_trace(tmp_path):
    rows = [
        TraceRow(0, "d", 0, 1.5, {"sigma": 2.0}),
        TraceRow(1, "nd", 1, 0.25, {"sigma": 2.5}),
    ]
    assert write_trace(rows, tmp_path / "trace.csv") == 2
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "round,block,iter,loss,sigma"
    assert lines[2] == "1,nd,1,0.25,2.5"
