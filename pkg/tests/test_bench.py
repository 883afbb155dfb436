# SPDX-License-Identifier: Apache-2.0

"""Tests for the procedural corpus, recovery harness and reports."""

import numpy as np
import pytest

from occlusion_toolkit.bench import (
    RECOVERY_CASES,
    AcceptanceResult,
    RecoveryReport,
    RecoverySettings,
    ablate_guidance_threshold,
    ablate_model_choice,
    ablate_population,
    feature_distance,
    generate_corpus,
    landscape_minimum,
    mean_percent_error,
    run_acceptance,
    run_case,
    run_recovery,
    source_target_sets,
    split_halves,
    summary_table,
    sweep_landscape,
    synthesize_ground_truth,
    write_landscape_csv,
    write_recovery_csv,
)
from occlusion_toolkit.bench.landscape import nearest_grid_point
from occlusion_toolkit.bench.report import LANDSCAPE_GRID, LANDSCAPE_TARGETS, landscape_rows
from occlusion_toolkit.core.rng import STREAM_SPLIT, RngStream
from occlusion_toolkit.models import RaindropParams, get_model


def test_corpus_is_deterministic():
    first, second = generate_corpus(3, 32, seed=4), generate_corpus(3, 32, seed=4)
    assert all(a == b for a, b in zip(first.images, second.images))
    assert generate_corpus(1, 32, seed=5).images[0] != first.images[0]


def test_corpus_depth_layout():
    corpus = generate_corpus(2, 48, seed=1)
    for depth in corpus.depths:
        assert depth.shape == (48, 48)
        assert np.all(np.isinf(depth.data[0]))
        assert np.all(np.isfinite(depth.data[-1]))
        assert depth.data[-1].max() <= 0.2


def test_corpus_scene_prefix_is_stable():
    small, large = generate_corpus(2, 32, seed=9), generate_corpus(4, 32, seed=9)
    assert small.images[1] == large.images[1]


def test_split_halves():
    source, target = split_halves(9, RngStream(3))
    assert len(source) == 4 and len(target) == 5
    assert sorted(source + target) == list(range(9))


def test_paired_sets_share_every_scene():
    sources, targets = source_target_sets(7, RngStream(2), paired=True)
    assert sources == targets == list(range(7))
    unpaired = source_target_sets(7, RngStream(2))
    assert unpaired == split_halves(7, RngStream(2).fork(STREAM_SPLIT))


def test_only_the_raindrop_case_is_paired():
    assert RECOVERY_CASES["raindrop"].paired
    assert not RECOVERY_CASES["dirt"].paired
    assert not RECOVERY_CASES["fog"].paired


def test_synthesize_ground_truth(corpus):
    model = get_model("fog")
    targets = synthesize_ground_truth(
        corpus.images[:2], model, model.default_params(), RngStream(0), corpus.depths[:2]
    )
    assert len(targets) == 2
    assert targets[0] != corpus.images[0]
    with pytest.raises(ValueError):
        synthesize_ground_truth([], model, model.default_params(), RngStream(0))


def test_feature_distance(corpus):
    assert feature_distance(corpus.images[:3], corpus.images[:3]) == 0.0
    assert feature_distance(corpus.images[:3], corpus.images[3:]) > 0.0
    with pytest.raises(ValueError):
        feature_distance([], corpus.images)


def test_landscape_minimum_at_the_truth(corpus):
    model = get_model("fog")
    sources, depths = corpus.images[:3], corpus.depths[:3]
    truth = model.from_dict({"beta": 20.0})
    targets = synthesize_ground_truth(sources, model, truth, RngStream(0), depths)
    rows = sweep_landscape(sources, targets, model, "beta", [0.0, 10.0, 20.0, 30.0], truth, depths=depths)
    assert [value for value, _ in rows] == [0.0, 10.0, 20.0, 30.0]
    assert landscape_minimum(rows) == 20.0


def test_landscape_grid_checks(corpus):
    model = get_model("fog")
    with pytest.raises(ValueError):
        sweep_landscape(corpus.images, corpus.images, model, "beta", [1.0, 2.0])
    with pytest.raises(ValueError):
        sweep_landscape(corpus.images, corpus.images, model, "beta", [3.0, 2.0, 1.0])


def test_percent_error():
    report = RecoveryReport("fog", "beta", 20.0, 23.0, (1,), 0.5)
    assert report.percent_error == pytest.approx(15.0)
    assert mean_percent_error([report, RecoveryReport("fog", "beta", 10.0, 10.0, (2,), 0.1)]) == pytest.approx(7.5)


def test_recovery_cases():
    assert set(RECOVERY_CASES) == {"raindrop", "dirt", "fog"}
    fog = RECOVERY_CASES["fog"]
    model = fog.build_model()
    assert model.diff_names == ("beta",) and model.nd_names == ()
    assert fog.ground_truth(10.0).beta == 10.0
    assert fog.initial(fog.ground_truth(10.0)).beta == fog.init


def test_reports_and_summary(tmp_path):
    result = AcceptanceResult(
        reports=[RecoveryReport("dirt", "alpha", 0.4, 0.42, (1,), 2.0)],
        landscape=[(2.0, 0.0, 1.5), (2.0, 1.0, 0.5)],
        checks={"dirt alpha error <= 10%": True},
    )
    assert result.passed
    assert write_recovery_csv(result.reports, tmp_path / "recovery.csv") == 1
    assert write_landscape_csv(result.landscape, tmp_path / "landscape.csv") == 2
    header = (tmp_path / "recovery.csv").read_text().splitlines()[0]
    assert header == "model,parameter,ground_truth,estimated,percent_error,seeds,seconds"
    lines = summary_table(result)
    assert any(line.startswith("dirt") and line.endswith("PASS") for line in lines)


def test_guidance_threshold_ablation(corpus):
    w_star = get_model("raindrop").default_params()
    rows = ablate_guidance_threshold(corpus.images, w_star, gammas=(0.0, 0.5, 1.0))
    coverages = [row["coverage"] for row in rows]
    assert coverages[0] == 0.0
    assert coverages == sorted(coverages)


@pytest.mark.slow
def test_fog_case_recovers_beta():
    corpus = generate_corpus(8, 64, seed=0)
    reports = run_case(
        RECOVERY_CASES["fog"], corpus.images, [1], RecoverySettings(max_iters=60), corpus.depths
    )
    assert len(reports) == len(RECOVERY_CASES["fog"].values)
    assert mean_percent_error(reports) <= RECOVERY_CASES["fog"].tolerance


@pytest.mark.slow
def test_acceptance_dirt_only():
    result = run_acceptance(["dirt"], [1], images=8, size=64, landscape=False)
    assert len(result.reports) == len(RECOVERY_CASES["dirt"].values)
    assert set(result.checks) == {"dirt alpha error <= 10%"}


@pytest.mark.slow
def test_raindrop_model_fits_raindrop_targets_best():
    corpus = generate_corpus(8, 64, seed=0)
    w_star = get_model("raindrop").default_params()
    losses = ablate_model_choice(
        corpus.images, corpus.depths, w_star, settings=RecoverySettings(max_iters=20)
    )
    assert set(losses) == {"raindrop", "dirt", "fog", "composite"}
    assert min(losses, key=losses.get) == "raindrop"


@pytest.fixture(scope="module")
def acceptance_corpus():
    return generate_corpus(64, 128, seed=0)


@pytest.mark.slow
def test_raindrop_case_recovers_sigma(acceptance_corpus):
    case = RECOVERY_CASES["raindrop"]
    reports = run_case(case, acceptance_corpus.images, [1, 2, 3])
    assert len(reports) == 3 * len(case.values)
    assert mean_percent_error(reports) <= case.tolerance


@pytest.mark.slow
def test_raindrop_sigma_recovered_from_a_low_start():
    corpus = generate_corpus(32, 96, seed=0)
    model = RECOVERY_CASES["raindrop"].build_model()
    truth = RaindropParams(sigma=3.0)
    reports = run_recovery(
        corpus.images, model, truth, RaindropParams(sigma=1.0), [1], paired=True
    )
    assert reports[0].estimated == pytest.approx(3.0, rel=0.1)


@pytest.mark.slow
def test_raindrop_landscape_minimum_is_the_nearest_grid_point(acceptance_corpus):
    rows = landscape_rows(acceptance_corpus.images, 1)
    assert len(rows) == len(LANDSCAPE_TARGETS) * len(LANDSCAPE_GRID)
    for sigma_star in LANDSCAPE_TARGETS:
        sweep = [(value, distance) for target, value, distance in rows if target == sigma_star]
        assert landscape_minimum(sweep) == nearest_grid_point(LANDSCAPE_GRID, sigma_star)
        lowest = min(distance for _, distance in sweep)
        assert sweep[0][1] > lowest and sweep[-1][1] > lowest


@pytest.mark.slow
def test_acceptance_run_passes_with_fog_hardest():
    result = run_acceptance()
    assert result.checks["fog error is the largest"]
    assert all(result.checks.values()), summary_table(result)
    errors = result.errors_by_model()
    assert errors["fog"] > max(errors["raindrop"], errors["dirt"])


@pytest.mark.slow
def test_larger_populations_do_not_fit_worse():
    corpus = generate_corpus(8, 64, seed=0)
    w_star = get_model("raindrop").default_params()
    medians = ablate_population(corpus.images, w_star, populations=(10, 25, 50))
    assert medians[10] >= medians[25] >= medians[50]
