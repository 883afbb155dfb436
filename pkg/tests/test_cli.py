# SPDX-License-Identifier: Apache-2.0

"""Tests for the command-line interface."""

import sys

import pytest
from click.testing import CliRunner
from loguru import logger

from occlusion_toolkit.bench import AcceptanceResult
from occlusion_toolkit.cli.main import cli
from occlusion_toolkit.core.exporter import read_params
from occlusion_toolkit.imaging.io import load_image, read_pbm, read_pgm16


@pytest.fixture(autouse=True)
def restore_logger():
    yield
    logger.remove()
    logger.add(sys.stderr, level="INFO")


@pytest.fixture
def runner():
    return CliRunner()


def test_config_info(runner):
    result = runner.invoke(cli, ["config-info"])
    assert result.exit_code == 0
    assert "Occlusion Toolkit Configuration:" in result.output
    assert "Gamma:" in result.output


def test_render_fog_without_beta_is_identity(runner, dataset, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        cli,
        ["render", "--model", "fog", "--beta", "0", "--sources", str(dataset["sources"]),
         "--depth", str(dataset["depth"]), "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    for source in dataset["source_paths"]:
        assert load_image(out / source.name) == load_image(source)
        assert not read_pgm16(out / f"{source.stem}_alpha.pgm").any()


def test_render_fog_requires_depth(runner, dataset, tmp_path):
    result = runner.invoke(
        cli,
        ["render", "--model", "fog", "--sources", str(dataset["sources"]), "--out", str(tmp_path / "out")],
    )
    assert result.exit_code == 2


def test_render_is_deterministic(runner, dataset, tmp_path):
    for run in ("a", "b"):
        result = runner.invoke(
            cli,
            ["render", "--model", "raindrop", "--seed", "7", "--sigma", "1",
             "--sources", str(dataset["sources"]), "--out", str(tmp_path / run)],
        )
        assert result.exit_code == 0, result.output
    for source in dataset["source_paths"]:
        assert (tmp_path / "a" / source.name).read_bytes() == (tmp_path / "b" / source.name).read_bytes()


def test_render_composite_with_fence(runner, dataset, tmp_path):
    result = runner.invoke(
        cli,
        ["render", "--model", "composite", "--sources", str(dataset["sources"]), "--out", str(tmp_path / "out")],
    )
    assert result.exit_code == 0, result.output
    alpha = read_pgm16(tmp_path / "out" / f"{dataset['source_paths'][0].stem}_alpha.pgm")
    assert alpha.max() > 0


def test_fit_with_empty_targets(runner, dataset, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    result = runner.invoke(
        cli,
        ["fit", "--model", "dirt", "--sources", str(dataset["sources"]), "--targets", str(empty),
         "--out", str(tmp_path / "out")],
    )
    assert result.exit_code == 2


def test_fit_writes_params_and_trace(runner, dataset, tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("depth:\n  meters_per_unit: 0.001\n", encoding="utf-8")
    out = tmp_path / "out"
    result = runner.invoke(
        cli,
        ["fit", "--config", str(config), "--model", "fog", "--beta", "10", "--max-iters", "3",
         "--sources", str(dataset["sources"]), "--targets", str(dataset["targets"]),
         "--depth", str(dataset["depth"]), "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    assert set(read_params(out / "params.out")) == {"beta"}
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0] == "round,block,iter,loss,beta"
    assert 2 <= len(trace) <= 5


def test_fit_only_differentiable_freezes_drop_types(runner, dataset, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        cli,
        ["fit", "--model", "raindrop", "--only-differentiable", "--max-iters", "2",
         "--sources", str(dataset["sources"]), "--targets", str(dataset["targets"]), "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    params = read_params(out / "params.out")
    assert params["p0"] == "500"
    assert params["s3"] == "16"


def test_guidance_gamma_zero(runner, dataset, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        cli,
        ["guidance", "--gamma", "0", "--sources", str(dataset["sources"]),
         "--targets", str(dataset["targets"]), "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    assert not read_pbm(out / "mask_gamma0.pbm").any()
    dg = read_pgm16(out / "dg.pgm")
    assert dg.min() == 0 and dg.max() == 65535


def test_guidance_gamma_out_of_range(runner, dataset, tmp_path):
    result = runner.invoke(cli, ["guidance", "--gamma", "2", "--sources", str(dataset["sources"])])
    assert result.exit_code == 2


def test_bench_fog_only(runner, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        cli,
        ["bench", "--models", "fog", "--seeds", "1", "--images", "4", "--size", "32",
         "--max-iters", "2", "--no-landscape", "--out", str(out)],
    )
    assert result.exit_code == (1 if "FAIL" in result.output else 0), result.output
    rows = (out / "recovery.csv").read_text().splitlines()
    assert len(rows) == 1 + 4
    assert all(row.startswith("fog,beta,") for row in rows[1:])
    assert "mean error %" in result.output
    assert not (out / "landscape.csv").exists()


@pytest.mark.parametrize("passed, code", [(True, 0), (False, 1)])
def test_bench_exit_code_follows_the_checks(runner, monkeypatch, tmp_path, passed, code):
    monkeypatch.setattr(
        "occlusion_toolkit.cli.main.run_bench",
        lambda cfg: AcceptanceResult(checks={"dirt alpha error <= 10%": passed}),
    )
    result = runner.invoke(cli, ["bench", "--models", "dirt", "--out", str(tmp_path)])
    assert result.exit_code == code, result.output
    assert ("FAIL" in result.output) is not passed


def test_bench_reads_a_section_config(runner, monkeypatch, tmp_path):
    seen = {}

    def fake_bench(cfg):
        seen["cfg"] = cfg
        return AcceptanceResult(checks={"dirt alpha error <= 10%": True})

    monkeypatch.setattr("occlusion_toolkit.cli.main.run_bench", fake_bench)
    path = tmp_path / "bench.cfg"
    path.write_text("seed = 5\n[bench]\nmodels = [dirt]\nseeds = [4]\n", encoding="utf-8")
    result = runner.invoke(cli, ["bench", "--config", str(path), "--images", "8"])
    assert result.exit_code == 0, result.output
    cfg = seen["cfg"]
    assert (cfg.seed, cfg.bench.models, cfg.bench.seeds, cfg.bench.images) == (5, ["dirt"], [4], 8)


def test_bench_rejects_bad_seed_lists(runner):
    result = runner.invoke(cli, ["bench", "--seeds", "one,two"])
    assert result.exit_code == 2
