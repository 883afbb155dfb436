# SPDX-License-Identifier: Apache-2.0

"""Tests for environment defaults and run configuration files."""

from pathlib import Path

import pytest

from occlusion_toolkit.core.config import Config, RunConfig, load_run_config
from occlusion_toolkit.core.exceptions import ConfigError


def test_environment_defaults(monkeypatch):
    monkeypatch.setenv("OCCLUSION_GAMMA", "0.5")
    monkeypatch.setenv("OCCLUSION_THREADS", "3")
    env = Config()
    assert env.GAMMA == 0.5
    assert env.THREADS == 3
    assert env.CRITIC == "moment"


def test_defaults_without_a_file():
    cfg = load_run_config()
    assert cfg.seed == 0
    assert cfg.model.name == "raindrop"
    assert cfg.gamma == pytest.approx(0.75)
    assert cfg.estimate.restarts == 1


def test_yaml_sections_and_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "seed: 7\n"
        "model:\n"
        "  name: dirt\n"
        "  params:\n"
        "    alpha: 0.3\n"
        "depth:\n"
        "  meters_per_unit: 0.5\n"
        "estimate:\n"
        "  learning_rate:\n"
        "    alpha: 0.01\n",
        encoding="utf-8",
    )
    cfg = load_run_config(path, {"model.params.sigma": 1.5, "seed": None, "paths.out": "results"})
    assert cfg.seed == 7
    assert cfg.model.name == "dirt"
    assert cfg.model.params == {"alpha": 0.3, "sigma": 1.5}
    assert cfg.depth.meters_per_unit == 0.5
    assert cfg.estimate.learning_rate == {"alpha": 0.01}
    assert cfg.paths.out == Path("results")


def test_section_file_matches_the_yaml_form(tmp_path):
    ini = tmp_path / "run.cfg"
    ini.write_text(
        "# fitted on the wet road set\n"
        "seed = 7\n"
        "\n"
        "[model]\n"
        "name = dirt\n"
        "\n"
        "[model.params]\n"
        "alpha = 0.3\n"
        "\n"
        "[depth]\n"
        "meters_per_unit = 0.5\n"
        "\n"
        "[bench]\n"
        "seeds = [4, 5]\n"
        "landscape = false\n",
        encoding="utf-8",
    )
    yml = tmp_path / "run.yaml"
    yml.write_text(
        "seed: 7\n"
        "model: {name: dirt, params: {alpha: 0.3}}\n"
        "depth: {meters_per_unit: 0.5}\n"
        "bench: {seeds: [4, 5], landscape: false}\n",
        encoding="utf-8",
    )
    from_ini = load_run_config(ini, {"model.params.sigma": 1.5})
    assert from_ini == load_run_config(yml, {"model.params.sigma": 1.5})
    assert from_ini.model.params == {"alpha": 0.3, "sigma": 1.5}
    assert from_ini.bench.seeds == [4, 5]
    assert from_ini.bench.landscape is False


def test_section_file_detected_by_its_header(tmp_path):
    path = tmp_path / "run.txt"
    path.write_text("; defaults\n[run]\ngamma = 0.5\nthreads = 2\n[estimate]\ncritic = patch\n", encoding="utf-8")
    cfg = load_run_config(path)
    assert cfg.gamma == 0.5
    assert cfg.threads == 2
    assert cfg.estimate.critic == "patch"


def test_section_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[model]\ncolour = red\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(path)
    path.write_text("[lens]\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(path)
    path.write_text("[model\nname = fog\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_unknown_keys_are_rejected(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("model:\n  colour: red\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(path)
    with pytest.raises(ConfigError):
        load_run_config(None, {"estimate.learning_rat": 1})


def test_invalid_values(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(None, {"gamma": 1.5})
    with pytest.raises(ConfigError):
        load_run_config(None, {"model.name": "smoke"})
    with pytest.raises(ConfigError):
        load_run_config(None, {"depth.meters_per_unit": 0})


def test_malformed_files(tmp_path):
    (tmp_path / "bad.yaml").write_text("model: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "bad.yaml")
    (tmp_path / "list.yaml").write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "list.yaml")
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.yaml")


def test_override_into_a_scalar_fails():
    with pytest.raises(ConfigError):
        load_run_config(None, {"seed.value": 1})


def test_require():
    cfg = RunConfig()
    cfg.require("paths.out")
    with pytest.raises(ConfigError, match="paths.sources"):
        cfg.require("paths.sources")
