# SPDX-License-Identifier: Apache-2.0

"""Tests for the diff-checked parameter exporter and CSV writer."""

from occlusion_toolkit.core.exporter import export_params, format_value, read_params, write_csv


def test_format_value():
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(1234567890.5) == "1.23456789e+09"
    assert format_value(3) == "3"


def test_export_only_writes_changes(tmp_path):
    path = tmp_path / "params.out"
    assert export_params({"sigma": 2.5, "alpha": 0.25}, path)
    assert path.read_text() == "sigma=2.5\nalpha=0.25\n"
    assert not export_params({"sigma": 2.5, "alpha": 0.25}, path)
    assert export_params({"sigma": 3.0, "alpha": 0.25}, path, show_diff=False)
    assert read_params(path) == {"sigma": "3", "alpha": "0.25"}


def test_read_params_skips_comments(tmp_path):
    path = tmp_path / "params.out"
    path.write_text("# header\n\nbeta = 12.5\nnoise\n")
    assert read_params(path) == {"beta": "12.5"}


def test_write_csv(tmp_path):
    path = tmp_path / "table.csv"
    assert write_csv(path, ["name", "value"], [["a", 1.0 / 3.0], ["b", 2]]) == 2
    assert path.read_text().splitlines() == ["name,value", "a,0.333333333", "b,2"]
