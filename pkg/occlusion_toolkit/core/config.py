# SPDX-License-Identifier: Apache-2.0

"""Configuration management for the occlusion toolkit.

Two layers: :class:`Config` holds process-wide defaults read from the
environment, :class:`RunConfig` is the validated per-run configuration loaded
from a ``[section]`` / ``key = value`` file or YAML and overridden by CLI
flags.
"""

import configparser
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .exceptions import ConfigError


class Config:
    """Environment-driven defaults."""

    def __init__(self):
        # Output
        self.OUTPUT_DIR: str = os.getenv("OCCLUSION_OUTPUT_DIR", "./out")
        self.LOG_LEVEL: str = os.getenv("OCCLUSION_LOG_LEVEL", "INFO")

        # Worker cap for per-image and per-candidate evaluations
        self.THREADS: int = int(os.getenv("OCCLUSION_THREADS", "1"))

        # Depth rasters
        self.DEPTH_METERS_PER_UNIT: float = float(
            os.getenv("OCCLUSION_DEPTH_METERS_PER_UNIT", "0.1")
        )

        # Estimation
        self.CRITIC: str = os.getenv("OCCLUSION_CRITIC", "moment")
        self.GAMMA: float = float(os.getenv("OCCLUSION_GAMMA", "0.75"))


# Global configuration instance
config = Config()


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(_Section):
    name: Literal["raindrop", "dirt", "fog", "composite"] = "raindrop"
    variant: Literal["full", "refract", "gaussian"] = "full"
    params: Dict[str, float] = Field(default_factory=dict)
    atmospheric_light: Optional[Tuple[float, float, float]] = None


class PathsSection(_Section):
    sources: Optional[Path] = None
    targets: Optional[Path] = None
    depth: Optional[Path] = None
    udisp: Optional[Path] = None
    vdisp: Optional[Path] = None
    critic: Optional[Path] = None
    overlay: Optional[Path] = None
    out: Path = Field(default_factory=lambda: Path(config.OUTPUT_DIR))


class DepthSection(_Section):
    meters_per_unit: float = Field(default_factory=lambda: config.DEPTH_METERS_PER_UNIT)

    @field_validator("meters_per_unit")
    @classmethod
    def _positive(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("meters_per_unit must be positive")
        return value


class EstimateSection(_Section):
    critic: Literal["patch", "moment"] = Field(default_factory=lambda: config.CRITIC)
    patch_size: int = Field(default=8, ge=1)
    max_iters: int = Field(default=60, ge=1)
    batch_size: Optional[int] = Field(default=None, ge=1)
    tol: float = Field(default=1e-4, ge=0)
    lr_decay: float = Field(default=0.95, gt=0, le=1)
    resample_seeds: bool = False
    learning_rate: Dict[str, float] = Field(default_factory=dict)
    fd_step: Dict[str, float] = Field(default_factory=dict)
    only_differentiable: bool = False
    k_d: int = Field(default=20, ge=1)
    k_g: int = Field(default=5, ge=1)
    max_rounds: int = Field(default=10, ge=1)
    n_samples: int = Field(default=8, ge=1)
    restarts: int = Field(default=1, ge=1)


class CmaSection(_Section):
    population: int = Field(default=10, ge=2)
    sigma0: float = Field(default=0.2, gt=0)
    warm_start: Optional[Dict[str, float]] = None


class BenchSection(_Section):
    models: List[Literal["raindrop", "dirt", "fog"]] = Field(
        default_factory=lambda: ["raindrop", "dirt", "fog"]
    )
    seeds: List[int] = Field(default_factory=lambda: [1, 2, 3])
    images: int = Field(default=64, ge=2)
    size: int = Field(default=128, ge=16)
    landscape: bool = True


class RunConfig(_Section):
    """Validated configuration for one CLI invocation."""

    seed: int = Field(default=0, ge=0, lt=2**64)
    threads: int = Field(default=0, ge=0)
    gamma: float = Field(default_factory=lambda: config.GAMMA, ge=0.0, le=1.0)
    model: ModelSection = Field(default_factory=ModelSection)
    paths: PathsSection = Field(default_factory=PathsSection)
    depth: DepthSection = Field(default_factory=DepthSection)
    estimate: EstimateSection = Field(default_factory=EstimateSection)
    cma: CmaSection = Field(default_factory=CmaSection)
    bench: BenchSection = Field(default_factory=BenchSection)

    def require(self, *dotted_keys: str) -> None:
        """Raise ConfigError unless every dotted key is set."""
        for key in dotted_keys:
            value: Any = self
            for part in key.split("."):
                value = getattr(value, part, None)
            if value is None:
                raise ConfigError(f"Missing required configuration key '{key}'")


def _set_dotted(data: Dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"Configuration key '{part}' is not a section")
        node = child
    node[parts[-1]] = value


INI_SUFFIXES = (".ini", ".cfg", ".conf")
# Keys above the first header, and keys under [run], are top-level settings
INI_ROOT_SECTION = "run"
INI_HEADER = re.compile(r"\[[A-Za-z_][\w.]*\]")


def _is_ini(path: Path, text: str) -> bool:
    if path.suffix.lower() in INI_SUFFIXES:
        return True
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith(("#", ";")):
            return INI_HEADER.fullmatch(stripped) is not None
    return False


def _parse_ini(path: Path, text: str) -> Dict[str, Any]:
    """``[section]`` / ``key = value`` text as nested sections.

    A dotted header such as ``[model.params]`` addresses a nested section.
    Values are read as YAML scalars, so ``0.5``, ``true`` and ``[1, 2]``
    keep their types.
    """
    parser = configparser.ConfigParser(
        interpolation=None, strict=False, default_section="__defaults__"
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{INI_ROOT_SECTION}]\n{text}", source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"Could not parse configuration {path}: {e}")

    data: Dict[str, Any] = {}
    for section in parser.sections():
        node = data
        if section != INI_ROOT_SECTION:
            for part in section.split("."):
                node = node.setdefault(part, {})
                if not isinstance(node, dict):
                    raise ConfigError(f"Configuration key '{part}' is not a section")
        for key, raw in parser.items(section):
            try:
                value = yaml.safe_load(raw) if raw.strip() else None
            except yaml.YAMLError as e:
                raise ConfigError(f"Bad value for '{key}' in [{section}] of {path}: {e}")
            _set_dotted(node, key, value)
    return data


def _read_config_file(path: Path) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Could not read configuration {path}: {e}")
    if _is_ini(path, text):
        return _parse_ini(path, text)

    try:
        loaded = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Could not read configuration {path}: {e}")
    if loaded is not None and not isinstance(loaded, dict):
        raise ConfigError(f"Configuration {path} must be a mapping")
    return loaded or {}


def load_run_config(
    path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """Load a run configuration file and apply dotted-key overrides.

    The file is either ``[section]`` / ``key = value`` text (detected by a
    ``.ini``/``.cfg``/``.conf`` suffix or a leading section header) or YAML.

    Args:
        path: Configuration file, or None for defaults only
        overrides: Mapping of dotted keys (e.g. ``depth.meters_per_unit``) to
            values; entries whose value is None are ignored

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: On unreadable or malformed files and invalid keys
    """
    data: Dict[str, Any] = _read_config_file(path) if path is not None else {}

    for key, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(data, key, value)

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}")
