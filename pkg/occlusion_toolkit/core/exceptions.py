# SPDX-License-Identifier: Apache-2.0

"""Exception hierarchy shared by the library and the CLI."""

from typing import List, Optional


class OcclusionToolkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(OcclusionToolkitError):
    """Invalid or incomplete run configuration."""

    exit_code = 2


class NumericalError(OcclusionToolkitError):
    """A loss or gradient evaluation produced a non-finite value."""

    exit_code = 3

    def __init__(self, message: str, trace: Optional[List] = None):
        super().__init__(message)
        self.trace = list(trace) if trace else []


class ImageIOError(OcclusionToolkitError):
    """Reading or writing a raster failed."""

    exit_code = 4

    def __init__(self, path, cause: str):
        super().__init__(f"{path}: {cause}")
        self.path = path
        self.cause = cause


class ParameterError(OcclusionToolkitError, ValueError):
    """A model parameter violates its invariants."""

    exit_code = 2


class DimensionError(OcclusionToolkitError, ValueError):
    """Two rasters that must share dimensions do not."""

    exit_code = 2
