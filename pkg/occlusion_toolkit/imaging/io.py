# SPDX-License-Identifier: Apache-2.0

"""Raster I/O: 8-bit RGB PNG for colour, 16-bit PGM for depth and scalar maps."""

import os
from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from ..core.exceptions import ImageIOError
from .image import DepthMap, Image

PathLike = Union[str, Path]

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
PNG_COLOR_TYPES = {0: "grayscale", 2: "RGB", 3: "palette", 4: "gray+alpha", 6: "RGBA"}
PGM_MAX = 65535
SKY_SENTINEL = PGM_MAX


def _check_parent(path: Path) -> None:
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise ImageIOError(path, f"directory {parent} does not exist")


def _png_header(path: Path):
    """Return (bit_depth, color_type) from the PNG IHDR chunk."""
    try:
        with open(path, "rb") as f:
            header = f.read(26)
    except FileNotFoundError:
        raise ImageIOError(path, "file not found")
    except OSError as e:
        raise ImageIOError(path, f"cannot read file ({e})")
    if len(header) < 26 or header[:8] != PNG_SIGNATURE or header[12:16] != b"IHDR":
        raise ImageIOError(path, "not a PNG file")
    return header[24], header[25]


def load_image(path: PathLike) -> Image:
    """Load an 8-bit RGB PNG, mapping samples to [0, 1] by v / 255.

    Raises:
        ImageIOError: Missing file, non-PNG content, unsupported bit depth or
            colour type
    """
    path = Path(path)
    bit_depth, color_type = _png_header(path)
    if bit_depth != 8:
        raise ImageIOError(path, f"unsupported bit depth {bit_depth}")
    if color_type != 2:
        kind = PNG_COLOR_TYPES.get(color_type, str(color_type))
        raise ImageIOError(path, f"unsupported color type {kind}")

    try:
        with PILImage.open(path) as im:
            array = np.asarray(im.convert("RGB"), dtype=np.float64)
    except (OSError, UnidentifiedImageError) as e:
        raise ImageIOError(path, f"cannot decode PNG ({e})")

    logger.debug(f"Loaded image {path} ({array.shape[1]}x{array.shape[0]})")
    return Image(array / 255.0)


def save_image(img: Image, path: PathLike) -> None:
    """Save an Image as 8-bit RGB PNG (round to nearest level)."""
    path = Path(path)
    _check_parent(path)
    quantized = np.round(img.data * 255.0).astype(np.uint8)
    try:
        PILImage.fromarray(quantized, "RGB").save(path, format="PNG")
    except OSError as e:
        raise ImageIOError(path, f"cannot write PNG ({e})")
    logger.debug(f"Saved image {path}")


def read_pgm16(path: PathLike) -> np.ndarray:
    """Read a 16-bit binary PGM (P5) into a uint16 array of shape (H, W)."""
    path = Path(path)
    if not path.exists():
        raise ImageIOError(path, "file not found")
    try:
        with PILImage.open(path) as im:
            if im.format != "PPM":
                raise ImageIOError(path, "not a PGM file")
            if im.mode not in ("I", "I;16", "I;16B"):
                raise ImageIOError(path, f"unsupported bit depth (mode {im.mode})")
            array = np.asarray(im)
    except (OSError, UnidentifiedImageError) as e:
        raise ImageIOError(path, f"cannot decode PGM ({e})")
    return array.astype(np.uint16)


def write_pgm16(array: np.ndarray, path: PathLike) -> None:
    """Write integer samples in [0, 65535] as a 16-bit binary PGM."""
    path = Path(path)
    _check_parent(path)
    values = np.asarray(array)
    if values.ndim != 2:
        raise ValueError(f"PGM raster must be 2-D, got {values.shape}")
    if values.min() < 0 or values.max() > PGM_MAX:
        raise ValueError("PGM samples must lie in [0, 65535]")
    try:
        PILImage.fromarray(values.astype(np.int32)).save(path, format="PPM")
    except OSError as e:
        raise ImageIOError(path, f"cannot write PGM ({e})")


def write_pbm(mask: np.ndarray, path: PathLike) -> None:
    """Write a boolean raster as 1-bit PBM (True is stored as white)."""
    path = Path(path)
    _check_parent(path)
    try:
        PILImage.fromarray(np.asarray(mask, dtype=bool)).save(path, format="PPM")
    except OSError as e:
        raise ImageIOError(path, f"cannot write PBM ({e})")


def read_pbm(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ImageIOError(path, "file not found")
    try:
        with PILImage.open(path) as im:
            return np.asarray(im.convert("1"), dtype=bool)
    except (OSError, UnidentifiedImageError) as e:
        raise ImageIOError(path, f"cannot decode PBM ({e})")


def load_depth(path: PathLike, meters_per_unit: float) -> DepthMap:
    """Load a 16-bit PGM depth raster.

    Args:
        path: PGM file
        meters_per_unit: Scale from stored units to metres
            (configuration key ``depth.meters_per_unit``)

    Returns:
        DepthMap in metres; 65535 maps to +inf (sky)

    Raises:
        ImageIOError: Unreadable file or a zero sample ("non-positive depth")
    """
    if meters_per_unit <= 0:
        raise ValueError("meters_per_unit must be positive")
    raw = read_pgm16(path)
    if np.any(raw == 0):
        raise ImageIOError(path, "non-positive depth")
    depth = raw.astype(np.float64) * meters_per_unit
    depth[raw == SKY_SENTINEL] = np.inf
    logger.debug(f"Loaded depth map {path} ({raw.shape[1]}x{raw.shape[0]})")
    return DepthMap(depth)


def save_depth(depth: DepthMap, path: PathLike, meters_per_unit: float) -> None:
    """Inverse of :func:`load_depth`; finite depths are clipped to [1, 65534] units."""
    units = np.full(depth.shape, SKY_SENTINEL, dtype=np.int64)
    finite = np.isfinite(depth.data)
    units[finite] = np.clip(
        np.round(depth.data[finite] / meters_per_unit), 1, SKY_SENTINEL - 1
    ).astype(np.int64)
    write_pgm16(units, path)


def list_images(directory: PathLike) -> list:
    """Sorted PNG files of a directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageIOError(directory, "not a directory")
    return sorted(
        Path(directory, name)
        for name in os.listdir(directory)
        if name.lower().endswith(".png")
    )
