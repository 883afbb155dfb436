# SPDX-License-Identifier: Apache-2.0

"""Image containers, raster I/O and the Gaussian point-spread blur."""

from .image import Image, DepthMap
from .blur import gaussian_blur, blur_array, gaussian_kernel
from .io import (
    load_image,
    save_image,
    load_depth,
    save_depth,
    read_pgm16,
    write_pgm16,
    read_pbm,
    write_pbm,
    list_images,
)

__all__ = [
    "Image",
    "DepthMap",
    "gaussian_blur",
    "blur_array",
    "gaussian_kernel",
    "load_image",
    "save_image",
    "load_depth",
    "save_depth",
    "read_pgm16",
    "write_pgm16",
    "read_pbm",
    "write_pbm",
    "list_images",
]
