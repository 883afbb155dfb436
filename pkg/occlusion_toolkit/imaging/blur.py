# SPDX-License-Identifier: Apache-2.0

"""Gaussian point-spread blur shared by all occlusion models."""

import math

import numpy as np
from scipy.ndimage import convolve1d

from .image import Image


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma < 0:
        raise ValueError(f"Blur sigma must be finite and >= 0, got {sigma}")
    return sigma


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian kernel with radius ceil(3 * sigma)."""
    sigma = _check_sigma(sigma)
    if sigma == 0:
        return np.ones(1)
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x**2) / (2.0 * sigma**2))
    return kernel / kernel.sum()


def blur_array(array: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur over the first two axes of ``array``.

    Borders are reflect-padded (half-sample symmetric), which keeps the
    operator doubly stochastic so the raster mean is preserved.
    """
    sigma = _check_sigma(sigma)
    if sigma == 0:
        return np.array(array, dtype=np.float64, copy=True)
    kernel = gaussian_kernel(sigma)
    out = convolve1d(np.asarray(array, dtype=np.float64), kernel, axis=0, mode="reflect")
    return convolve1d(out, kernel, axis=1, mode="reflect")


def gaussian_blur(img: Image, sigma: float) -> Image:
    """Blur an image with a Gaussian PSF of standard deviation ``sigma`` pixels.

    ``sigma == 0`` returns the input unchanged.
    """
    if _check_sigma(sigma) == 0:
        return img
    return Image(blur_array(img.data, sigma))
