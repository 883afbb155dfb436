# SPDX-License-Identifier: Apache-2.0

"""Patch features and their analytic adjoint.

Each non-overlapping ``P x P`` patch yields 15 scalars: channel means (3),
channel standard deviations (3), a soft 8-bin histogram of the grey-level
gradient magnitude (8) and the Laplacian energy (1). Pixels beyond the last
full patch are ignored. :func:`feature_adjoint` maps a gradient with respect
to the feature raster back onto the pixels.
"""

from dataclasses import dataclass

import numpy as np

from ..core.exceptions import DimensionError

FEATURE_COUNT = 15
HIST_BINS = 8
HIST_BIN_WIDTH = 0.05
HIST_CENTERS = (np.arange(HIST_BINS) + 0.5) * HIST_BIN_WIDTH
GRADIENT_EPS = 1e-4
STD_EPS = 1e-8

FEATURE_NAMES = (
    ["mean_r", "mean_g", "mean_b", "std_r", "std_g", "std_b"]
    + [f"grad_hist_{k}" for k in range(HIST_BINS)]
    + ["laplacian_energy"]
)


def _pool(a: np.ndarray, p: int) -> np.ndarray:
    h, w = a.shape[0] // p, a.shape[1] // p
    return a.reshape(h, p, w, p, *a.shape[2:]).mean(axis=(1, 3))


def _unpool(g: np.ndarray, p: int) -> np.ndarray:
    return np.repeat(np.repeat(g, p, axis=0), p, axis=1)


def _dx(g: np.ndarray) -> np.ndarray:
    out = np.zeros_like(g)
    out[:, :-1] = g[:, 1:] - g[:, :-1]
    return out


def _dx_adjoint(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[:, 1:] += a[:, :-1]
    out[:, :-1] -= a[:, :-1]
    return out


def _dy(g: np.ndarray) -> np.ndarray:
    return _dx(g.T).T


def _dy_adjoint(a: np.ndarray) -> np.ndarray:
    return _dx_adjoint(a.T).T


def laplacian(g: np.ndarray) -> np.ndarray:
    """Symmetric 5-point Laplacian -(Dx^T Dx + Dy^T Dy) g."""
    return -(_dx_adjoint(_dx(g)) + _dy_adjoint(_dy(g)))


def patch_grid(height: int, width: int, patch_size: int):
    """Number of patch rows and columns; raises if the image is too small."""
    if patch_size < 1:
        raise ValueError(f"patch_size must be >= 1, got {patch_size}")
    if height < patch_size or width < patch_size:
        raise DimensionError(
            f"Image {width}x{height} is smaller than patch size {patch_size}"
        )
    return height // patch_size, width // patch_size


@dataclass
class FeatureForward:
    """Intermediate values of one feature evaluation, kept for the adjoint."""

    patch_size: int
    x: np.ndarray
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    lap: np.ndarray
    means: np.ndarray
    raw_std: np.ndarray
    bin_weights: np.ndarray
    features: np.ndarray


def forward(data: np.ndarray, patch_size: int) -> FeatureForward:
    """Evaluate the feature raster ``(rows, cols, 15)`` of an (H, W, 3) array."""
    rows, cols = patch_grid(data.shape[0], data.shape[1], patch_size)
    p = patch_size
    x = np.asarray(data, dtype=np.float64)[: rows * p, : cols * p]

    means = _pool(x, p)
    centered = x - _unpool(means, p)
    raw_std = np.sqrt(_pool(centered**2, p) + STD_EPS)
    std = raw_std - np.sqrt(STD_EPS)

    gray = x.mean(axis=2)
    gx, gy = _dx(gray), _dy(gray)
    magnitude = np.sqrt(gx**2 + gy**2 + GRADIENT_EPS)
    offsets = magnitude[None] - HIST_CENTERS[:, None, None]
    bin_weights = np.exp(-(offsets**2) / (2.0 * HIST_BIN_WIDTH**2))
    histogram = np.stack([_pool(w, p) for w in bin_weights], axis=-1)

    lap = laplacian(gray)
    energy = _pool(lap**2, p)[..., None]

    features = np.concatenate([means, std, histogram, energy], axis=-1)
    return FeatureForward(
        p, x, gx, gy, magnitude, lap, means, raw_std, bin_weights, features
    )


def patch_features(data: np.ndarray, patch_size: int) -> np.ndarray:
    return forward(data, patch_size).features


def feature_adjoint(fwd: FeatureForward, grad: np.ndarray, shape) -> np.ndarray:
    """Pull ``d loss / d features`` back to ``d loss / d pixels``.

    Args:
        fwd: Forward intermediates from :func:`forward`
        grad: Array shaped like ``fwd.features``
        shape: Full (H, W, 3) shape of the image the features came from

    Returns:
        Pixel gradient of the full image, zero outside the patch grid
    """
    p = fwd.patch_size
    area = float(p * p)
    out = np.zeros_like(fwd.x)

    # channel means and standard deviations
    out += _unpool(grad[..., 0:3], p) / area
    centered = fwd.x - _unpool(fwd.means, p)
    out += centered / (_unpool(fwd.raw_std, p) * area) * _unpool(grad[..., 3:6], p)

    # gradient-magnitude histogram
    d_mag = np.zeros_like(fwd.magnitude)
    for k, center in enumerate(HIST_CENTERS):
        slope = -fwd.bin_weights[k] * (fwd.magnitude - center) / HIST_BIN_WIDTH**2
        d_mag += _unpool(grad[..., 6 + k], p) / area * slope
    d_gray = _dx_adjoint(d_mag * fwd.gx / fwd.magnitude)
    d_gray += _dy_adjoint(d_mag * fwd.gy / fwd.magnitude)

    # laplacian energy
    d_gray += laplacian(2.0 * fwd.lap * _unpool(grad[..., 14], p) / area)

    out += d_gray[..., None] / 3.0

    full = np.zeros(shape)
    full[: out.shape[0], : out.shape[1]] = out
    return full
