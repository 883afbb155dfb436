# SPDX-License-Identifier: Apache-2.0

"""Finite-difference gradients with bound-aware one-sided fallback."""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from loguru import logger


@dataclass(frozen=True)
class GradientResult:
    gradient: np.ndarray
    one_sided: Tuple[int, ...] = ()
    evaluations: int = 0


def finite_difference_gradient(
    func: Callable[[np.ndarray], float],
    x: Sequence[float],
    steps: Sequence[float],
    bounds: Optional[np.ndarray] = None,
    f0: Optional[float] = None,
) -> GradientResult:
    """Central differences of ``func`` at ``x``.

    A component whose ``x +- step`` leaves its bounds falls back to a
    one-sided difference towards the feasible side; its index is reported in
    ``one_sided``.

    Args:
        func: Scalar function of a parameter vector
        x: Evaluation point
        steps: Positive step per component
        bounds: Optional (n, 2) array of [lo, hi]
        f0: ``func(x)`` if already known

    Returns:
        GradientResult
    """
    x0 = np.asarray(x, dtype=np.float64)
    steps = np.asarray(steps, dtype=np.float64)
    if np.any(steps <= 0):
        raise ValueError("finite-difference steps must be positive")
    n = x0.size
    lo = np.full(n, -np.inf) if bounds is None else np.asarray(bounds)[:, 0]
    hi = np.full(n, np.inf) if bounds is None else np.asarray(bounds)[:, 1]

    grad = np.zeros(n)
    one_sided = []
    evaluations = 0

    def at(j: int, value: float) -> float:
        nonlocal evaluations
        point = x0.copy()
        point[j] = value
        evaluations += 1
        return float(func(point))

    def centre() -> float:
        nonlocal f0, evaluations
        if f0 is None:
            f0 = float(func(x0))
            evaluations += 1
        return f0

    for j in range(n):
        h = steps[j]
        up, down = x0[j] + h <= hi[j], x0[j] - h >= lo[j]
        if up and down:
            grad[j] = (at(j, x0[j] + h) - at(j, x0[j] - h)) / (2.0 * h)
        elif up:
            grad[j] = (at(j, x0[j] + h) - centre()) / h
            one_sided.append(j)
        elif down:
            grad[j] = (centre() - at(j, x0[j] - h)) / h
            one_sided.append(j)
        else:
            span = hi[j] - lo[j]
            grad[j] = (at(j, hi[j]) - at(j, lo[j])) / span
            one_sided.append(j)

    if one_sided:
        logger.debug(f"One-sided differences for components {one_sided}")
    return GradientResult(grad, tuple(one_sided), evaluations)
