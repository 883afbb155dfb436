# SPDX-License-Identifier: Apache-2.0

"""Gradient descent on the differentiable parameter block."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..core.exceptions import NumericalError, ParameterError
from ..core.rng import STREAM_ESTIMATE, RngStream
from ..critic.critic import Critic
from ..guidance.maps import BinaryMask
from ..imaging.image import DepthMap, Image
from ..models.registry import OcclusionModel
from .gradient import GradientResult, finite_difference_gradient
from .objective import Objective
from .trace import BLOCK_DIFFERENTIABLE, TraceRow

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def _floats(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.ravel(values))


@dataclass(frozen=True)
class DiffEstimateConfig:
    """Settings of the differentiable estimator.

    ``fd_step`` may be left empty to use the model's default steps, which
    are re-evaluated at every iterate (relative steps follow the parameter).
    """

    learning_rate: Tuple[float, ...]
    bounds: Tuple[Tuple[float, float], ...]
    fd_step: Tuple[float, ...] = ()
    max_iters: int = 60
    batch_size: int = 0
    tol: float = 1e-4
    lr_decay: float = 0.95
    resample_seeds: bool = False

    def __post_init__(self):
        object.__setattr__(self, "learning_rate", _floats(self.learning_rate))
        object.__setattr__(self, "fd_step", _floats(self.fd_step))
        object.__setattr__(
            self, "bounds", tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        )
        if any(lr <= 0 for lr in self.learning_rate):
            raise ParameterError("learning_rate must be > 0")
        if any(h <= 0 for h in self.fd_step):
            raise ParameterError("fd_step must be > 0")
        if any(not lo < hi for lo, hi in self.bounds):
            raise ParameterError("bounds must satisfy lo < hi")
        if len(self.learning_rate) != len(self.bounds):
            raise ParameterError("learning_rate and bounds lengths differ")
        if self.fd_step and len(self.fd_step) != len(self.bounds):
            raise ParameterError("fd_step and bounds lengths differ")
        if self.max_iters < 0 or self.batch_size < 0:
            raise ParameterError("max_iters and batch_size must be >= 0")
        if not 0 < self.lr_decay <= 1:
            raise ParameterError("lr_decay must lie in (0, 1]")

    @classmethod
    def for_model(cls, model: OcclusionModel, **overrides) -> "DiffEstimateConfig":
        """Defaults derived from the model's bounds and learning rates."""
        settings = {
            "learning_rate": model.learning_rates(),
            "bounds": [tuple(b) for b in model.diff_bounds],
        }
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**settings)

    @property
    def bounds_array(self) -> np.ndarray:
        return np.array(self.bounds, dtype=np.float64).reshape(-1, 2)


@dataclass
class DiffEstimateResult:
    params: object
    loss: float
    initial_loss: float
    trace: List[TraceRow] = field(default_factory=list)
    one_sided: List[str] = field(default_factory=list)
    iterations: int = 0


class DifferentiableDescent:
    """Projected Adam over w_d with common random numbers.

    The source batch and seed list are drawn once and reused by every
    evaluation (including both sides of each finite difference) unless
    ``resample_seeds`` is set, in which case they are redrawn per step.
    """

    def __init__(
        self,
        model: OcclusionModel,
        objective: Objective,
        cfg: DiffEstimateConfig,
        rng: RngStream,
    ):
        n = len(model.diff_names)
        if len(cfg.bounds) != n:
            raise ParameterError(
                f"Config has {len(cfg.bounds)} bounds for {n} differentiable parameters"
            )
        self.model = model
        self.objective = objective
        self.cfg = cfg
        self.rng = rng
        self.step_count = 0
        self._m = np.zeros(n)
        self._v = np.zeros(n)
        self.one_sided: List[str] = []
        self._draw_batch()

    def _draw_batch(self) -> None:
        n = len(self.objective)
        size = self.cfg.batch_size or n
        if size < n:
            self.indices = sorted(int(i) for i in self.rng.choice(n, size))
        else:
            self.indices = list(range(n))
        self.seeds = self.rng.seeds(len(self.indices))

    def evaluate(self, params) -> float:
        loss = self.objective.evaluate(params, self.seeds, self.indices)
        if not np.isfinite(loss):
            raise NumericalError(f"Non-finite objective at {self.model.to_dict(params)}")
        return loss

    def check_bounds(self, params) -> None:
        x = self.model.diff_vector(params)
        b = self.cfg.bounds_array
        if np.any(x < b[:, 0]) or np.any(x > b[:, 1]):
            raise ParameterError(f"Initial parameters {x} outside bounds {self.cfg.bounds}")

    def gradient(self, params, loss: Optional[float] = None) -> GradientResult:
        steps = self.cfg.fd_step or self.model.fd_steps(params)
        result = finite_difference_gradient(
            lambda w: self.evaluate(self.model.with_diff(params, w)),
            self.model.diff_vector(params),
            steps,
            self.cfg.bounds_array,
            f0=loss,
        )
        for j in result.one_sided:
            name = self.model.diff_names[j]
            if name not in self.one_sided:
                logger.warning(f"One-sided finite difference for {name} at its bound")
                self.one_sided.append(name)
        return result

    def step(self, params, loss: float):
        """One projected Adam step; returns (params, loss, relative change)."""
        if self.cfg.resample_seeds:
            self._draw_batch()
            loss = self.evaluate(params)
        grad = self.gradient(params, loss).gradient
        if not np.all(np.isfinite(grad)):
            raise NumericalError(f"Non-finite gradient {grad}")

        self.step_count += 1
        t = self.step_count
        self._m = ADAM_BETA1 * self._m + (1 - ADAM_BETA1) * grad
        self._v = ADAM_BETA2 * self._v + (1 - ADAM_BETA2) * grad**2
        m_hat = self._m / (1 - ADAM_BETA1**t)
        v_hat = self._v / (1 - ADAM_BETA2**t)
        lr = np.asarray(self.cfg.learning_rate) * self.cfg.lr_decay ** (t - 1)

        x = self.model.diff_vector(params)
        bounds = self.cfg.bounds_array
        x_new = np.clip(x - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS), bounds[:, 0], bounds[:, 1])
        new_params = self.model.with_diff(params, x_new)
        new_loss = self.evaluate(new_params)
        change = float(np.max(np.abs(x_new - x) / np.maximum(np.abs(x), 1e-8), initial=0.0))
        return new_params, new_loss, change


def estimate_differentiable(
    model: OcclusionModel,
    w_init,
    sources: Sequence[Image],
    critic: Critic,
    cfg: Optional[DiffEstimateConfig] = None,
    rng: Optional[RngStream] = None,
    depths: Optional[Sequence[DepthMap]] = None,
    mask: Optional[BinaryMask] = None,
    threads: int = 0,
) -> DiffEstimateResult:
    """Regress the differentiable parameters of ``model`` against ``critic``.

    Args:
        model: Occlusion model
        w_init: Initial parameter record; non-differentiable values stay fixed
        sources: Source images rendered at every evaluation
        critic: Critic fitted on the targets
        cfg: Estimator settings, defaults from the model
        rng: Stream for batch selection and render seeds
        depths: Depth maps aligned with ``sources`` (fog)
        mask: Optional injection mask
        threads: Worker cap for per-image rendering

    Returns:
        DiffEstimateResult with the best iterate (not the last) and its trace

    Raises:
        NumericalError: Non-finite loss or gradient; carries the partial trace
        ParameterError: ``w_init`` outside the bounds
    """
    cfg = cfg or DiffEstimateConfig.for_model(model)
    rng = rng or RngStream(0).fork(STREAM_ESTIMATE)
    evaluator = Objective(model, sources, critic, depths, mask, threads)
    descent = DifferentiableDescent(model, evaluator, cfg, rng)
    descent.check_bounds(w_init)

    trace: List[TraceRow] = []
    params = w_init
    try:
        loss = descent.evaluate(params)
        initial_loss = loss
        trace.append(TraceRow(0, BLOCK_DIFFERENTIABLE, 0, loss, model.to_dict(params)))
        best_params, best_loss = params, loss
        logger.info(f"Estimating {', '.join(model.diff_names)} for {model.name}: initial loss {loss:.6g}")

        iteration = 0
        for iteration in range(1, cfg.max_iters + 1):
            params, loss, change = descent.step(params, loss)
            trace.append(
                TraceRow(0, BLOCK_DIFFERENTIABLE, iteration, loss, model.to_dict(params))
            )
            logger.debug(f"iter {iteration}: loss {loss:.6g} {model.to_dict(params)}")
            if loss < best_loss:
                best_params, best_loss = params, loss
            if change < cfg.tol:
                logger.debug(f"Relative parameter change {change:.3g} below tol, stopping")
                break
    except NumericalError as e:
        raise NumericalError(str(e), trace) from e

    logger.info(f"Best loss {best_loss:.6g} at {model.to_dict(best_params)}")
    return DiffEstimateResult(
        params=best_params,
        loss=best_loss,
        initial_loss=initial_loss,
        trace=trace,
        one_sided=list(descent.one_sided),
        iterations=iteration,
    )


def param_gradient(
    model: OcclusionModel,
    params,
    sources: Sequence[Image],
    critic: Critic,
    cfg: Optional[DiffEstimateConfig] = None,
    rng: Optional[RngStream] = None,
    depths: Optional[Sequence[DepthMap]] = None,
    mask: Optional[BinaryMask] = None,
    threads: int = 0,
) -> GradientResult:
    """Central-difference gradient of the objective w.r.t. w_d, frozen seeds."""
    cfg = cfg or DiffEstimateConfig.for_model(model)
    rng = rng or RngStream(0).fork(STREAM_ESTIMATE)
    evaluator = Objective(model, sources, critic, depths, mask, threads)
    return DifferentiableDescent(model, evaluator, cfg, rng).gradient(params)

