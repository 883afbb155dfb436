# SPDX-License-Identifier: Apache-2.0

"""Alternating estimation of the differentiable and genetic parameter blocks."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger

from ..core.exceptions import NumericalError, ParameterError
from ..core.pool import ordered_map
from ..core.rng import STREAM_CMA, STREAM_ESTIMATE, RngStream
from ..critic.critic import Critic
from ..guidance.maps import BinaryMask
from ..imaging.image import DepthMap, Image
from ..models.registry import OcclusionModel
from .cmaes import DEFAULT_POPULATION, CmaState, cma_es_ask, cma_es_tell
from .objective import Objective
from .optimizer import (
    DiffEstimateConfig,
    DifferentiableDescent,
    estimate_differentiable,
)
from .trace import BLOCK_DIFFERENTIABLE, BLOCK_GENETIC, TraceRow

STALL_ROUNDS = 2


@dataclass(frozen=True)
class FitnessSpec:
    """Images averaged per CMA-ES fitness evaluation."""

    n_samples: int = 8

    def __post_init__(self):
        if self.n_samples < 1:
            raise ParameterError(f"n_samples must be >= 1, got {self.n_samples}")


@dataclass(frozen=True)
class CmaConfig:
    population: int = DEFAULT_POPULATION
    sigma0: float = 0.2
    warm_start: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.population < 2:
            raise ParameterError("population must be >= 2")
        if not self.sigma0 > 0:
            raise ParameterError("sigma0 must be > 0")


@dataclass(frozen=True)
class JointConfig:
    k_d: int = 20
    k_g: int = 5
    max_rounds: int = 10
    tol: float = 1e-4

    def __post_init__(self):
        if self.k_d < 0 or self.k_g < 0 or self.max_rounds < 1:
            raise ParameterError("k_d, k_g must be >= 0 and max_rounds >= 1")


@dataclass
class JointEstimateResult:
    params: object
    loss: float
    initial_loss: float
    trace: List[TraceRow] = field(default_factory=list)
    round_losses: List[float] = field(default_factory=list)
    rounds: int = 0
    cma_state: Optional[CmaState] = None
    best_fitness: float = float("inf")


class GeneticSearch:
    """CMA-ES over the free non-differentiable parameters in [0, 1] coordinates."""

    def __init__(
        self,
        model: OcclusionModel,
        objective: Objective,
        cma_cfg: CmaConfig,
        fitness: FitnessSpec,
        rng: RngStream,
        start_params,
        threads: int = 0,
    ):
        self.model = model
        self.objective = objective
        self.fitness = fitness
        self.rng = rng
        self.threads = threads
        bounds = model.nd_bounds
        self.lo, self.width = bounds[:, 0], bounds[:, 1] - bounds[:, 0]
        start = (
            np.asarray(cma_cfg.warm_start, dtype=np.float64)
            if cma_cfg.warm_start is not None
            else model.nd_vector(start_params)
        )
        if start.shape != self.lo.shape:
            raise ParameterError(
                f"Warm start has {start.size} values for {self.lo.size} parameters"
            )
        unit = np.tile([0.0, 1.0], (start.size, 1))
        self.state = CmaState.initial(
            np.clip(self.normalize(start), 0.0, 1.0), cma_cfg.sigma0, cma_cfg.population, unit
        )

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.lo) / self.width

    def denormalize(self, z: np.ndarray) -> np.ndarray:
        return self.lo + np.asarray(z) * self.width

    def generation(self, params):
        """One ask/evaluate/tell cycle; returns (best candidate params, its fitness).

        Every candidate of a generation is scored on the same images and seeds.
        """
        population = cma_es_ask(self.state, self.rng)
        n = len(self.objective)
        replace_draws = self.fitness.n_samples > n
        indices = [int(i) for i in self.rng.choice(n, self.fitness.n_samples, replace_draws)]
        seeds = self.rng.seeds(len(indices))
        candidates = [self.model.with_nd(params, self.denormalize(z)) for z in population]
        fitnesses = ordered_map(
            lambda candidate: self.objective.evaluate(candidate, seeds, indices),
            candidates,
            self.threads,
        )
        if not np.all(np.isfinite(fitnesses)):
            raise NumericalError(f"Non-finite fitness in generation {self.state.generation}")
        self.state = cma_es_tell(self.state, population, fitnesses)
        best = int(np.argmin(fitnesses))
        return candidates[best], float(fitnesses[best])


def estimate_joint(
    model: OcclusionModel,
    w_init,
    sources: Sequence[Image],
    critic: Critic,
    cfg: Optional[DiffEstimateConfig] = None,
    cma_cfg: Optional[CmaConfig] = None,
    fitness: Optional[FitnessSpec] = None,
    joint_cfg: Optional[JointConfig] = None,
    rng: Optional[RngStream] = None,
    depths: Optional[Sequence[DepthMap]] = None,
    mask: Optional[BinaryMask] = None,
    threads: int = 0,
) -> JointEstimateResult:
    """Alternate K_d gradient steps on w_d and K_g CMA-ES generations on w_nd.

    Losses used to pick the best pair are measured with the gradient block's
    frozen batch and seeds, so they are comparable across rounds. A genetic
    block is only accepted when its best candidate lowers that loss. The loop
    stops when the best loss has not improved by more than ``tol``
    (relative) for two consecutive rounds, or after ``max_rounds``.

    A model without free non-differentiable parameters reduces to
    :func:`estimate_differentiable` with the same stream.
    """
    cfg = cfg or DiffEstimateConfig.for_model(model)
    cma_cfg = cma_cfg or CmaConfig()
    fitness = fitness or FitnessSpec()
    joint_cfg = joint_cfg or JointConfig()
    rng = rng or RngStream(0)
    estimate_rng = rng.fork(STREAM_ESTIMATE)

    if not model.nd_names:
        result = estimate_differentiable(
            model, w_init, sources, critic, cfg, estimate_rng, depths, mask, threads
        )
        return JointEstimateResult(
            params=result.params,
            loss=result.loss,
            initial_loss=result.initial_loss,
            trace=result.trace,
            round_losses=[result.loss],
            rounds=1,
        )

    model.validate(w_init)
    evaluator = Objective(model, sources, critic, depths, mask, threads)
    descent = DifferentiableDescent(model, evaluator, cfg, estimate_rng)
    descent.check_bounds(w_init)
    search = GeneticSearch(
        model, evaluator, cma_cfg, fitness, rng.fork(STREAM_CMA), w_init, threads
    )

    trace: List[TraceRow] = []
    params = w_init
    try:
        loss = descent.evaluate(params)
        initial_loss = loss
        best_params, best_loss = params, loss
        trace.append(TraceRow(0, BLOCK_DIFFERENTIABLE, 0, loss, model.to_dict(params)))
        logger.info(f"Joint estimation for {model.name}: initial loss {loss:.6g}")

        round_losses: List[float] = []
        stalled = 0
        round_index = 0
        for round_index in range(1, joint_cfg.max_rounds + 1):
            round_start = best_loss

            # differentiable block, w_nd frozen
            params, loss = best_params, best_loss
            for iteration in range(1, joint_cfg.k_d + 1):
                params, loss, _ = descent.step(params, loss)
                trace.append(
                    TraceRow(round_index, BLOCK_DIFFERENTIABLE, iteration, loss, model.to_dict(params))
                )
                if loss < best_loss:
                    best_params, best_loss = params, loss

            # genetic block, w_d frozen at the best iterate
            candidate_best, candidate_loss = None, float("inf")
            for generation in range(1, joint_cfg.k_g + 1):
                candidate, fit = search.generation(best_params)
                trace.append(
                    TraceRow(round_index, BLOCK_GENETIC, generation, fit, model.to_dict(candidate))
                )
                logger.debug(f"round {round_index} generation {generation}: fitness {fit:.6g}")
                if fit < candidate_loss:
                    candidate_best, candidate_loss = candidate, fit
            if candidate_best is not None:
                checked = descent.evaluate(candidate_best)
                if checked < best_loss:
                    best_params, best_loss = candidate_best, checked

            round_losses.append(best_loss)
            logger.info(f"Round {round_index}: best loss {best_loss:.6g}")
            if round_start - best_loss > joint_cfg.tol * max(abs(round_start), 1e-12):
                stalled = 0
            else:
                stalled += 1
                if stalled >= STALL_ROUNDS:
                    logger.info(f"No improvement for {STALL_ROUNDS} rounds, stopping")
                    break
    except NumericalError as e:
        raise NumericalError(str(e), trace) from e

    return JointEstimateResult(
        params=best_params,
        loss=best_loss,
        initial_loss=initial_loss,
        trace=trace,
        round_losses=round_losses,
        rounds=round_index,
        cma_state=search.state,
        best_fitness=search.state.best_fitness,
    )
