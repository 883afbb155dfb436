# SPDX-License-Identifier: Apache-2.0

"""CMA-ES ask/tell on immutable state.

Strategy parameters and update equations follow the standard
(mu/mu_w, lambda)-CMA-ES with positive recombination weights, rank-one and
rank-mu covariance updates and cumulative step-size adaptation.
"""

from dataclasses import dataclass, replace
from math import exp, log
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..core.exceptions import NumericalError
from ..core.rng import RngStream

DEFAULT_POPULATION = 10
MAX_RESAMPLES = 100


@dataclass(frozen=True)
class CmaParameters:
    """Static strategy parameters for dimension ``n`` and population ``lam``."""

    dimension: int
    lam: int
    mu: int
    weights: Tuple[float, ...]
    mueff: float
    cc: float
    cs: float
    c1: float
    cmu: float
    damps: float

    @classmethod
    def for_dimension(cls, n: int, lam: int = DEFAULT_POPULATION) -> "CmaParameters":
        if n < 1 or lam < 2:
            raise ValueError(f"CMA-ES needs n >= 1 and lambda >= 2, got {n}, {lam}")
        mu = lam // 2
        raw = [log(lam / 2 + 0.5) - log(i + 1) if i < mu else 0.0 for i in range(lam)]
        total = sum(raw[:mu])
        weights = tuple(w / total for w in raw)
        mueff = sum(weights[:mu]) ** 2 / sum(w**2 for w in weights[:mu])

        cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        cs = (mueff + 2) / (n + mueff + 5)
        c1 = 2 / ((n + 1.3) ** 2 + mueff)
        cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        damps = 2 * mueff / lam + 0.3 + cs
        return cls(n, lam, mu, weights, mueff, cc, cs, c1, cmu, damps)


@dataclass(frozen=True, eq=False)
class CmaState:
    """Distribution and bookkeeping of one CMA-ES run."""

    mean: np.ndarray
    sigma: float
    covariance: np.ndarray
    pc: np.ndarray
    ps: np.ndarray
    generation: int = 0
    population_size: int = DEFAULT_POPULATION
    bounds: Optional[np.ndarray] = None
    evaluations: int = 0
    best_fitness: float = float("inf")
    best_solution: Optional[np.ndarray] = None

    def __post_init__(self):
        n = np.asarray(self.mean).size
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if np.asarray(self.covariance).shape != (n, n):
            raise ValueError("covariance shape does not match the mean")
        if self.bounds is not None and np.asarray(self.bounds).shape != (n, 2):
            raise ValueError("bounds must have shape (n, 2)")

    @classmethod
    def initial(
        cls,
        mean: Sequence[float],
        sigma: float,
        population_size: int = DEFAULT_POPULATION,
        bounds: Optional[np.ndarray] = None,
    ) -> "CmaState":
        mean = np.asarray(mean, dtype=np.float64).ravel()
        n = mean.size
        return cls(
            mean=mean,
            sigma=float(sigma),
            covariance=np.eye(n),
            pc=np.zeros(n),
            ps=np.zeros(n),
            population_size=population_size,
            bounds=None if bounds is None else np.asarray(bounds, dtype=np.float64),
        )

    @property
    def dimension(self) -> int:
        return self.mean.size


def _eigensystem(covariance: np.ndarray):
    """Eigen-decomposition of C; identity if C is not symmetric positive-definite."""
    try:
        if not np.all(np.isfinite(covariance)):
            raise np.linalg.LinAlgError("non-finite covariance")
        eigenvalues, basis = np.linalg.eigh(covariance)
        if eigenvalues.min() <= 0:
            raise np.linalg.LinAlgError("covariance is not positive-definite")
        return eigenvalues, basis, covariance
    except np.linalg.LinAlgError as e:
        logger.warning(f"Covariance decomposition failed ({e}), resetting to identity")
        n = covariance.shape[0]
        return np.ones(n), np.eye(n), np.eye(n)


def _feasible(x: np.ndarray, bounds: Optional[np.ndarray]) -> bool:
    return bounds is None or bool(np.all((x >= bounds[:, 0]) & (x <= bounds[:, 1])))


def cma_es_ask(state: CmaState, rng: RngStream) -> np.ndarray:
    """Sample ``population_size`` candidates from N(mean, sigma^2 C).

    Out-of-bounds candidates are resampled up to 100 times, then clamped.

    Returns:
        Array of shape (population_size, n)
    """
    eigenvalues, basis, _ = _eigensystem(state.covariance)
    scale = basis * np.sqrt(eigenvalues)
    population = np.empty((state.population_size, state.dimension))
    clamped = 0
    for k in range(state.population_size):
        for _ in range(MAX_RESAMPLES):
            candidate = state.mean + state.sigma * scale @ rng.standard_normal(state.dimension)
            if _feasible(candidate, state.bounds):
                break
        else:
            candidate = np.clip(candidate, state.bounds[:, 0], state.bounds[:, 1])
            clamped += 1
        population[k] = candidate
    if clamped:
        logger.debug(f"Clamped {clamped} candidates to bounds after {MAX_RESAMPLES} resamples")
    return population


def cma_es_tell(
    state: CmaState, population: np.ndarray, fitnesses: Sequence[float]
) -> CmaState:
    """Update mean, evolution paths, covariance and step size (minimization)."""
    population = np.asarray(population, dtype=np.float64)
    fitnesses = np.asarray(fitnesses, dtype=np.float64)
    if not np.all(np.isfinite(fitnesses)):
        raise NumericalError(f"Non-finite fitness in generation {state.generation}")
    lam, n = population.shape
    if fitnesses.shape != (lam,):
        raise ValueError(f"{fitnesses.size} fitnesses for {lam} candidates")
    par = CmaParameters.for_dimension(n, lam)
    weights = np.asarray(par.weights)
    evaluations = state.evaluations + lam

    order = np.argsort(fitnesses, kind="stable")
    arx = population[order]
    xold = state.mean
    xmean = weights[: par.mu] @ arx[: par.mu]

    eigenvalues, basis, covariance = _eigensystem(state.covariance)
    invsqrt = (basis / np.sqrt(eigenvalues)) @ basis.T

    # cumulation: evolution paths
    y = xmean - xold
    csn = (par.cs * (2 - par.cs) * par.mueff) ** 0.5 / state.sigma
    ps = (1 - par.cs) * state.ps + csn * (invsqrt @ y)
    ccn = (par.cc * (2 - par.cc) * par.mueff) ** 0.5 / state.sigma
    hsig = float(
        ps @ ps / n / (1 - (1 - par.cs) ** (2 * evaluations / lam)) < 2 + 4.0 / (n + 1)
    )
    pc = (1 - par.cc) * state.pc + ccn * hsig * y

    # covariance: rank-one and rank-mu updates
    c1a = par.c1 * (1 - (1 - hsig**2) * par.cc * (2 - par.cc))
    steps = arx - xold
    covariance = covariance * (1 - c1a - par.cmu * weights.sum())
    covariance = covariance + par.c1 * np.outer(pc, pc)
    covariance = covariance + par.cmu / state.sigma**2 * (steps.T * weights) @ steps
    covariance = (covariance + covariance.T) / 2

    # step size
    sigma = state.sigma * exp(min(1.0, par.cs / par.damps * (ps @ ps / n - 1) / 2))

    best_fitness, best_solution = state.best_fitness, state.best_solution
    if fitnesses[order[0]] < best_fitness:
        best_fitness, best_solution = float(fitnesses[order[0]]), arx[0].copy()

    return replace(
        state,
        mean=xmean,
        sigma=sigma,
        covariance=covariance,
        pc=pc,
        ps=ps,
        generation=state.generation + 1,
        evaluations=evaluations,
        best_fitness=best_fitness,
        best_solution=best_solution,
    )
