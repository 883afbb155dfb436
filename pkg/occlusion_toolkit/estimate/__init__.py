# SPDX-License-Identifier: Apache-2.0

"""Parameter estimation: gradient descent on w_d, CMA-ES on w_nd."""

from .cmaes import CmaParameters, CmaState, cma_es_ask, cma_es_tell
from .gradient import GradientResult, finite_difference_gradient
from .joint import (
    CmaConfig,
    FitnessSpec,
    GeneticSearch,
    JointConfig,
    JointEstimateResult,
    estimate_joint,
)
from .objective import Objective, objective
from .optimizer import (
    DiffEstimateConfig,
    DiffEstimateResult,
    DifferentiableDescent,
    estimate_differentiable,
    param_gradient,
)
from .trace import TraceRow, write_trace

__all__ = [
    "CmaParameters",
    "CmaState",
    "cma_es_ask",
    "cma_es_tell",
    "GradientResult",
    "finite_difference_gradient",
    "CmaConfig",
    "FitnessSpec",
    "GeneticSearch",
    "JointConfig",
    "JointEstimateResult",
    "estimate_joint",
    "Objective",
    "objective",
    "DiffEstimateConfig",
    "DiffEstimateResult",
    "DifferentiableDescent",
    "estimate_differentiable",
    "param_gradient",
    "TraceRow",
    "write_trace",
]
