# SPDX-License-Identifier: Apache-2.0

"""Ablation drivers: population size, model choice, model complexity and
guidance threshold."""

from dataclasses import dataclass
from statistics import median
from typing import Dict, List, Optional, Sequence

from loguru import logger

from ..core.rng import STREAM_ESTIMATE, STREAM_SYNTHESIS, RngStream
from ..critic.critic import critic_fit
from ..estimate.joint import CmaConfig, estimate_joint
from ..estimate.objective import Objective
from ..estimate.optimizer import DiffEstimateConfig
from ..guidance.saliency import compute_guidance, injection_mask
from ..imaging.image import DepthMap, Image
from ..models.params import RaindropParams, RaindropVariant
from ..models.registry import get_model
from .recovery import RecoverySettings, source_target_sets, synthesize_ground_truth


@dataclass(frozen=True)
class AblationData:
    """Sources, raindrop targets and depths shared by the ablations."""

    sources: List[Image]
    targets: List[Image]
    source_depths: Optional[List[DepthMap]]


def raindrop_targets(
    clean: Sequence[Image],
    w_star: RaindropParams,
    seed: int,
    depths: Optional[Sequence[DepthMap]] = None,
) -> AblationData:
    """Render paired raindrop targets from ``clean``."""
    root = RngStream(seed)
    source_idx, target_idx = source_target_sets(len(clean), root, paired=True)
    targets = synthesize_ground_truth(
        [clean[i] for i in target_idx], get_model("raindrop"), w_star, root.fork(STREAM_SYNTHESIS)
    )
    return AblationData(
        [clean[i] for i in source_idx],
        targets,
        [depths[i] for i in source_idx] if depths is not None else None,
    )


def ablate_population(
    clean: Sequence[Image],
    w_star: RaindropParams,
    populations: Sequence[int] = (10, 25, 50),
    seeds: Sequence[int] = (1, 2, 3, 4, 5),
    settings: Optional[RecoverySettings] = None,
) -> Dict[int, float]:
    """Median final joint loss per CMA-ES population size.

    The drop frequencies are regressed by CMA-ES from a shifted start while
    sigma is refined by gradient descent.
    """
    settings = settings or RecoverySettings(only_differentiable=False)
    model = get_model("raindrop", nd_free=[f"p{i}" for i in range(4)])
    results: Dict[int, List[float]] = {lam: [] for lam in populations}
    for seed in seeds:
        data = raindrop_targets(clean, w_star, seed)
        critic = critic_fit(data.targets, settings.patch_size, settings.critic)
        start = model.with_nd(model.with_diff(w_star, [1.0]), model.nd_vector(w_star) * 0.5)
        for lam in populations:
            result = estimate_joint(
                model,
                start,
                data.sources,
                critic,
                DiffEstimateConfig.for_model(model, batch_size=settings.batch_size),
                CmaConfig(population=lam, sigma0=settings.cma.sigma0),
                settings.fitness,
                settings.joint,
                RngStream(seed),
                threads=settings.threads,
            )
            results[lam].append(result.loss)
            logger.info(f"population {lam} seed {seed}: final loss {result.loss:.6g}")
    return {lam: median(losses) for lam, losses in results.items()}


def ablate_model_choice(
    clean: Sequence[Image],
    depths: Sequence[DepthMap],
    w_star: RaindropParams,
    models: Sequence[str] = ("raindrop", "dirt", "fog", "composite"),
    seed: int = 0,
    settings: Optional[RecoverySettings] = None,
) -> Dict[str, float]:
    """Fitted objective of each model on raindrop targets (lower is better)."""
    settings = settings or RecoverySettings()
    data = raindrop_targets(clean, w_star, seed, depths)
    critic = critic_fit(data.targets, settings.patch_size, settings.critic)
    losses: Dict[str, float] = {}
    for name in models:
        model = get_model(name, nd_free=[])
        result = estimate_joint(
            model,
            model.default_params(),
            data.sources,
            critic,
            DiffEstimateConfig.for_model(model, max_iters=settings.max_iters, batch_size=settings.batch_size),
            rng=RngStream(seed),
            depths=data.source_depths if model.requires_depth else None,
            threads=settings.threads,
        )
        losses[name] = result.loss
        logger.info(f"model choice {name}: fitted loss {result.loss:.6g}")
    return losses


def ablate_model_complexity(
    clean: Sequence[Image],
    w_star: RaindropParams,
    variants: Sequence[RaindropVariant] = tuple(RaindropVariant),
    seed: int = 0,
    settings: Optional[RecoverySettings] = None,
) -> Dict[str, float]:
    """Fitted objective of each raindrop variant on full-model targets."""
    settings = settings or RecoverySettings()
    data = raindrop_targets(clean, w_star, seed)
    critic = critic_fit(data.targets, settings.patch_size, settings.critic)
    losses: Dict[str, float] = {}
    for variant in variants:
        variant = RaindropVariant(variant)
        model = get_model("raindrop", nd_free=[], variant=variant)
        start = model.with_diff(RaindropParams(variant=variant, drop_types=w_star.drop_types), [1.0])
        result = estimate_joint(
            model,
            start,
            data.sources,
            critic,
            DiffEstimateConfig.for_model(model, max_iters=settings.max_iters, batch_size=settings.batch_size),
            rng=RngStream(seed),
            threads=settings.threads,
        )
        losses[variant.value] = result.loss
        logger.info(f"model complexity {variant.value}: fitted loss {result.loss:.6g}")
    return losses


def ablate_guidance_threshold(
    clean: Sequence[Image],
    w_star: RaindropParams,
    gammas: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
    seed: int = 0,
    settings: Optional[RecoverySettings] = None,
) -> List[Dict[str, float]]:
    """Mask coverage and objective at ``w_star`` for every gamma.

    Guidance comes from a per-patch critic fitted on the raindrop targets.
    """
    settings = settings or RecoverySettings()
    data = raindrop_targets(clean, w_star, seed)
    guide_critic = critic_fit(data.targets, settings.patch_size, "patch")
    score_critic = critic_fit(data.targets, settings.patch_size, settings.critic)
    dg = compute_guidance(guide_critic, data.sources, settings.threads)
    model = get_model("raindrop")
    seeds = RngStream(seed).fork(STREAM_ESTIMATE).seeds(len(data.sources))

    rows = []
    for gamma in gammas:
        mask = injection_mask(dg, gamma)
        evaluator = Objective(model, data.sources, score_critic, mask=mask, threads=settings.threads)
        loss = evaluator.evaluate(w_star, seeds)
        rows.append({"gamma": float(gamma), "coverage": mask.coverage(), "loss": loss})
        logger.info(f"gamma {gamma}: coverage {mask.coverage():.3f}, loss {loss:.6g}")
    return rows
