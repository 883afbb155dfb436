# SPDX-License-Identifier: Apache-2.0

"""Pipelines behind the CLI commands."""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from ..bench.recovery import RecoverySettings
from ..bench.report import (
    AcceptanceResult,
    run_acceptance,
    write_landscape_csv,
    write_recovery_csv,
)
from ..core.config import RunConfig
from ..core.exceptions import ConfigError, NumericalError
from ..core.exporter import export_params
from ..core.rng import STREAM_RENDER, RngStream
from ..critic.critic import Critic, critic_fit
from ..critic.serialization import load_critic
from ..estimate.joint import CmaConfig, FitnessSpec, JointConfig, estimate_joint
from ..estimate.optimizer import DiffEstimateConfig
from ..estimate.trace import TraceRow, write_trace
from ..guidance.saliency import compute_guidance, injection_mask, save_guidance, save_mask
from ..imaging.image import DepthMap, Image
from ..imaging.io import list_images, load_depth, load_image, save_image, write_pgm16
from ..models.cache import clear_displacement_cache, get_displacement_field
from ..models.compose import compose
from ..models.composite import fence_overlay
from ..models.params import CompositeParams, FogParams
from ..models.registry import OcclusionModel, get_model

ALPHA_PGM_SCALE = 65535


@dataclass
class FitOutcome:
    params: Dict[str, float]
    loss: float
    trace: List[TraceRow] = field(default_factory=list)
    restart: int = 0


def load_images(directory: Optional[Path], role: str) -> Tuple[List[Path], List[Image]]:
    """All PNG images of a directory; ConfigError when missing or empty."""
    if directory is None:
        raise ConfigError(f"Missing required configuration key 'paths.{role}'")
    paths = list_images(directory)
    if not paths:
        raise ConfigError(f"No PNG images found in {role} directory {directory}")
    logger.info(f"Loading {len(paths)} {role} images from {directory}")
    return paths, [load_image(p) for p in paths]


def load_depths(cfg: RunConfig, image_paths: List[Path]) -> List[DepthMap]:
    """Depth per image: ``<stem>.pgm`` from a directory, or one shared file."""
    depth_path = cfg.paths.depth
    if depth_path is None:
        raise ConfigError(f"Model {cfg.model.name} requires a depth map (--depth)")
    scale = cfg.depth.meters_per_unit
    if Path(depth_path).is_dir():
        return [load_depth(Path(depth_path, f"{p.stem}.pgm"), scale) for p in image_paths]
    shared = load_depth(depth_path, scale)
    return [shared] * len(image_paths)


def build_model(cfg: RunConfig, only_differentiable: bool = False) -> OcclusionModel:
    kwargs = {}
    if only_differentiable:
        kwargs["nd_free"] = []
    if cfg.model.name == "raindrop":
        udisp, vdisp = cfg.paths.udisp, cfg.paths.vdisp
        if (udisp is None) != (vdisp is None):
            raise ConfigError("paths.udisp and paths.vdisp must be given together")
        kwargs["variant"] = cfg.model.variant
        kwargs["field"] = get_displacement_field(udisp, vdisp)
    return get_model(cfg.model.name, **kwargs)


def build_params(model: OcclusionModel, cfg: RunConfig, scene_shape: Tuple[int, int]):
    """Parameter record from the model defaults and ``model.params``.

    The composite model takes its overlay from ``paths.overlay`` (opaque
    everywhere at ``opacity``) or falls back to a fence grid.
    """
    values = dict(cfg.model.params)
    if model.name == "composite":
        opacity = values.pop("opacity", 0.85)
        if cfg.paths.overlay is not None:
            overlay = load_image(cfg.paths.overlay)
            base = CompositeParams(overlay, np.full(overlay.shape, opacity), seed=cfg.seed)
        else:
            height, width = scene_shape
            fence = fence_overlay(min(width, 32), min(height, 32), opacity=opacity)
            base = dataclasses.replace(fence, seed=cfg.seed)
        return model.from_dict(values, base)

    base = model.default_params()
    if isinstance(base, FogParams):
        if cfg.model.atmospheric_light is not None:
            base = FogParams(base.beta, tuple(cfg.model.atmospheric_light))
    else:
        base = dataclasses.replace(base, seed=cfg.seed)
    return model.from_dict(values, base)


def run_render(cfg: RunConfig) -> List[Path]:
    """Render the configured model over every source image.

    Writes ``<stem>.png`` and ``<stem>_alpha.pgm`` per source into the output
    directory. Image ``i`` is rendered with stream ``item(i)`` of the render
    stream, so outputs do not depend on the thread count.
    """
    source_paths, sources = load_images(cfg.paths.sources, "sources")
    model = build_model(cfg)
    depths = load_depths(cfg, source_paths) if model.requires_depth else None
    params = build_params(model, cfg, sources[0].shape)
    out_dir = Path(cfg.paths.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    root = RngStream(cfg.seed).fork(STREAM_RENDER)
    written = []
    for index, (path, scene) in enumerate(zip(source_paths, sources)):
        depth = depths[index] if depths is not None else None
        overlay = model.render(scene, params, root.item(index), None, depth)
        image_path = out_dir / f"{path.stem}.png"
        save_image(compose(scene, overlay), image_path)
        alpha = np.rint(overlay.alpha * ALPHA_PGM_SCALE).astype(np.int64)
        write_pgm16(alpha, out_dir / f"{path.stem}_alpha.pgm")
        written.append(image_path)
        logger.debug(f"Rendered {model.name} over {path.name}")

    logger.info(f"Rendered {len(written)} images to {out_dir}")
    clear_displacement_cache()
    return written


def _per_parameter(model: OcclusionModel, values: Dict[str, float], defaults) -> Optional[Tuple[float, ...]]:
    if not values:
        return None
    unknown = set(values) - set(model.diff_names)
    if unknown:
        raise ConfigError(f"Unknown differentiable parameters {sorted(unknown)}")
    return tuple(values.get(n, d) for n, d in zip(model.diff_names, defaults))


def load_or_fit_critic(cfg: RunConfig, targets: Optional[List[Image]], kind: str) -> Critic:
    if cfg.paths.critic is not None and Path(cfg.paths.critic).exists():
        logger.info(f"Loading critic from {cfg.paths.critic}")
        return load_critic(cfg.paths.critic, kind)
    if not targets:
        raise ConfigError("A critic file or target images are required")
    logger.info(f"Fitting {kind} critic on {len(targets)} target images")
    return critic_fit(targets, cfg.estimate.patch_size, kind)


def run_fit(cfg: RunConfig) -> FitOutcome:
    """Estimate model parameters from sources and targets.

    Writes ``params.out`` and ``trace.csv`` into the output directory. With
    ``estimate.restarts`` > 1 the estimation is repeated with derived seeds
    and the lowest-loss run is kept.
    """
    source_paths, sources = load_images(cfg.paths.sources, "sources")
    _, targets = load_images(cfg.paths.targets, "targets")
    est = cfg.estimate
    model = build_model(cfg, only_differentiable=est.only_differentiable)
    if not model.diff_names and not model.nd_names:
        raise ConfigError(f"Model {model.name} has no free parameters to estimate")
    depths = load_depths(cfg, source_paths) if model.requires_depth else None
    w_init = build_params(model, cfg, sources[0].shape)
    critic = load_or_fit_critic(cfg, targets, est.critic)
    out_dir = Path(cfg.paths.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    diff_cfg = DiffEstimateConfig.for_model(
        model,
        learning_rate=_per_parameter(model, est.learning_rate, model.learning_rates()),
        fd_step=_per_parameter(model, est.fd_step, model.fd_steps(w_init)),
        max_iters=est.max_iters,
        batch_size=est.batch_size or 0,
        tol=est.tol,
        lr_decay=est.lr_decay,
        resample_seeds=est.resample_seeds,
    )
    warm_start = None
    if cfg.cma.warm_start:
        current = model.to_dict(w_init)
        warm_start = [cfg.cma.warm_start.get(n, current[n]) for n in model.nd_names]
    cma_cfg = CmaConfig(cfg.cma.population, cfg.cma.sigma0, warm_start)
    joint_cfg = JointConfig(est.k_d, est.k_g, est.max_rounds, est.tol)

    best: Optional[FitOutcome] = None
    for restart in range(est.restarts):
        rng = RngStream(cfg.seed) if restart == 0 else RngStream(cfg.seed).item(restart)
        logger.info(f"Fitting {model.name} (run {restart + 1}/{est.restarts})")
        try:
            result = estimate_joint(
                model, w_init, sources, critic, diff_cfg, cma_cfg,
                FitnessSpec(est.n_samples), joint_cfg, rng, depths, threads=cfg.threads,
            )
        except NumericalError as e:
            write_trace(e.trace, out_dir / "trace.csv", list(model.to_dict(w_init)))
            logger.error(f"Partial trace with {len(e.trace)} rows written to {out_dir / 'trace.csv'}")
            raise
        if best is None or result.loss < best.loss:
            best = FitOutcome(model.to_dict(result.params), result.loss, result.trace, restart)

    export_params(best.params, out_dir / "params.out")
    write_trace(best.trace, out_dir / "trace.csv", list(best.params))
    clear_displacement_cache()
    return best


def run_guidance(cfg: RunConfig) -> Tuple[Path, Path]:
    """Compute the guidance map and the gamma mask; returns both file paths."""
    _, sources = load_images(cfg.paths.sources, "sources")
    targets = None
    if cfg.paths.critic is None or not Path(cfg.paths.critic).exists():
        _, targets = load_images(cfg.paths.targets, "targets")
    critic = load_or_fit_critic(cfg, targets, "patch")
    dg = compute_guidance(critic, sources, cfg.threads)
    mask = injection_mask(dg, cfg.gamma)

    out_dir = Path(cfg.paths.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dg_path = out_dir / "dg.pgm"
    mask_path = out_dir / f"mask_gamma{cfg.gamma:g}.pbm"
    save_guidance(dg, dg_path)
    save_mask(mask, mask_path)
    logger.info(f"Injection allowed on {100 * mask.coverage():.1f}% of pixels at gamma {cfg.gamma:g}")
    return dg_path, mask_path


def run_bench(cfg: RunConfig) -> AcceptanceResult:
    """Run the recovery bench and write ``recovery.csv`` / ``landscape.csv``."""
    settings = RecoverySettings(
        critic=cfg.estimate.critic,
        patch_size=cfg.estimate.patch_size,
        max_iters=cfg.estimate.max_iters,
        batch_size=cfg.estimate.batch_size or 0,
        threads=cfg.threads,
    )
    bench = cfg.bench
    result = run_acceptance(
        bench.models, bench.seeds, bench.images, bench.size, bench.landscape, cfg.seed, settings
    )
    out_dir = Path(cfg.paths.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_recovery_csv(result.reports, out_dir / "recovery.csv")
    if result.landscape:
        write_landscape_csv(result.landscape, out_dir / "landscape.csv")
    return result
