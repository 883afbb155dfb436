# SPDX-License-Identifier: Apache-2.0

"""Ground-truth parameter recovery harness."""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger

from ..core.pool import ordered_map
from ..core.rng import STREAM_ESTIMATE, STREAM_SPLIT, STREAM_SYNTHESIS, RngStream
from ..critic.critic import DEFAULT_PATCH_SIZE, critic_fit
from ..estimate.joint import CmaConfig, FitnessSpec, JointConfig, estimate_joint
from ..estimate.optimizer import DiffEstimateConfig, estimate_differentiable
from ..guidance.maps import BinaryMask
from ..imaging.image import DepthMap, Image
from ..models.params import DirtParams, FogParams, RaindropParams
from ..models.registry import OcclusionModel, get_model


@dataclass(frozen=True)
class RecoveryReport:
    model: str
    parameter: str
    ground_truth: float
    estimated: float
    seeds: Tuple[int, ...]
    seconds: float

    @property
    def percent_error(self) -> float:
        if self.ground_truth == 0:
            raise ZeroDivisionError("percent error is undefined for a zero ground truth")
        return 100.0 * abs(self.estimated - self.ground_truth) / abs(self.ground_truth)


@dataclass(frozen=True)
class RecoverySettings:
    """Estimator settings of a recovery run."""

    critic: str = "moment"
    patch_size: int = DEFAULT_PATCH_SIZE
    max_iters: int = 60
    batch_size: int = 0
    only_differentiable: bool = True
    cma: CmaConfig = field(default_factory=CmaConfig)
    fitness: FitnessSpec = field(default_factory=FitnessSpec)
    joint: JointConfig = field(default_factory=JointConfig)
    threads: int = 0


@dataclass(frozen=True)
class RecoveryCase:
    """One row of the recovery sweep: a model, a regressed parameter, a grid."""

    model: str
    parameter: str
    values: Tuple[float, ...]
    init: float
    bounds: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    tolerance: float = 10.0
    paired: bool = False

    def build_model(self) -> OcclusionModel:
        return get_model(self.model, diff_free=[self.parameter], nd_free=[], bounds=self.bounds)

    def ground_truth(self, value: float):
        return self.build_model().from_dict({self.parameter: value}, BASE_PARAMS[self.model]())

    def initial(self, w_star):
        return self.build_model().from_dict({self.parameter: self.init}, w_star)


BASE_PARAMS = {
    "raindrop": RaindropParams,
    "dirt": DirtParams,
    "fog": FogParams,
}

RECOVERY_CASES = {
    "raindrop": RecoveryCase("raindrop", "sigma", (1.0, 2.0, 4.0, 8.0), init=2.5, paired=True),
    "dirt": RecoveryCase("dirt", "alpha", (0.2, 0.4, 0.6, 0.8), init=0.5),
    "fog": RecoveryCase(
        "fog", "beta", (5.0, 10.0, 20.0, 40.0), init=15.0, bounds={"beta": (0.0, 80.0)}, tolerance=30.0
    ),
}


def synthesize_ground_truth(
    clean: Sequence[Image],
    model: OcclusionModel,
    w_star,
    rng: RngStream,
    depths: Optional[Sequence[DepthMap]] = None,
    mask: Optional[BinaryMask] = None,
    threads: int = 0,
) -> List[Image]:
    """Render and compose every clean image with ``w_star`` under fresh seeds."""
    if not clean:
        raise ValueError("synthesize_ground_truth needs at least one image")
    seeds = rng.seeds(len(clean))

    def render(index: int) -> Image:
        depth = depths[index] if depths is not None else None
        return model.apply(clean[index], w_star, RngStream(seeds[index]), mask, depth)

    return ordered_map(render, range(len(clean)), threads)


def split_halves(count: int, rng: RngStream) -> Tuple[List[int], List[int]]:
    """Random disjoint source/target index halves."""
    order = [int(i) for i in rng.permutation(count)]
    half = count // 2
    return sorted(order[:half]), sorted(order[half:])


def source_target_sets(
    count: int, root: RngStream, paired: bool = False
) -> Tuple[List[int], List[int]]:
    """Indices of the source images and of the clean images behind the targets.

    Unpaired runs split the corpus into disjoint halves. Paired runs render
    the targets from every clean image, so sources and targets show the
    same scenes and differ only by the injected occlusion.
    """
    if paired:
        every = list(range(count))
        return every, every
    return split_halves(count, root.fork(STREAM_SPLIT))


def run_recovery(
    clean: Sequence[Image],
    model: OcclusionModel,
    w_star,
    w_init,
    seeds: Sequence[int],
    settings: Optional[RecoverySettings] = None,
    depths: Optional[Sequence[DepthMap]] = None,
    paired: bool = False,
) -> List[RecoveryReport]:
    """Per seed: split, synthesize targets, fit the critic, estimate, report.

    With ``paired`` the targets are the sources themselves rendered with
    ``w_star``. One report per seed and free parameter of ``model``.
    """
    if not seeds:
        raise ValueError("run_recovery needs at least one seed")
    if len(clean) < 2:
        raise ValueError("run_recovery needs at least two clean images")
    settings = settings or RecoverySettings()
    truth = model.to_dict(w_star)
    reports: List[RecoveryReport] = []

    for seed in seeds:
        started = time.perf_counter()
        root = RngStream(seed)
        source_idx, target_idx = source_target_sets(len(clean), root, paired)
        sources = [clean[i] for i in source_idx]
        source_depths = [depths[i] for i in source_idx] if depths is not None else None
        targets = synthesize_ground_truth(
            [clean[i] for i in target_idx],
            model,
            w_star,
            root.fork(STREAM_SYNTHESIS),
            [depths[i] for i in target_idx] if depths is not None else None,
            threads=settings.threads,
        )
        critic = critic_fit(targets, settings.patch_size, settings.critic)
        cfg = DiffEstimateConfig.for_model(
            model, max_iters=settings.max_iters, batch_size=settings.batch_size
        )
        if settings.only_differentiable or not model.nd_names:
            result = estimate_differentiable(
                model, w_init, sources, critic, cfg, root.fork(STREAM_ESTIMATE),
                source_depths, threads=settings.threads,
            )
        else:
            result = estimate_joint(
                model, w_init, sources, critic, cfg, settings.cma, settings.fitness,
                settings.joint, root, source_depths, threads=settings.threads,
            )
        elapsed = time.perf_counter() - started
        estimated = model.to_dict(result.params)
        names = model.diff_names if settings.only_differentiable else model.diff_names + model.nd_names
        for name in names:
            reports.append(
                RecoveryReport(model.name, name, truth[name], estimated[name], (seed,), elapsed)
            )
        logger.info(
            f"{model.name} seed {seed}: "
            + ", ".join(f"{n}={estimated[n]:.4g} (true {truth[n]:.4g})" for n in names)
            + f" in {elapsed:.1f}s"
        )
    return reports


def run_case(
    case: RecoveryCase,
    clean: Sequence[Image],
    seeds: Sequence[int],
    settings: Optional[RecoverySettings] = None,
    depths: Optional[Sequence[DepthMap]] = None,
) -> List[RecoveryReport]:
    """Recovery over every ground-truth value of a case."""
    model = case.build_model()
    reports: List[RecoveryReport] = []
    for value in case.values:
        w_star = case.ground_truth(value)
        reports.extend(
            run_recovery(
                clean, model, w_star, case.initial(w_star), seeds, settings,
                depths if model.requires_depth else None,
                case.paired,
            )
        )
    return reports


def mean_percent_error(reports: Sequence[RecoveryReport]) -> float:
    if not reports:
        raise ValueError("no reports")
    return sum(r.percent_error for r in reports) / len(reports)
