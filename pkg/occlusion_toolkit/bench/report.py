# SPDX-License-Identifier: Apache-2.0

"""Acceptance run of the bench and its CSV/summary reports."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from loguru import logger

from ..core.exporter import write_csv
from ..core.rng import STREAM_SYNTHESIS, RngStream
from ..models.params import RaindropParams
from ..models.registry import get_model
from .landscape import landscape_minimum, nearest_grid_point, sweep_landscape
from .recovery import (
    RECOVERY_CASES,
    RecoveryReport,
    RecoverySettings,
    mean_percent_error,
    run_case,
    source_target_sets,
    synthesize_ground_truth,
)
from .scenes import generate_corpus

PathLike = Union[str, Path]

RECOVERY_COLUMNS = (
    "model",
    "parameter",
    "ground_truth",
    "estimated",
    "percent_error",
    "seeds",
    "seconds",
)
LANDSCAPE_COLUMNS = ("target", "value", "distance")
LANDSCAPE_TARGETS = (2.0, 3.81, 6.0)
LANDSCAPE_GRID = tuple(float(v) for v in range(11))


@dataclass
class AcceptanceResult:
    reports: List[RecoveryReport] = field(default_factory=list)
    landscape: List[Tuple[float, float, float]] = field(default_factory=list)
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def errors_by_model(self) -> Dict[str, float]:
        by_model: Dict[str, List[RecoveryReport]] = {}
        for report in self.reports:
            by_model.setdefault(report.model, []).append(report)
        return {name: mean_percent_error(rows) for name, rows in by_model.items()}


def write_recovery_csv(reports: Sequence[RecoveryReport], path: PathLike) -> int:
    rows = [
        [
            r.model,
            r.parameter,
            float(r.ground_truth),
            float(r.estimated),
            float(r.percent_error),
            ";".join(str(s) for s in r.seeds),
            float(r.seconds),
        ]
        for r in reports
    ]
    return write_csv(path, RECOVERY_COLUMNS, rows)


def write_landscape_csv(rows: Sequence[Tuple[float, float, float]], path: PathLike) -> int:
    return write_csv(path, LANDSCAPE_COLUMNS, [[float(v) for v in row] for row in rows])


def summary_table(result: AcceptanceResult) -> List[str]:
    """Human readable summary lines."""
    lines = [f"{'model':<10} {'mean error %':>12} {'tolerance %':>12}  status"]
    for name, error in result.errors_by_model().items():
        tolerance = RECOVERY_CASES[name].tolerance
        status = "PASS" if error <= tolerance else "FAIL"
        lines.append(f"{name:<10} {error:>12.2f} {tolerance:>12.1f}  {status}")
    for check, ok in result.checks.items():
        lines.append(f"{check:<36} {'PASS' if ok else 'FAIL'}")
    return lines


def landscape_rows(
    images: Sequence, seed: int, targets_at: Sequence[float] = LANDSCAPE_TARGETS
) -> List[Tuple[float, float, float]]:
    """sigma landscapes of the raindrop model for several ground truths.

    Sources and targets are paired: the targets are the same scenes
    rendered at sigma* under drop seeds the sweep never uses.
    """
    model = get_model("raindrop")
    root = RngStream(seed)
    source_idx, target_idx = source_target_sets(len(images), root, paired=True)
    rows = []
    for sigma_star in targets_at:
        w_star = RaindropParams(sigma=sigma_star)
        targets = synthesize_ground_truth(
            [images[i] for i in target_idx], model, w_star, root.fork(STREAM_SYNTHESIS)
        )
        sweep = sweep_landscape(
            [images[i] for i in source_idx], targets, model, "sigma", LANDSCAPE_GRID, w_star, seed
        )
        rows.extend((sigma_star, value, distance) for value, distance in sweep)
    return rows


def run_acceptance(
    models: Sequence[str] = ("raindrop", "dirt", "fog"),
    seeds: Sequence[int] = (1, 2, 3),
    images: int = 64,
    size: int = 128,
    landscape: bool = True,
    corpus_seed: int = 0,
    settings: Optional[RecoverySettings] = None,
) -> AcceptanceResult:
    """Recovery sweeps per model, landscape minima and the ordering check."""
    settings = settings or RecoverySettings()
    corpus = generate_corpus(images, size, corpus_seed)
    logger.info(f"Generated {len(corpus)} scenes of {size}x{size} pixels")
    result = AcceptanceResult()

    for name in models:
        case = RECOVERY_CASES[name]
        logger.info(f"Recovering {case.parameter} of {name} over {list(case.values)}")
        reports = run_case(case, corpus.images, seeds, settings, corpus.depths)
        result.reports.extend(reports)
        error = mean_percent_error(reports)
        result.checks[f"{name} {case.parameter} error <= {case.tolerance:g}%"] = (
            error <= case.tolerance
        )

    errors = result.errors_by_model()
    if "fog" in errors:
        others = [errors[m] for m in ("raindrop", "dirt") if m in errors]
        if others:
            result.checks["fog error is the largest"] = all(errors["fog"] > e for e in others)

    if landscape:
        result.landscape = landscape_rows(corpus.images, seeds[0])
        for sigma_star in LANDSCAPE_TARGETS:
            sweep = [(v, d) for t, v, d in result.landscape if t == sigma_star]
            at = landscape_minimum(sweep)
            result.checks[f"landscape minimum for sigma*={sigma_star:g}"] = at == nearest_grid_point(
                LANDSCAPE_GRID, sigma_star
            )
    return result
