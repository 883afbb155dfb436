# SPDX-License-Identifier: Apache-2.0

"""Synthetic ground-truth bench: recovery, landscapes and ablations."""

from .ablation import (
    ablate_guidance_threshold,
    ablate_model_choice,
    ablate_model_complexity,
    ablate_population,
)
from .landscape import feature_distance, landscape_minimum, sweep_landscape
from .recovery import (
    RECOVERY_CASES,
    RecoveryCase,
    RecoveryReport,
    RecoverySettings,
    mean_percent_error,
    run_case,
    run_recovery,
    source_target_sets,
    split_halves,
    synthesize_ground_truth,
)
from .report import (
    AcceptanceResult,
    run_acceptance,
    summary_table,
    write_landscape_csv,
    write_recovery_csv,
)
from .scenes import Corpus, generate_corpus, generate_scene

__all__ = [
    "ablate_guidance_threshold",
    "ablate_model_choice",
    "ablate_model_complexity",
    "ablate_population",
    "feature_distance",
    "landscape_minimum",
    "sweep_landscape",
    "RECOVERY_CASES",
    "RecoveryCase",
    "RecoveryReport",
    "RecoverySettings",
    "mean_percent_error",
    "run_case",
    "run_recovery",
    "source_target_sets",
    "split_halves",
    "synthesize_ground_truth",
    "AcceptanceResult",
    "run_acceptance",
    "summary_table",
    "write_landscape_csv",
    "write_recovery_csv",
    "Corpus",
    "generate_corpus",
    "generate_scene",
]
