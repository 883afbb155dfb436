# SPDX-License-Identifier: Apache-2.0

"""Loss traces of the estimators."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Union

from ..core.exporter import write_csv

BLOCK_DIFFERENTIABLE = "d"
BLOCK_GENETIC = "nd"

TRACE_COLUMNS = ("round", "block", "iter", "loss")


@dataclass(frozen=True)
class TraceRow:
    round: int
    block: str
    iteration: int
    loss: float
    params: Dict[str, float] = field(default_factory=dict)


def write_trace(
    rows: Sequence[TraceRow], path: Union[str, Path], param_names: Sequence[str] = ()
) -> int:
    """Write ``round,block,iter,loss,<params...>`` rows."""
    if not param_names and rows:
        param_names = list(rows[0].params)
    header = list(TRACE_COLUMNS) + list(param_names)
    body: List[list] = [
        [row.round, row.block, row.iteration, float(row.loss)]
        + [float(row.params.get(name, float("nan"))) for name in param_names]
        for row in rows
    ]
    return write_csv(path, header, body)
