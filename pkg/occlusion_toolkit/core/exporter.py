# SPDX-License-Identifier: Apache-2.0

"""Result export: diff-checked parameter files and CSV tables."""

import csv
import difflib
from pathlib import Path
from typing import Dict, Iterable, Mapping, Sequence, Union

from deepdiff import DeepDiff
from loguru import logger

from .exceptions import ImageIOError

PathLike = Union[str, Path]


def format_value(value) -> str:
    """Floats with 9 significant digits, everything else as str."""
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def params_lines(values: Mapping[str, float]) -> list:
    return [f"{name}={format_value(float(value))}" for name, value in values.items()]


def read_params(path: PathLike) -> Dict[str, str]:
    """Parse a ``name=value`` file into a dict of strings."""
    parsed = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        name, value = line.split("=", 1)
        parsed[name.strip()] = value.strip()
    return parsed


def export_params(values: Mapping[str, float], path: PathLike, show_diff: bool = True) -> bool:
    """Write estimated parameters as ``name=value`` lines with diff checking.

    Only writes the file if its content changed compared to the existing file.

    Args:
        values: Parameter name to value
        path: Output file (``params.out``)
        show_diff: Log a unified diff of the change

    Returns:
        bool: True if the file was written, False if nothing changed
    """
    path = Path(path)
    lines = params_lines(values)
    new_values = dict(line.split("=", 1) for line in lines)

    if path.exists():
        try:
            existing = read_params(path)
        except (OSError, UnicodeDecodeError) as e:
            logger.warning(f"Could not read existing parameter file {path}: {e}. Will overwrite.")
            existing = None

        if existing is not None:
            diff = DeepDiff(existing, new_values, ignore_order=True)
            if not diff:
                logger.info(f"No changes detected for parameter file {path}")
                return False
            logger.info(f"Parameter changes detected for {path}")
            if show_diff:
                unified_diff = difflib.unified_diff(
                    [f"{k}={v}" for k, v in existing.items()],
                    lines,
                    fromfile=f"{path.name} (existing)",
                    tofile=f"{path.name} (new)",
                    lineterm="",
                )
                diff_output = "\n".join(unified_diff)
                if diff_output:
                    logger.info(f"Diff:\n{diff_output}")

    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise ImageIOError(path, f"cannot write parameter file ({e})")
    logger.info(f"Exported {len(lines)} parameters to {path}")
    return True


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write a CSV table, formatting floats with 9 significant digits.

    Returns:
        int: Number of data rows written
    """
    path = Path(path)
    count = 0
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
                count += 1
    except OSError as e:
        raise ImageIOError(path, f"cannot write CSV ({e})")
    logger.debug(f"Wrote {count} rows to {path}")
    return count
