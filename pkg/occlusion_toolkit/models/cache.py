# SPDX-License-Identifier: Apache-2.0

"""Displacement-field caching for raindrop rendering."""

import threading
from pathlib import Path
from typing import Dict, Optional, Tuple

from loguru import logger

from .displacement import (
    DisplacementField,
    load_displacement,
    radial_displacement_field,
)

_DEFAULT_KEY = ("<radial>", "<radial>")


class DisplacementCache:
    """Thread-local cache of decoded displacement fields."""

    def __init__(self):
        self._cache: Dict[Tuple[str, str], DisplacementField] = {}
        self._lock = threading.Lock()

    def get_field(
        self, u_path: Optional[Path] = None, v_path: Optional[Path] = None
    ) -> DisplacementField:
        """Get a displacement field, decoding it on first use.

        Args:
            u_path: Horizontal offset PGM, or None for the built-in radial field
            v_path: Vertical offset PGM, or None for the built-in radial field

        Returns:
            DisplacementField instance
        """
        if (u_path is None) != (v_path is None):
            raise ValueError("udisp and vdisp must be given together")
        key = _DEFAULT_KEY if u_path is None else (str(u_path), str(v_path))
        with self._lock:
            if key not in self._cache:
                if u_path is None:
                    logger.debug("Generating built-in radial displacement field")
                    self._cache[key] = radial_displacement_field()
                else:
                    logger.debug(f"Loading displacement maps {u_path}, {v_path}")
                    self._cache[key] = load_displacement(u_path, v_path)
            return self._cache[key]

    def clear(self):
        """Clear the cache."""
        with self._lock:
            cache_size = len(self._cache)
            self._cache.clear()
            logger.debug(f"Cleared displacement cache ({cache_size} fields)")


# Thread-local storage for the displacement cache
_thread_local = threading.local()


def get_displacement_cache() -> DisplacementCache:
    """Get the current thread's displacement cache."""
    if not hasattr(_thread_local, "displacement_cache"):
        _thread_local.displacement_cache = DisplacementCache()
    return _thread_local.displacement_cache


def get_displacement_field(
    u_path: Optional[Path] = None, v_path: Optional[Path] = None
) -> DisplacementField:
    """Displacement field through the thread-local cache."""
    return get_displacement_cache().get_field(u_path, v_path)


def clear_displacement_cache():
    """Clear the current thread's displacement cache."""
    if hasattr(_thread_local, "displacement_cache"):
        _thread_local.displacement_cache.clear()
