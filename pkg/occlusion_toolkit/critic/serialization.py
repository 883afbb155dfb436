# SPDX-License-Identifier: Apache-2.0

"""Versioned binary ``.critic`` files.

Layout: 8 magic bytes, then little-endian uint32 version, patch size and
feature count. Version 2 follows with the loss scale as a little-endian
float64; version 1 files have no scale and load with scale 1. The feature
means and variances come last, as little-endian float64.
"""

import struct
from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger

from ..core.exceptions import ImageIOError
from .critic import Critic, CriticStats, make_critic
from .features import FEATURE_COUNT

CRITIC_MAGIC = b"OCCRITIC"
CRITIC_VERSION = 2
SUPPORTED_VERSIONS = (1, 2)
_HEADER = struct.Struct("<8sIII")
_SCALE = struct.Struct("<d")


def save_critic(critic: Critic, path: Union[str, Path]) -> None:
    path = Path(path)
    stats = critic.stats
    payload = _HEADER.pack(CRITIC_MAGIC, CRITIC_VERSION, stats.patch_size, FEATURE_COUNT)
    payload += _SCALE.pack(critic.scale)
    payload += stats.means.astype("<f8").tobytes()
    payload += stats.variances.astype("<f8").tobytes()
    try:
        path.write_bytes(payload)
    except OSError as e:
        raise ImageIOError(path, f"cannot write critic ({e})")
    logger.debug(f"Saved critic stats to {path} (scale {critic.scale:g})")


def load_critic(path: Union[str, Path], kind: str = "patch") -> Critic:
    """Read a ``.critic`` file and wrap the stats in a critic of ``kind``."""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except FileNotFoundError:
        raise ImageIOError(path, "file not found")
    except OSError as e:
        raise ImageIOError(path, f"cannot read critic ({e})")
    if len(payload) < _HEADER.size:
        raise ImageIOError(path, "truncated critic file")
    magic, version, patch_size, count = _HEADER.unpack_from(payload)
    if magic != CRITIC_MAGIC:
        raise ImageIOError(path, "not a critic file")
    if version not in SUPPORTED_VERSIONS:
        raise ImageIOError(path, f"unsupported critic version {version}")
    if count != FEATURE_COUNT:
        raise ImageIOError(path, f"unexpected feature count {count}")

    offset, scale = _HEADER.size, 1.0
    if version >= 2:
        if len(payload) < offset + _SCALE.size:
            raise ImageIOError(path, "truncated critic file")
        (scale,) = _SCALE.unpack_from(payload, offset)
        offset += _SCALE.size
        if not scale > 0:
            raise ImageIOError(path, f"invalid critic scale {scale}")
    body = np.frombuffer(payload, dtype="<f8", offset=offset)
    if body.size != 2 * count:
        raise ImageIOError(path, "truncated critic file")
    stats = CriticStats(patch_size, body[:count].copy(), body[count:].copy())
    return make_critic(stats, kind, scale)
