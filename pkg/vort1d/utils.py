# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

import typing as tp
from contextlib import contextmanager
import hashlib
import json
import logging
import math
from pathlib import Path
import os

import numpy as np
from omegaconf import OmegaConf
from omegaconf.basecontainer import BaseContainer


logger = logging.getLogger(__name__)


@tp.overload
def wrap_angle(x: float) -> float:
    ...


@tp.overload  # noqa
def wrap_angle(x: np.ndarray) -> np.ndarray:  # noqa
    ...


def wrap_angle(x: tp.Any) -> tp.Any:  # noqa
    """Reduces positions mod 2 pi into [-pi, pi)."""
    out = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    # mod can round up to exactly 2 pi for tiny negative inputs
    out = np.where(out >= np.pi, -np.pi, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def periodic_distance(x: tp.Any, y: tp.Any) -> tp.Any:
    """Distance on the circle of length 2 pi, in [0, pi]."""
    diff = np.abs(np.mod(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), 2 * np.pi))
    out = np.minimum(diff, 2 * np.pi - diff)
    if np.ndim(out) == 0:
        return float(out)
    return out


def colorize(text: str, color: str) -> str:
    """
    Display text with some ANSI color in the terminal.
    """
    code = f"\033[{color}m"
    restore = "\033[0m"
    return "".join([code, text, restore])


def bold(text: str) -> str:
    """
    Display text in bold in the terminal.
    """
    return colorize(text, "1")


@contextmanager
def write_and_rename(path: Path, suffix: str = ".tmp") -> tp.Iterator[tp.TextIO]:
    """Writes text to `path + suffix` and renames it to `path` once closed, readers
    never see a partial report or snapshot.
    """
    tmp_path = str(path) + suffix
    with open(tmp_path, "w", encoding="utf-8", newline="") as f:
        yield f
    os.replace(tmp_path, path)


def jsonable(value: tp.Any) -> tp.Any:
    """Converts configs, paths and numpy scalars to plain JSON values.
    Non finite floats become None.
    """
    if isinstance(value, dict):
        lst = [(str(jsonable(k)), jsonable(v)) for k, v in value.items()]
        lst.sort()
        return dict(lst)
    elif isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    elif isinstance(value, Path):
        return str(value)
    elif isinstance(value, np.generic):
        return jsonable(value.item())
    elif isinstance(value, float):
        return value if math.isfinite(value) else None
    elif value is None or isinstance(value, (int, str, bool)):
        return value
    elif isinstance(value, BaseContainer):
        return jsonable(OmegaConf.to_container(value, resolve=True))
    else:
        raise ValueError(f"{repr(value)} is not jsonable.")


def signature(value: tp.Any) -> str:
    """Short stable hash of a jsonable value."""
    value = jsonable(value)
    return hashlib.sha1(json.dumps(value).encode()).hexdigest()[:16]
