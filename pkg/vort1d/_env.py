# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

import contextlib
import logging
import os
import typing as tp
from pathlib import Path


logger = logging.getLogger(__name__)

OUT_VARIABLE = "VORT1D_OUT"


class Env:
    """Global environment providing the output root if one is imposed.
    This is called as vort1d.env
    """

    _instance: tp.Optional["Env"] = None

    def __new__(cls) -> "Env":
        """Singleton pattern"""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self) -> None:
        self.out: tp.Optional[Path] = None  # forced output root, wins over out_dir

    @property
    def forced_out(self) -> tp.Optional[Path]:
        """Output directory imposed by `VORT1D_OUT` or by `temporary(out=...)`."""
        if self.out is not None:
            return self.out
        value = os.environ.get(OUT_VARIABLE)
        if value:
            return Path(value)
        return None

    def resolve_out(self, out_dir: tp.Union[str, Path]) -> Path:
        forced = self.forced_out
        if forced is not None:
            if Path(out_dir) != forced:
                logger.debug("%s overrides out_dir %s with %s", OUT_VARIABLE, out_dir, forced)
            return forced
        return Path(out_dir)

    @contextlib.contextmanager
    def temporary(self, out: tp.Union[str, Path, None] = None) -> tp.Iterator[None]:
        """Forces the output root to `out` inside the `with` block, `None` lifts the
        forcing (`VORT1D_OUT` still applies).
        """
        previous = self.out
        self.out = None if out is None else Path(out)
        try:
            yield
        finally:
            self.out = previous

    def __repr__(self) -> str:
        return f"Env(out={self.out}, {OUT_VARIABLE}={os.environ.get(OUT_VARIABLE)})"


env = Env()
