# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Runs a list of configurations, each in its own subdirectory named after
the signature of its settings.
"""
from concurrent import futures
from dataclasses import dataclass
import logging
from pathlib import Path
import typing as tp

from dora.log import LogProgress
import pandas as pd

from ._env import env
from .config import RunConfig
from .simulation import execute
from .utils import signature, write_and_rename

logger = logging.getLogger(__name__)

SUMMARY = "sweep.csv"


def config_signature(cfg: RunConfig) -> str:
    """Signature of everything but the output directory."""
    settings = {k: v for k, v in cfg.settings.items() if k != "out_dir"}
    return signature(settings)


@dataclass
class SweepEntry:
    signature: str
    out_dir: Path
    exit_code: int
    status: str
    preset: tp.Optional[str] = None


def _run_one(cfg: RunConfig, out_dir: Path) -> tp.Tuple[int, str]:
    with env.temporary(out=out_dir):
        result = execute(cfg)
    return result.exit_code, result.status


def sweep(configs: tp.Sequence[RunConfig], root: tp.Optional[Path] = None,
          workers: int = 1) -> tp.List[SweepEntry]:
    """Runs `configs` with up to `workers` processes and writes `sweep.csv` in `root`.

    `root` defaults to the output directory of the first config, `VORT1D_OUT` applies.
    Identical configs share a signature and are only run once.
    """
    if not configs:
        return []
    root = env.resolve_out(configs[0].out_dir if root is None else root)
    unique: tp.Dict[str, RunConfig] = {}
    for cfg in configs:
        unique.setdefault(config_signature(cfg), cfg)
    if len(unique) < len(configs):
        logger.warning("Dropped %d duplicate configs.", len(configs) - len(unique))
    entries: tp.List[SweepEntry] = []
    if workers <= 1:
        for sig, cfg in LogProgress(logger, list(unique.items()), name="Sweep"):
            code, status = _run_one(cfg, root / sig)
            entries.append(SweepEntry(sig, root / sig, code, status, cfg.preset))
    else:
        with futures.ProcessPoolExecutor(workers) as pool:
            jobs = {sig: pool.submit(_run_one, cfg, root / sig) for sig, cfg in unique.items()}
            for sig in LogProgress(logger, list(jobs), name="Sweep"):
                code, status = jobs[sig].result()
                entries.append(SweepEntry(sig, root / sig, code, status, unique[sig].preset))
    root.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([e.__dict__ for e in entries])
    with write_and_rename(root / SUMMARY) as f:
        frame.to_csv(f, index=False)
    failed = sum(e.exit_code != 0 for e in entries)
    if failed:
        logger.warning("%d of %d runs did not exit cleanly, see %s.", failed, len(entries),
                       root / SUMMARY)
    return entries
