# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Files written by a run: `timeseries.csv`, `snapshot_t*.csv` and `report.json`.
See `doc/outputs.md` for the formats.
"""
import json
import logging
from pathlib import Path
import typing as tp

import numpy as np
import pandas as pd

from .diagnostics import DiagnosticsRecord
from .models import MhdState, MHD1D, derived_fields
from .spectral import GaugeSpec, SpectralField, make_grid
from .utils import jsonable, write_and_rename

logger = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ["x", "Omega", "omega", "p", "m", "u", "B", "ux", "Bx"]
TIMESERIES = "timeseries.csv"
REPORT = "report.json"
# 17 significant digits read back to the same double
FLOAT_FORMAT = "%.17g"


def snapshot_name(time: float) -> str:
    return f"snapshot_t{time:.6f}.csv"


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    with write_and_rename(path) as f:
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT)


def snapshot_frame(s: MhdState, gauge: GaugeSpec = GaugeSpec(),
                   kind: str = MHD1D) -> pd.DataFrame:
    derived = derived_fields(s, gauge, kind)
    columns: tp.Dict[str, np.ndarray] = {
        "x": s.grid.nodes, "Omega": s.Omega.values, "omega": s.omega.values}
    for name, f in derived.as_dict().items():
        columns[name] = f.values
    return pd.DataFrame(columns, columns=SNAPSHOT_COLUMNS)


def write_snapshot(s: MhdState, gauge: GaugeSpec, path: tp.Union[str, Path],
                   kind: str = MHD1D) -> Path:
    """One row per node with the vorticities and the recovered fields."""
    s.check_finite()
    path = Path(path)
    _write_csv(snapshot_frame(s, gauge, kind), path)
    logger.debug("Wrote snapshot t=%.6g to %s", s.time, path)
    return path


def read_snapshot(path: tp.Union[str, Path], time: float = 0.0) -> MhdState:
    """Reads the `Omega` and `omega` columns back into a state at `time`."""
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != SNAPSHOT_COLUMNS:
        raise ValueError(f"{path} is not a snapshot, columns are {list(frame.columns)}")
    grid = make_grid(len(frame))
    if not np.allclose(frame["x"].values, grid.nodes, rtol=0, atol=1e-12):
        raise ValueError(f"{path} nodes do not match a uniform grid of {grid.n} points")
    Omega = SpectralField(grid, values=frame["Omega"].to_numpy(dtype=float))
    omega = SpectralField(grid, values=frame["omega"].to_numpy(dtype=float))
    return MhdState(Omega, omega, time)


def timeseries_frame(records: tp.Sequence[DiagnosticsRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.as_dict() for r in records], columns=DiagnosticsRecord.columns())


def write_timeseries(records: tp.Sequence[DiagnosticsRecord],
                     path: tp.Union[str, Path]) -> Path:
    path = Path(path)
    _write_csv(timeseries_frame(records), path)
    return path


def read_timeseries(path: tp.Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def write_report(report: tp.Dict[str, tp.Any], path: tp.Union[str, Path]) -> Path:
    path = Path(path)
    with write_and_rename(path) as f:
        json.dump(jsonable(report), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_report(path: tp.Union[str, Path]) -> tp.Dict[str, tp.Any]:
    with open(path, encoding="utf-8") as f:
        return json.load(f)
