# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

import typing as tp

import numpy as np
import pandas as pd
import matplotlib as mpl
import matplotlib.pyplot as plt

from .spectral import SpectralField, derivative, make_grid

FIELD_COLORS: tp.Dict[str, str] = dict(
    Omega='tab:blue',
    omega='tab:orange',
    u='k',
    B='tab:red',
    ux='gray',
    Bx='tab:green',
    Omega_x='tab:cyan',
    omega_x='tab:brown',
    Omega_xx='tab:purple',
    omega_xx='tab:olive',
)

GROWTH_COLUMNS = ["linf_ux", "linf_HOmega", "linf_Homega"]


def plot_timeseries(frame: pd.DataFrame, columns: tp.Sequence[str] = GROWTH_COLUMNS,
                    ax: tp.Optional[mpl.axes.Axes] = None, log: bool = False,
                    figsize: tuple = (8, 5)) -> mpl.axes.Axes:
    """Plot diagnostics columns of a `timeseries.csv` frame against time.

    Parameters
    ----------
    frame :
        Time series as returned by `vort1d.outputs.read_timeseries`.
    columns :
        Names of the columns to draw, missing ones raise `KeyError`.
    ax :
        Matplotlib axes to plot into.
    log :
        If True, use a log scale for the values, useful to spot exponential growth.
    """
    if ax is None:
        _, ax = plt.subplots(figsize=figsize)
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise KeyError(f"Unknown columns {missing}, available: {list(frame.columns)}")
    for column in columns:
        ax.plot(frame["t"].values, frame[column].values, label=column)
    if log:
        ax.set_yscale('log')
    ax.set_xlabel('t')
    ax.legend()
    return ax


def plot_snapshot(frame: pd.DataFrame, fields: tp.Sequence[str] = ("Omega", "omega"),
                  ax: tp.Optional[mpl.axes.Axes] = None,
                  figsize: tuple = (8, 5)) -> mpl.axes.Axes:
    """Plot fields of a snapshot frame over `[-pi, pi)`."""
    if ax is None:
        _, ax = plt.subplots(figsize=figsize)
    for name in fields:
        ax.plot(frame["x"].values, frame[name].values, label=name,
                color=FIELD_COLORS.get(name))
    ax.set_xlim(-np.pi, np.pi)
    ax.set_xlabel('x')
    ax.legend()
    return ax


def with_derivatives(frame: pd.DataFrame,
                     fields: tp.Sequence[str] = ("Omega", "omega")) -> pd.DataFrame:
    """Copy of a snapshot frame with spectral first and second derivatives of `fields`,
    as columns `<name>_x` and `<name>_xx`.
    """
    grid = make_grid(len(frame))
    out = frame.copy()
    for name in fields:
        first = derivative(SpectralField(grid, values=frame[name].values))
        out[f"{name}_x"] = first.values
        out[f"{name}_xx"] = derivative(first).values
    return out
