# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Draws the growth diagnostics and every snapshot of a run directory.

    python scripts/plot_run.py outputs/ --log --derivatives
"""
import argparse
import logging
from pathlib import Path

import flashy.logging
import matplotlib
import pandas as pd
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa

from vort1d.outputs import TIMESERIES, read_timeseries  # noqa
from vort1d.viz import plot_snapshot, plot_timeseries, with_derivatives  # noqa

logger = logging.getLogger(__name__)


def main() -> None:
    parser = argparse.ArgumentParser("plot_run")
    parser.add_argument("run", type=Path, help="Output directory of a run.")
    parser.add_argument("--log", action="store_true", help="Log scale for the growth plot.")
    parser.add_argument("--fields", nargs="+", default=["Omega", "omega"])
    parser.add_argument("--derivatives", action="store_true",
                        help="Also draw Omega_x, omega_x, Omega_xx and omega_xx, one figure each.")
    args = parser.parse_args()
    flashy.logging.setup_logging(with_file_log=False)

    frame = read_timeseries(args.run / TIMESERIES)
    ax = plot_timeseries(frame, log=args.log)
    ax.figure.savefig(args.run / "growth.png", bbox_inches='tight')
    plt.close(ax.figure)
    for path in sorted(args.run.glob("snapshot_*.csv")):
        snapshot = pd.read_csv(path)
        ax = plot_snapshot(snapshot, args.fields)
        ax.set_title(path.stem)
        ax.figure.savefig(path.with_suffix(".png"), bbox_inches='tight')
        plt.close(ax.figure)
        logger.info("Wrote %s", path.with_suffix(".png"))
        if args.derivatives:
            snapshot = with_derivatives(snapshot)
            for order in ["x", "xx"]:
                ax = plot_snapshot(snapshot, [f"Omega_{order}", f"omega_{order}"])
                ax.set_title(f"{path.stem}, d{order}")
                target = path.with_name(f"{path.stem}_d{order}.png")
                ax.figure.savefig(target, bbox_inches='tight')
                plt.close(ax.figure)


if __name__ == "__main__":
    main()
