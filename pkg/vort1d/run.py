# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Command line entry point, `python -m vort1d.run --help`."""
import argparse
import logging
from pathlib import Path
import sys
import typing as tp

import flashy

from .characteristics import calibrate_c0, calibration_corpus
from .config import available_presets, parse_config
from .errors import ConfigError, EXIT_CODES
from .models import ModelSpec, MHD1D
from .simulation import execute
from .sweep import sweep
from .utils import bold
from . import verify

logger = logging.getLogger(__name__)

STEADY_DRIFT_TOL = 1e-8
FORMULA_TOL = 1e-10
TRANSPORT_TOL = 1e-4
SPACE_RATIO_MIN = 100
TIME_ORDER = (3.8, 4.2)


def get_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser("vort1d", description="Nonlocal 1D MHD models.")
    parser.add_argument("-v", "--verbose", action="store_true")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one configuration.")
    run.add_argument("--config", type=Path, help="key=value document.")
    run.add_argument("--preset", choices=available_presets())
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="Override a key, can be repeated.")

    reproduce = commands.add_parser("reproduce", help="Run a reproduction preset.")
    reproduce.add_argument("preset", choices=available_presets())
    reproduce.add_argument("--n", type=int, help="Grid size, for desk scale runs.")
    reproduce.add_argument("--t-end", type=float)
    reproduce.add_argument("--set", dest="overrides", action="append", default=[],
                           metavar="KEY=VALUE")

    steady = commands.add_parser("check-steady", help="Steady family residual and drift.")
    steady.add_argument("--a", type=float, default=1.0)
    steady.add_argument("--n", type=int, default=256)
    steady.add_argument("--t-end", type=float, default=5.0)
    steady.add_argument("--shape", choices=["sin", "cos"], default="sin")

    converge = commands.add_parser("converge", help="Convergence study on fig2 data.")
    converge.add_argument("--refine", choices=["space", "time"], required=True)
    converge.add_argument("--a", type=float, default=1.0)
    converge.add_argument("--t-end", type=float,
                          help="Defaults to 0.5 for time and 1 for space refinement.")

    transport = commands.add_parser("transport-verify",
                                    help="Invariance along characteristics, transport model.")
    transport.add_argument("--n", type=int, default=1024)
    transport.add_argument("--t-end", type=float, default=2.0)
    transport.add_argument("--particles", type=int, default=256)

    commands.add_parser("calibrate", help="Measure the log-Lipschitz constant c0.")

    sweep_cmd = commands.add_parser("sweep", help="Run several configurations.")
    sweep_cmd.add_argument("configs", type=Path, nargs="+")
    sweep_cmd.add_argument("--workers", type=int, default=1)
    sweep_cmd.add_argument("--out", type=Path)
    sweep_cmd.add_argument("--set", dest="overrides", action="append", default=[],
                           metavar="KEY=VALUE")
    return parser


def _run(args: tp.Any) -> int:
    text = "" if args.config is None else args.config.read_text(encoding="utf-8")
    overrides = list(args.overrides)
    if args.preset is not None:
        overrides.append(f"preset={args.preset}")
    return execute(parse_config(text, overrides)).exit_code


def _reproduce(args: tp.Any) -> int:
    overrides = list(args.overrides)
    if args.n is not None:
        overrides.append(f"n={args.n}")
    if args.t_end is not None:
        overrides.append(f"t_end={args.t_end}")
    return execute(parse_config(f"preset={args.preset}", overrides)).exit_code


def _check_steady(args: tp.Any) -> int:
    family = verify.SteadyFamily(shape=args.shape)
    check = verify.check_steady(family, a=args.a, n=args.n, t_end=args.t_end)
    logger.info("residual %.3e, closed form error %.3e", check.residual, check.formula_error)
    ok = check.formula_error <= FORMULA_TOL
    if check.drift is not None:
        logger.info("drift at t=%g: %.3e", args.t_end, check.drift)
        ok = ok and check.drift <= STEADY_DRIFT_TOL
    return 0 if ok else 1


def _converge(args: tp.Any) -> int:
    spec = ModelSpec(MHD1D, a=args.a)
    Omega, omega = verify.fig2_data()
    if args.refine == "time":
        t_end = 0.5 if args.t_end is None else args.t_end
        study = verify.time_convergence(verify.fig2_state(256), spec, t_end)
    else:
        t_end = 1.0 if args.t_end is None else args.t_end
        study = verify.space_convergence(Omega, omega, spec, t_end)
    for size, error in zip(study.sizes, study.errors):
        logger.info("%s %5d: error %.3e", study.refine, size, error)
    for ratio, order in zip(study.ratios, study.orders):
        logger.info("ratio %.3g, order %.3f", ratio, order)
    if args.refine == "space":
        return 0 if study.ratios and study.ratios[0] >= SPACE_RATIO_MIN else 1
    low, high = TIME_ORDER
    return 0 if all(low <= order <= high for order in study.orders) else 1


def _transport(args: tp.Any) -> int:
    error = verify.transport_verify(args.n, args.t_end, args.particles)
    return 0 if error <= TRANSPORT_TOL else 1


def _calibrate(args: tp.Any) -> int:
    c0 = calibrate_c0(calibration_corpus())
    logger.info("calibrated c0 = %s", bold(f"{c0:.6f}"))
    return 0


def _sweep(args: tp.Any) -> int:
    configs = [parse_config(path.read_text(encoding="utf-8"), args.overrides)
               for path in args.configs]
    entries = sweep(configs, args.out, args.workers)
    return max((e.exit_code for e in entries), default=0)


COMMANDS: tp.Dict[str, tp.Callable[[tp.Any], int]] = {
    "run": _run,
    "reproduce": _reproduce,
    "check-steady": _check_steady,
    "converge": _converge,
    "transport-verify": _transport,
    "calibrate": _calibrate,
    "sweep": _sweep,
}


def main(argv: tp.Optional[tp.Sequence[str]] = None) -> int:
    args = get_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.INFO
    flashy.setup_logging(level=level)
    if args.verbose:
        logging.getLogger("vort1d").setLevel(logging.DEBUG)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as error:
        logger.error("Invalid configuration: %s", error)
        return EXIT_CODES[ConfigError]


if __name__ == "__main__":
    sys.exit(main())
