# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Runs one configuration end to end and writes its outputs."""
from dataclasses import asdict, dataclass, replace
import logging
from pathlib import Path
import time
import typing as tp

import numpy as np

from . import __version__
from ._env import env
from .characteristics import RunHistory, holder_exponent, transport_invariance_error
from .config import RunConfig
from .diagnostics import DiagnosticsSeries, gronwall_constant, holder_estimate, linear_growth_fit
from .errors import EXIT_CODES, BlowUpSuspected, ConfigError, NumericalFailure, Vort1dError
from .models import MhdState, OSW, TRANSPORT, derived_fields
from .outputs import REPORT, TIMESERIES, snapshot_name, write_report, write_snapshot, \
    write_timeseries
from .timestepper import advance
from .utils import bold

logger = logging.getLogger(__name__)

OK = "ok"
STATUSES = {0: OK, 2: "config-error", 3: "numerical-failure", 4: "blow-up-suspected"}
LAST_FINITE = "snapshot_last_finite.csv"
NOTES = {
    "fig3": ("a=-1 is expected to grow faster than fig2 (a=1): compare growth.linf_ux.slope "
             "with the fig2 report."),
}


@dataclass
class RunResult:
    exit_code: int
    report: tp.Dict[str, tp.Any]
    out_dir: Path
    state: tp.Optional[MhdState] = None

    @property
    def status(self) -> str:
        return STATUSES[self.exit_code]


def _describe_failure(error: Exception) -> tp.Dict[str, tp.Any]:
    out: tp.Dict[str, tp.Any] = {"type": error.__class__.__name__, "message": str(error)}
    for name in ["time", "quantity", "stage", "reason", "value", "key", "line"]:
        if hasattr(error, name):
            out[name] = getattr(error, name)
    return out


def max_drift(s: MhdState, reference: MhdState) -> float:
    return float(max(np.abs(s.Omega.values - reference.Omega.values).max(),
                     np.abs(s.omega.values - reference.omega.values).max()))


class Simulation:
    """Steps `cfg` from its initial state, stopping at every snapshot time.

    Diagnostics are recorded every `cfg.diagnostics_every` steps and at every
    snapshot and final time. A recorded criterion integrand above
    `cfg.bkm_threshold` stops the run as a suspected blow-up.
    """

    def __init__(self, cfg: RunConfig) -> None:
        self.cfg = cfg
        self.out = env.resolve_out(cfg.out_dir)
        self.series = DiagnosticsSeries(cfg.model.gauge, cfg.model.kind, cfg.oversample)
        self.steps = 0
        self.snapshots: tp.List[str] = []
        self.initial: tp.Optional[MhdState] = None
        self.state: tp.Optional[MhdState] = None
        # transport runs keep their velocities to check invariance along characteristics
        self.history: tp.Optional[RunHistory] = None
        if cfg.model.kind == TRANSPORT and cfg.controls.sign > 0:
            self.history = RunHistory(cfg.model, cfg.diagnostics_every)

    def _record(self, s: MhdState) -> None:
        rec = self.series.update(s)
        if rec.integrand > self.cfg.bkm_threshold:
            raise BlowUpSuspected("bkm-threshold", s.time, rec.integrand)

    def _observe(self, s: MhdState) -> None:
        self.steps += 1
        self.state = s
        if self.history is not None:
            self.history.update(s)
        if self.steps % self.cfg.diagnostics_every == 0:
            self._record(s)

    def _close_segment(self, s: MhdState) -> None:
        last = self.series.last
        if last is None or last.t != s.time:
            self._record(s)

    def _snapshot(self, s: MhdState, name: str) -> None:
        write_snapshot(s, self.cfg.model.gauge, self.out / name, self.cfg.model.kind)
        self.snapshots.append(name)

    def _step_all(self) -> tp.Optional[NumericalFailure]:
        cfg = self.cfg
        s = cfg.initial_state().check_finite()
        self.initial = s
        self.state = s
        if self.history is not None:
            self.history.update(s)
        self._record(s)
        for target in list(cfg.snapshot_times) + [cfg.controls.t_end]:
            controls = replace(cfg.controls, t_end=target)
            result = advance(s, cfg.model, controls, observer=self._observe)
            s = result.state
            self.state = s
            if result.failure is not None:
                self._close_segment(s)
                self._snapshot(s, LAST_FINITE)
                return result.failure
            self._close_segment(s)
            if target in cfg.snapshot_times and snapshot_name(target) not in self.snapshots:
                self._snapshot(s, snapshot_name(target))
        return None

    def run(self) -> RunResult:
        self.out.mkdir(parents=True, exist_ok=True)
        begin = time.time()
        failure: tp.Optional[Vort1dError] = None
        try:
            failure = self._step_all()
        except (ConfigError, NumericalFailure, BlowUpSuspected) as error:
            failure = error
        exit_code = 0 if failure is None else EXIT_CODES[type(failure)]
        if self.series.records:
            write_timeseries(self.series.records, self.out / TIMESERIES)
        report = self.report(exit_code, failure, time.time() - begin)
        write_report(report, self.out / REPORT)
        if failure is None:
            logger.info("Run %s: t=%.6g after %d steps, bkm integral %.6g, in %.1fs.",
                        bold(OK), report["t_final"], self.steps, report["bkm_integral"],
                        report["wall_time"])
        else:
            logger.warning("Run stopped with exit code %d: %s", exit_code, failure)
        return RunResult(exit_code, report, self.out, self.state)

    def _holder(self) -> tp.Dict[str, float]:
        """Hölder seminorms of the final velocities at the exponents decaying
        from the initial sup norms of the vorticities.
        """
        assert self.initial is not None and self.state is not None
        s0, s = self.initial, self.state
        elapsed = abs(s.time - s0.time)
        derived = derived_fields(s, self.cfg.model.gauge, self.cfg.model.kind)
        out = {}
        sources = [("p", s0.Omega, derived.p), ("m", s0.omega, derived.m)]
        if self.cfg.model.kind == OSW:
            sources = [("u", s0.omega, derived.u)]
        for name, vorticity, velocity in sources:
            rate = self.cfg.c0 * float(np.abs(vorticity.values).max())
            beta = holder_exponent(rate, elapsed)
            out[f"beta_{name}"] = beta
            out[f"seminorm_{name}"] = holder_estimate(velocity, beta) if beta > 0 else 0.0
        return out

    def report(self, exit_code: int, failure: tp.Optional[Exception],
               wall_time: float) -> tp.Dict[str, tp.Any]:
        cfg = self.cfg
        records = self.series.records
        final = records[-1] if records else None
        growth: tp.Dict[str, tp.Any] = {}
        if len(records) >= 3 and cfg.controls.sign > 0:
            ux = linear_growth_fit(self.series.series("linf_ux"))
            integrand = linear_growth_fit(self.series.series("integrand"))
            growth = {"linf_ux": {**asdict(ux), "relative_residual": ux.relative_residual},
                      "linf_HOmega+linf_Homega": {
                          **asdict(integrand), "relative_residual": integrand.relative_residual}}
        notes = []
        if cfg.preset in NOTES:
            notes.append(NOTES[cfg.preset])
        if cfg.preset is not None:
            notes.append(f"gauge used: {cfg.model.gauge.kind}")
        report: tp.Dict[str, tp.Any] = {
            "status": STATUSES[exit_code],
            "exit_code": exit_code,
            "version": __version__,
            "model": cfg.model.kind,
            "a": cfg.model.a,
            "gauge": {"kind": cfg.model.gauge.kind, "point": cfg.model.gauge.point},
            "preset": cfg.preset,
            "n": cfg.n,
            "t_end": cfg.controls.t_end,
            "t_final": None if self.state is None else self.state.time,
            "steps": self.steps,
            "wall_time": wall_time,
            "final": None if final is None else final.as_dict(),
            "bkm_integral": None if final is None else final.bkm_integral,
            "gronwall_constant": gronwall_constant(records),
            "growth": growth,
            "snapshots": list(self.snapshots),
            "failure": None if failure is None else _describe_failure(failure),
            "notes": notes,
            "settings": cfg.settings,
        }
        if self.initial is not None and self.state is not None:
            report["max_drift"] = max_drift(self.state, self.initial)
            if self.state.Omega.is_finite() and self.state.omega.is_finite():
                report["holder"] = self._holder()
                if self.history is not None:
                    report["transport_invariance_error"] = transport_invariance_error(
                        self.history, cfg.particles)
        return report


def execute(cfg: RunConfig) -> RunResult:
    """Runs `cfg`, writes `timeseries.csv`, the snapshots and `report.json` to the
    output directory and returns the exit code with the report.
    """
    logger.info("Running %s, a=%g, n=%d up to t=%g, outputs in %s.", cfg.model.kind,
                cfg.model.a, cfg.n, cfg.controls.t_end, env.resolve_out(cfg.out_dir))
    return Simulation(cfg).run()
