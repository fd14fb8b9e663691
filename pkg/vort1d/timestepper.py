# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Five stage, fourth order, low storage Runge-Kutta (Carpenter & Kennedy, 1994).

Two registers per field: `k <- A_i k + dt f(t + c_i dt, y)`, `y <- y + B_i k`.
The exponential filter is applied once per completed step.
"""
from dataclasses import dataclass, field
import logging
import math
import typing as tp

import numpy as np

from .errors import BlowUpSuspected, ConfigError, NumericalFailure
from .models import MhdState, ModelSpec, evaluate_rhs
from .spectral import FilterSpec, SpectralField, exp_filter, velocity_from_vorticity

logger = logging.getLogger(__name__)

FORWARD = "forward"
BACKWARD = "backward"

LSRK4_A = (
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
)
LSRK4_B = (
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
)
LSRK4_C = (
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
)

Y = tp.TypeVar("Y")


@dataclass(frozen=True)
class StepControls:
    """Step size control for `advance`.

    Args:
        t_end: time to land on exactly.
        dt: fixed step size, when set it governs and `cfl` is ignored.
        cfl: CFL number, `dt = cfl dx / max(1, |p|, |m|)`.
        filter: exponential filter applied after each step.
        direction: `forward` or `backward` (negative steps).
        nan_abort: if False, a numerical failure stops the run and returns
            the last finite state instead of raising.
        dt_min: a CFL step below this is reported as a suspected blow-up.
        log_every: debug log period, in steps.
    """
    t_end: float
    dt: tp.Optional[float] = None
    cfl: float = 0.5
    filter: FilterSpec = field(default_factory=FilterSpec)
    direction: str = FORWARD
    nan_abort: bool = True
    dt_min: float = 1e-10
    log_every: int = 100

    def __post_init__(self) -> None:
        if not math.isfinite(self.t_end):
            raise ConfigError(f"t_end must be finite, got {self.t_end}", key="t_end")
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}", key="dt")
        if self.dt is None and not (math.isfinite(self.cfl) and self.cfl > 0):
            raise ConfigError(f"cfl must be positive, got {self.cfl}", key="cfl")
        if self.direction not in (FORWARD, BACKWARD):
            raise ConfigError(f"direction must be {FORWARD} or {BACKWARD}, "
                              f"got {self.direction!r}", key="direction")
        if not self.dt_min > 0:
            raise ConfigError(f"dt_min must be positive, got {self.dt_min}", key="dt_min")

    @property
    def sign(self) -> int:
        return 1 if self.direction == FORWARD else -1


def lsrk4_update(y: Y, t: float, dt: float, rhs: tp.Callable[[float, Y], Y],
                 check: tp.Optional[tp.Callable[[Y], None]] = None) -> Y:
    """One step on anything supporting `+` and scalar `*` (floats, arrays).
    `check` is called on the state after every stage.
    """
    k = y * 0.
    for i in range(5):
        try:
            k = LSRK4_A[i] * k + dt * rhs(t + LSRK4_C[i] * dt, y)
            y = y + LSRK4_B[i] * k
            if check is not None:
                check(y)
        except NumericalFailure as error:
            raise error.in_stage(i) from None
    return y


def _check_stage(y: np.ndarray) -> None:
    if not np.isfinite(y).all():
        raise NumericalFailure("stage state")


def lsrk4_step(s: MhdState, spec: ModelSpec, dt: float,
               filter: FilterSpec = FilterSpec()) -> MhdState:
    """Advances `s` by `dt` (possibly negative), then filters both fields."""
    if dt == 0:
        return s.evolve(s.Omega, s.omega, s.time)
    grid = s.grid

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        state = MhdState(SpectralField(grid, values=y[0]), SpectralField(grid, values=y[1]), t)
        d_Omega, d_omega = evaluate_rhs(state, spec)
        return np.stack([d_Omega.values, d_omega.values])

    y = np.stack([s.Omega.values, s.omega.values])
    y = lsrk4_update(y, s.time, dt, rhs, check=_check_stage)
    Omega = exp_filter(SpectralField(grid, values=y[0]), filter)
    omega = exp_filter(SpectralField(grid, values=y[1]), filter)
    return s.evolve(Omega, omega, s.time + dt)


def max_velocity(s: MhdState, spec: ModelSpec) -> float:
    p = velocity_from_vorticity(s.Omega, spec.gauge)
    m = velocity_from_vorticity(s.omega, spec.gauge)
    return float(max(np.abs(p.values).max(), np.abs(m.values).max()))


def cfl_dt(s: MhdState, spec: ModelSpec, cfl: float) -> float:
    """`cfl dx / max(1, max |p|, max |m|)`."""
    return cfl * s.grid.dx / max(1.0, max_velocity(s, spec))


@dataclass
class AdvanceResult:
    state: MhdState
    steps: int
    # set only when `nan_abort` is False and the run stopped early
    failure: tp.Optional[NumericalFailure] = None


Observer = tp.Callable[[MhdState], None]


def advance(s0: MhdState, spec: ModelSpec, controls: StepControls,
            observer: tp.Optional[Observer] = None) -> AdvanceResult:
    """Steps from `s0.time` to `controls.t_end`, the last step is shortened to land on it.

    `observer` is called with every post-step state. Exceptions it raises propagate,
    which is how callers abort a run on their own criteria.
    """
    sign = controls.sign
    target = controls.t_end
    if sign * (target - s0.time) < 0:
        raise ValueError(f"Cannot reach t_end={target} from t={s0.time} "
                         f"going {controls.direction}.")
    tolerance = 1e-12 * max(1.0, abs(target))
    s = s0
    steps = 0
    while s.time != target:
        remaining = abs(target - s.time)
        if controls.dt is not None:
            dt = controls.dt
        else:
            dt = cfl_dt(s, spec, controls.cfl)
            if dt < controls.dt_min:
                raise BlowUpSuspected("dt-underflow", s.time, dt)
        last = dt >= remaining - tolerance
        step = remaining if last else dt
        try:
            s = lsrk4_step(s, spec, sign * step, controls.filter)
        except NumericalFailure as error:
            failure = error.at(s.time)
            if controls.nan_abort:
                raise failure from None
            logger.warning("Stopping at t=%.6g: %s", s.time, failure)
            return AdvanceResult(s, steps, failure)
        if last:
            s = s.evolve(s.Omega, s.omega, target)
        steps += 1
        if steps % controls.log_every == 0:
            logger.debug("step %d, t=%.6g, dt=%.3g, max velocity %.4g",
                         steps, s.time, step, max_velocity(s, spec))
        if observer is not None:
            observer(s)
    return AdvanceResult(s, steps)
