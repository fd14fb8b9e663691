# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""
Verification studies: steady states, convergence in time and space,
invariance along characteristics and the closed form CLM solution.
"""
from dataclasses import dataclass, field
import logging
import math
import typing as tp

from dora.log import LogProgress
import numpy as np
import pandas as pd

from .characteristics import RunHistory, transport_invariance_error
from .models import MhdState, ModelSpec, MHD1D, OSW, TRANSPORT, evaluate_rhs
from .spectral import FilterSpec, SpectralField, hilbert, make_grid
from .timestepper import StepControls, advance, cfl_dt

logger = logging.getLogger(__name__)

InitialData = tp.Callable[[np.ndarray], np.ndarray]


def fig2_data() -> tp.Tuple[InitialData, InitialData]:
    return (lambda x: np.sin(x) + np.cos(4 * x) + 5), (lambda x: np.sin(2 * x) + 2)


def _state(n: int, Omega: InitialData, omega: InitialData) -> MhdState:
    grid = make_grid(n)
    return MhdState(SpectralField.from_function(grid, Omega),
                    SpectralField.from_function(grid, omega))


def fig2_state(n: int) -> MhdState:
    return _state(n, *fig2_data())


def _distance(s1: MhdState, s2: MhdState, stride: int = 1) -> float:
    """Max norm over both fields, `s2` sampled every `stride` nodes."""
    return float(max(np.abs(s1.Omega.values - s2.Omega.values[::stride]).max(),
                     np.abs(s1.omega.values - s2.omega.values[::stride]).max()))


@dataclass(frozen=True)
class SteadyFamily:
    """`Omega = A1 shape(kx + theta1)`, `omega = A2 shape(kx + theta2)`, shape sin or cos."""
    k: int = 2
    A1: float = 1.0
    theta1: float = 0.3
    A2: float = 0.5
    theta2: float = 1.1
    shape: str = "sin"

    def _phases(self) -> tp.Tuple[float, float]:
        shift = 0.0 if self.shape == "sin" else math.pi / 2
        return self.theta1 + shift, self.theta2 + shift

    def state(self, n: int) -> MhdState:
        t1, t2 = self._phases()
        return _state(n, lambda x: self.A1 * np.sin(self.k * x + t1),
                      lambda x: self.A2 * np.sin(self.k * x + t2))

    def expected_rhs(self, x: np.ndarray, a: float) -> tp.Tuple[np.ndarray, np.ndarray]:
        """`(a - 1) A1 A2 sin(kx + theta2) cos(kx + theta1)` and its mirror, zero for a = 1."""
        t1, t2 = self._phases()
        scale = (a - 1) * self.A1 * self.A2
        return (scale * np.sin(self.k * x + t2) * np.cos(self.k * x + t1),
                scale * np.sin(self.k * x + t1) * np.cos(self.k * x + t2))


@dataclass
class SteadyCheck:
    residual: float
    formula_error: float
    drift: tp.Optional[float] = None


def check_steady(family: SteadyFamily = SteadyFamily(), a: float = 1.0, n: int = 256,
                 t_end: float = 5.0, cfl: float = 0.5) -> SteadyCheck:
    """Right-hand side of `mhd1d` on a steady family member against its closed form.
    For `a = 1` the state is also advanced to `t_end` and its drift measured.
    """
    s = family.state(n)
    spec = ModelSpec(MHD1D, a=a)
    d_Omega, d_omega = evaluate_rhs(s, spec)
    expected_Omega, expected_omega = family.expected_rhs(s.grid.nodes, a)
    check = SteadyCheck(
        residual=float(max(np.abs(d_Omega.values).max(), np.abs(d_omega.values).max())),
        formula_error=float(max(np.abs(d_Omega.values - expected_Omega).max(),
                                np.abs(d_omega.values - expected_omega).max())))
    if a == 1:
        final = advance(s, spec, StepControls(t_end=t_end, cfl=cfl)).state
        check.drift = _distance(final, s)
    return check


@dataclass
class ConvergenceStudy:
    """Errors of successive refinements, `sizes` are step counts or grid sizes."""
    refine: str
    sizes: tp.List[int] = field(default_factory=list)
    errors: tp.List[float] = field(default_factory=list)

    @property
    def ratios(self) -> tp.List[float]:
        return [e1 / e2 if e2 > 0 else math.inf for e1, e2 in zip(self.errors, self.errors[1:])]

    @property
    def orders(self) -> tp.List[float]:
        return [math.log2(r) if r > 0 else math.nan for r in self.ratios]

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"size": self.sizes, "error": self.errors})


def time_convergence(s0: MhdState, spec: ModelSpec, t_end: float,
                     steps: tp.Sequence[int] = (50, 100, 200),
                     filter: FilterSpec = FilterSpec(enabled=False)) -> ConvergenceStudy:
    """Self convergence under step halving: `errors[i]` compares the runs with
    `steps[i]` and `steps[i + 1]` steps, so `orders` estimates the temporal order.
    """
    finals = []
    for count in LogProgress(logger, list(steps), name="Time convergence"):
        controls = StepControls(t_end=t_end, dt=(t_end - s0.time) / count, filter=filter)
        finals.append(advance(s0, spec, controls).state)
    study = ConvergenceStudy("time", list(steps[:-1]))
    for coarse, fine in zip(finals, finals[1:]):
        study.errors.append(_distance(coarse, fine))
    return study


def space_convergence(Omega: InitialData, omega: InitialData, spec: ModelSpec, t_end: float,
                      sizes: tp.Sequence[int] = (128, 256), reference: int = 1024,
                      cfl: float = 0.5) -> ConvergenceStudy:
    """Errors of grids `sizes` against a `reference` grid at `t_end`, all runs share
    the step size set by `cfl` on the reference grid. The reference size must be
    a multiple of every size so that coarse nodes are reference nodes.
    """
    for n in sizes:
        if reference % n:
            raise ValueError(f"reference {reference} is not a multiple of {n}")
    ref0 = _state(reference, Omega, omega)
    dt = cfl_dt(ref0, spec, cfl)
    controls = StepControls(t_end=t_end, dt=dt)
    ref = advance(ref0, spec, controls).state
    study = ConvergenceStudy("space", list(sizes))
    for n in LogProgress(logger, list(sizes), name="Space convergence"):
        final = advance(_state(n, Omega, omega), spec, controls).state
        study.errors.append(_distance(final, ref, stride=reference // n))
    return study


def transport_verify(n: int = 1024, t_end: float = 2.0, particles: int = 256,
                     cfl: float = 0.5,
                     data: tp.Optional[tp.Tuple[InitialData, InitialData]] = None) -> float:
    """Transport run from `data` (fig2 data by default), then the largest change
    of the vorticities along traced characteristics.
    """
    Omega, omega = fig2_data() if data is None else data
    s = _state(n, Omega, omega)
    spec = ModelSpec(TRANSPORT)
    history = RunHistory(spec)
    history.update(s)
    advance(s, spec, StepControls(t_end=t_end, cfl=cfl), observer=history)
    error = transport_invariance_error(history, particles)
    logger.info("Transport invariance error at n=%d, t=%g: %.3e", n, t_end, error)
    return error


def clm_exact(omega0: SpectralField, t: float) -> SpectralField:
    """Solution of `omega_t = omega H omega` from zero mean `omega0`:
    `4 omega0 / ((2 - t H omega0)^2 + t^2 omega0^2)`.
    """
    scale = max(1.0, float(np.abs(omega0.values).max()))
    if abs(omega0.mean()) > 1e-12 * scale:
        raise ValueError("The closed form needs zero mean data.")
    w = omega0.values
    h = hilbert(omega0).values
    denominator = (2 - t * h) ** 2 + (t * w) ** 2
    if denominator.min() <= 0:
        raise ValueError(f"The solution is singular before t={t}.")
    return SpectralField(omega0.grid, values=4 * w / denominator)


def clm_error(n: int = 128, t: float = 0.5, dt: float = 0.005,
              omega0: InitialData = np.cos) -> float:
    """Max error of the `osw` solver with a = 0 against `clm_exact`."""
    grid = make_grid(n)
    w0 = SpectralField.from_function(grid, omega0)
    s = MhdState(SpectralField.zeros(grid), w0)
    final = advance(s, ModelSpec(OSW, a=0.0), StepControls(t_end=t, dt=dt)).state
    return float(np.abs(final.omega.values - clm_exact(w0, t).values).max())
