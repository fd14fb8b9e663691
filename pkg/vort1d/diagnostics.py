# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Per step measurements: norms, sup norms of the Hilbert images, means,
the running criterion integral, Hölder seminorms and growth fits.
"""
from dataclasses import dataclass, asdict, fields
import logging
import math
import typing as tp

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from .models import MhdState, ModelSpec, MHD1D, derived_fields, evaluate_rhs
from .spectral import GaugeSpec, SpectralField, make_grid, derivative, hilbert

logger = logging.getLogger(__name__)


@dataclass
class FieldNorms:
    l2: float
    linf: float
    h1: float
    h2: float


def _l2(f: SpectralField) -> float:
    coeffs = f.coeffs
    energy = np.sum(f.grid.plan.weights * np.abs(coeffs) ** 2)
    return math.sqrt(2 * math.pi * energy)


def field_norms(f: SpectralField) -> FieldNorms:
    """L2 norm by Parseval, nodal L-infinity norm, and the L2 norms of the first
    and second derivatives.
    """
    f_x = derivative(f)
    return FieldNorms(
        l2=_l2(f),
        linf=float(np.abs(f.values).max()),
        h1=_l2(f_x),
        h2=_l2(derivative(f_x)))


def sup_norm(f: SpectralField, oversample: int = 1) -> float:
    """Max of `|f|`, on the nodes or on a grid `oversample` times finer."""
    if oversample == 1:
        return float(np.abs(f.values).max())
    n = f.grid.n
    fine = make_grid(n * oversample)
    coeffs = np.zeros(fine.n // 2 + 1, dtype=complex)
    coeffs[:n // 2 + 1] = f.coeffs
    # the coarse Nyquist mode becomes an interior mode counted twice
    coeffs[n // 2] *= 0.5
    return float(np.abs(fine.backward(coeffs)).max())


@dataclass
class DiagnosticsRecord:
    """One row of `timeseries.csv`, field order is the column order."""
    t: float
    l2_Omega: float
    l2_omega: float
    h1_Omega: float
    h1_omega: float
    h2_Omega: float
    h2_omega: float
    linf_HOmega: float
    linf_Homega: float
    linf_ux: float
    linf_Bx: float
    mean_Omega: float
    mean_omega: float
    bkm_integral: float

    @classmethod
    def columns(cls) -> tp.List[str]:
        return [f.name for f in fields(cls)]

    @property
    def integrand(self) -> float:
        return self.linf_HOmega + self.linf_Homega

    @property
    def h1_total(self) -> float:
        return math.sqrt(self.h1_Omega ** 2 + self.h1_omega ** 2)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in asdict(self).values())

    def as_dict(self) -> tp.Dict[str, float]:
        return asdict(self)


def record(s: MhdState, gauge: GaugeSpec = GaugeSpec(),
           prev: tp.Optional[DiagnosticsRecord] = None,
           kind: str = MHD1D, oversample: int = 1) -> DiagnosticsRecord:
    """Measures `s`. The criterion integral extends `prev` by one trapezoid,
    it starts at 0 when `prev` is None.
    """
    norms_Omega = field_norms(s.Omega)
    norms_omega = field_norms(s.omega)
    derived = derived_fields(s, gauge, kind)
    linf_HOmega = sup_norm(hilbert(s.Omega), oversample)
    linf_Homega = sup_norm(hilbert(s.omega), oversample)
    bkm = 0.0
    if prev is not None:
        step = abs(s.time - prev.t)
        bkm = prev.bkm_integral + 0.5 * step * (prev.integrand + linf_HOmega + linf_Homega)
    return DiagnosticsRecord(
        t=s.time,
        l2_Omega=norms_Omega.l2, l2_omega=norms_omega.l2,
        h1_Omega=norms_Omega.h1, h1_omega=norms_omega.h1,
        h2_Omega=norms_Omega.h2, h2_omega=norms_omega.h2,
        linf_HOmega=linf_HOmega, linf_Homega=linf_Homega,
        linf_ux=sup_norm(derived.ux, oversample), linf_Bx=sup_norm(derived.Bx, oversample),
        mean_Omega=s.Omega.mean(), mean_omega=s.omega.mean(),
        bkm_integral=bkm)


class DiagnosticsSeries:
    """Accumulates records along a run, `update` with each state then `get`."""

    def __init__(self, gauge: GaugeSpec = GaugeSpec(), kind: str = MHD1D,
                 oversample: int = 1) -> None:
        self.gauge = gauge
        self.kind = kind
        self.oversample = oversample
        self.records: tp.List[DiagnosticsRecord] = []

    @property
    def last(self) -> tp.Optional[DiagnosticsRecord]:
        return self.records[-1] if self.records else None

    def update(self, s: MhdState) -> DiagnosticsRecord:
        rec = record(s, self.gauge, self.last, self.kind, self.oversample)
        self.records.append(rec)
        return rec

    def get(self) -> pd.DataFrame:
        return pd.DataFrame([r.as_dict() for r in self.records],
                            columns=DiagnosticsRecord.columns())

    def series(self, name: str) -> tp.List[tp.Tuple[float, float]]:
        return [(r.t, getattr(r, name)) for r in self.records]


def bkm_integral(series: tp.Sequence[tp.Tuple[float, float]]) -> float:
    """Composite trapezoid of `(t, integrand)` samples."""
    if len(series) < 2:
        return 0.0
    times, values = np.asarray(series, dtype=float).T
    if np.any(np.diff(times) <= 0):
        raise ValueError("Times must be strictly increasing.")
    return float(trapezoid(values, times))


@dataclass(frozen=True)
class PairPlan:
    """Which node pairs a sup over pairs visits: all of them when `window` is None,
    otherwise pairs at most `window` nodes apart plus `n_random` random pairs.
    """
    window: tp.Optional[int] = None
    n_random: int = 0
    seed: int = 0

    @classmethod
    def for_grid(cls, n: int, brute_force_max: int = 1024, window: int = 64,
                 n_random: int = 4096) -> "PairPlan":
        if n <= brute_force_max:
            return cls()
        return cls(window=window, n_random=n_random)


def pair_sup(values: np.ndarray, dx: float,
             denominator: tp.Callable[[np.ndarray], np.ndarray],
             plan: PairPlan = PairPlan()) -> float:
    """Max over node pairs `(i, j)` of `|values_i - values_j| / denominator(d_ij)`,
    `d_ij` the periodic distance. Pairs with a zero denominator are skipped.
    """
    n = len(values)
    last = n // 2 if plan.window is None else min(plan.window, n // 2)
    offsets = np.arange(1, last + 1)
    dists = np.minimum(offsets, n - offsets) * dx
    denominators = denominator(dists)
    best = 0.0
    for offset, denom in zip(offsets, denominators):
        if denom <= 0:
            continue
        diff = np.abs(values - np.roll(values, offset)).max()
        best = max(best, float(diff / denom))
    if plan.window is not None and plan.n_random > 0:
        rng = np.random.RandomState(plan.seed)
        i = rng.randint(0, n, size=plan.n_random)
        j = rng.randint(0, n, size=plan.n_random)
        offsets = np.mod(j - i, n)
        denominators = denominator(np.minimum(offsets, n - offsets) * dx)
        keep = (offsets != 0) & (denominators > 0)
        if keep.any():
            ratios = np.abs(values[i[keep]] - values[j[keep]]) / denominators[keep]
            best = max(best, float(ratios.max()))
    return best


def holder_seminorm(f: SpectralField, beta: float, window: tp.Optional[int] = None,
                    n_random: int = 0, seed: int = 0) -> float:
    """Max over node pairs of `|f(x_i) - f(x_j)| / d(x_i, x_j)^beta`, `d` periodic.

    With `window=None` every pair is visited, see `PairPlan` otherwise.
    """
    if not 0 < beta <= 1:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    plan = PairPlan(window=window, n_random=n_random, seed=seed)
    return pair_sup(f.values, f.grid.dx, lambda d: d ** beta, plan)


def holder_estimate(f: SpectralField, beta: float) -> float:
    """Exact `holder_seminorm` on small grids, windowed plus random pairs on large ones."""
    plan = PairPlan.for_grid(f.grid.n)
    return holder_seminorm(f, beta, plan.window, plan.n_random, plan.seed)


class MeanBalance(tp.NamedTuple):
    lhs_Omega: float
    rhs_Omega: float
    lhs_omega: float
    rhs_omega: float


def _integral(f: SpectralField) -> float:
    return float(f.grid.dx * f.values.sum())


def mean_balance_residual(s: MhdState, spec: ModelSpec) -> MeanBalance:
    """Time derivatives of the integrals of `Omega` and `omega` from the right-hand side,
    next to their closed forms `(1 - a) int omega H Omega` and `(1 - a) int Omega H omega`.
    """
    d_Omega, d_omega = evaluate_rhs(s, spec)
    factor = 1 - spec.a
    return MeanBalance(
        lhs_Omega=_integral(d_Omega),
        rhs_Omega=factor * _integral(s.omega * hilbert(s.Omega)),
        lhs_omega=_integral(d_omega),
        rhs_omega=factor * _integral(s.Omega * hilbert(s.omega)))


@dataclass
class GrowthFit:
    slope: float
    intercept: float
    max_abs_residual: float
    value_range: float

    @property
    def relative_residual(self) -> float:
        if self.value_range == 0:
            return 0.0
        return self.max_abs_residual / self.value_range


def linear_growth_fit(series: tp.Sequence[tp.Tuple[float, float]]) -> GrowthFit:
    """Least squares line through the running maxima of the values."""
    if len(series) < 3:
        raise ValueError(f"Need at least 3 samples, got {len(series)}.")
    times, values = np.asarray(series, dtype=float).T
    if np.any(np.diff(times) <= 0):
        raise ValueError("Times must be strictly increasing.")
    envelope = np.maximum.accumulate(values)
    slope, intercept = np.polyfit(times, envelope, 1)
    residual = np.abs(envelope - (slope * times + intercept)).max()
    return GrowthFit(slope=float(slope), intercept=float(intercept),
                     max_abs_residual=float(residual),
                     value_range=float(envelope.max() - envelope.min()))


def gronwall_constant(records: tp.Sequence[DiagnosticsRecord]) -> float:
    """Smallest `C >= 0` with `log(h1(t) / h1(0)) <= C bkm(t)` along the records,
    `h1` combining both fields.
    """
    if not records:
        return 0.0
    h1_start = records[0].h1_total
    best = 0.0
    for rec in records[1:]:
        if rec.bkm_integral <= 0 or h1_start == 0 or rec.h1_total == 0:
            continue
        best = max(best, math.log(rec.h1_total / h1_start) / rec.bkm_integral)
    return best

