# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Fourier collocation on the periodic interval [-pi, pi).

Conventions, used everywhere in vort1d:

- nodes are `x_j = -pi + 2 pi j / n`, `j = 0 ... n - 1`, with `n` even.
- coefficients are `f^(k) = 1/n sum_j f(x_j) exp(-i k x_j)` and the field is
  `sum_k f^(k) exp(i k x)`. Only `k = 0 ... n/2` are stored, negative modes follow
  from conjugate symmetry since all fields are real.
- the Nyquist mode `k = n/2` is dropped by `derivative`, `hilbert` and
  `velocity_from_vorticity`.
"""
from dataclasses import dataclass, field
import functools
import logging
import typing as tp

import numpy as np
from scipy import fft

from .errors import ConfigError, NumericalFailure
from .utils import wrap_angle

logger = logging.getLogger(__name__)

ZERO_MEAN = "zero-mean"
POINT_VALUE = "point-value"


@dataclass(frozen=True)
class TransformPlan:
    """Precomputed multipliers for one grid size. All arrays are read only."""
    k: np.ndarray          # wavenumbers 0 ... n/2, as floats
    shift: np.ndarray      # (-1)^k, accounts for the first node sitting at -pi
    ik: np.ndarray         # derivative multiplier, Nyquist zeroed
    hilbert: np.ndarray    # -i sgn(k), zero at k = 0 and at Nyquist
    antiderivative: np.ndarray  # -1 / |k|, zero at k = 0 and at Nyquist
    weights: np.ndarray    # 1 for k = 0 and n/2, 2 otherwise (real reconstruction)
    workers: tp.Optional[int] = None

    @classmethod
    def build(cls, n: int, workers: tp.Optional[int] = None) -> "TransformPlan":
        k = np.arange(n // 2 + 1, dtype=float)
        shift = np.where(np.arange(n // 2 + 1) % 2 == 0, 1.0, -1.0)
        ik = 1j * k
        ik[-1] = 0
        hilbert = -1j * np.sign(k)
        hilbert[-1] = 0
        antiderivative = np.zeros_like(k)
        antiderivative[1:-1] = -1 / k[1:-1]
        weights = np.full_like(k, 2.0)
        weights[0] = weights[-1] = 1.0
        arrays = dict(k=k, shift=shift, ik=ik, hilbert=hilbert,
                      antiderivative=antiderivative, weights=weights)
        for array in arrays.values():
            array.flags.writeable = False
        return cls(workers=workers, **arrays)


@dataclass(frozen=True)
class Grid:
    """Uniform collocation grid on [-pi, pi) with `n` points.

    The grid and its transform plan are immutable and can be shared between threads.
    """
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    plan: TransformPlan = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n % 2 != 0:
            raise ConfigError(f"grid size must be even, got {self.n}", key="n")
        if self.n < 4:
            raise ConfigError(f"grid size must be at least 4, got {self.n}", key="n")
        nodes = -np.pi + 2 * np.pi * np.arange(self.n) / self.n
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "plan", TransformPlan.build(self.n))

    @property
    def k_max(self) -> int:
        return self.n // 2

    @property
    def dx(self) -> float:
        return 2 * np.pi / self.n

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Nodal values to coefficients `k = 0 ... n/2`."""
        plan = self.plan
        return fft.rfft(values, workers=plan.workers) * (plan.shift / self.n)

    def backward(self, coeffs: np.ndarray) -> np.ndarray:
        """Coefficients `k = 0 ... n/2` to nodal values."""
        plan = self.plan
        return fft.irfft(coeffs * (plan.shift * self.n), n=self.n, workers=plan.workers)


@functools.lru_cache(maxsize=None)
def make_grid(n: int) -> Grid:
    """Returns the grid with `n` points, grids are cached and shared."""
    return Grid(n)


@dataclass(frozen=True)
class GaugeSpec:
    """How the free constant is fixed when recovering a velocity from a vorticity:
    zero mean, or zero value at `point`.
    """
    kind: str = ZERO_MEAN
    point: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (ZERO_MEAN, POINT_VALUE):
            raise ConfigError(f"invalid gauge {self.kind!r}, expected {ZERO_MEAN} or {POINT_VALUE}",
                              key="gauge.kind")
        if self.kind == POINT_VALUE and not -np.pi <= self.point < np.pi:
            raise ConfigError(f"gauge point {self.point} outside [-pi, pi)", key="gauge.point")


@dataclass(frozen=True)
class FilterSpec:
    """Exponential filter `sigma(eta) = exp(-alpha eta^order)`, `eta = |k| / k_max`."""
    enabled: bool = True
    alpha: float = 36.0
    order: int = 36

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ConfigError(f"filter alpha must be positive, got {self.alpha}",
                              key="filter.alpha")
        if int(self.order) != self.order or self.order <= 0 or self.order % 2 != 0:
            raise ConfigError(f"filter order must be a positive even integer, got {self.order}",
                              key="filter.order")

    def sigma(self, eta: np.ndarray) -> np.ndarray:
        return np.exp(-self.alpha * np.power(eta, self.order))


class SpectralField:
    """Real periodic field known by its nodal values and/or its coefficients.

    Whichever representation is missing is computed on first access and cached.
    Fields are treated as immutable: operations return new fields.
    A single field must not be mutated from several threads.
    """

    def __init__(self, grid: Grid, values: tp.Optional[np.ndarray] = None,
                 coeffs: tp.Optional[np.ndarray] = None) -> None:
        if (values is None) == (coeffs is None):
            raise ValueError("Provide exactly one of values or coeffs.")
        self.grid = grid
        self._values: tp.Optional[np.ndarray] = None
        self._coeffs: tp.Optional[np.ndarray] = None
        if values is not None:
            values = np.asarray(values, dtype=float)
            if values.shape != (grid.n,):
                raise ValueError(f"Expected {grid.n} nodal values, got shape {values.shape}.")
            self._values = values
        else:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != (grid.n // 2 + 1,):
                raise ValueError(f"Expected {grid.n // 2 + 1} coefficients, "
                                 f"got shape {coeffs.shape}.")
            self._coeffs = coeffs

    @classmethod
    def from_function(cls, grid: Grid,
                      func: tp.Callable[[np.ndarray], np.ndarray]) -> "SpectralField":
        return cls(grid, values=np.broadcast_to(func(grid.nodes), (grid.n,)).astype(float))

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, values=np.zeros(grid.n))

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            assert self._coeffs is not None
            self._values = self.grid.backward(self._coeffs)
        return self._values

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            assert self._values is not None
            self._coeffs = self.grid.forward(self._values)
        return self._coeffs

    def mean(self) -> float:
        return float(self.coeffs[0].real)

    def is_finite(self) -> bool:
        if self._values is not None:
            return bool(np.isfinite(self._values).all())
        return bool(np.isfinite(self.coeffs).all())

    def check_finite(self, quantity: str) -> "SpectralField":
        if not self.is_finite():
            raise NumericalFailure(quantity)
        return self

    def _combine(self, other: tp.Any, op: tp.Callable) -> "SpectralField":
        if isinstance(other, SpectralField):
            if other.grid != self.grid:
                raise ValueError(f"Grid mismatch: {self.grid} vs {other.grid}.")
            other = other.values
        return SpectralField(self.grid, values=op(self.values, other))

    def __add__(self, other: tp.Any) -> "SpectralField":
        return self._combine(other, np.add)

    def __radd__(self, other: tp.Any) -> "SpectralField":
        return self._combine(other, np.add)

    def __sub__(self, other: tp.Any) -> "SpectralField":
        return self._combine(other, np.subtract)

    def __rsub__(self, other: tp.Any) -> "SpectralField":
        return self._combine(other, lambda x, y: y - x)

    def __mul__(self, other: tp.Any) -> "SpectralField":
        return self._combine(other, np.multiply)

    def __rmul__(self, other: tp.Any) -> "SpectralField":
        return self._combine(other, np.multiply)

    def __truediv__(self, other: float) -> "SpectralField":
        return self._combine(other, np.divide)

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, values=-self.values)

    def __repr__(self) -> str:
        return f"SpectralField(n={self.grid.n})"


def _with_coeffs(f: SpectralField, coeffs: np.ndarray) -> SpectralField:
    return SpectralField(f.grid, coeffs=coeffs)


def hilbert(f: SpectralField) -> SpectralField:
    """Periodic Hilbert transform, multiplier `-i sgn(k)`."""
    return _with_coeffs(f, f.coeffs * f.grid.plan.hilbert)


def derivative(f: SpectralField) -> SpectralField:
    return _with_coeffs(f, f.coeffs * f.grid.plan.ik)


def velocity_from_vorticity(w: SpectralField, gauge: GaugeSpec = GaugeSpec()) -> SpectralField:
    """Solves `p_x = H w` for `p`, i.e. `p^(k) = -w^(k) / |k|`, with the constant
    fixed by `gauge`.
    """
    coeffs = w.coeffs * w.grid.plan.antiderivative
    if gauge.kind == POINT_VALUE:
        offset = interpolate(_with_coeffs(w, coeffs), gauge.point)
        coeffs[0] -= offset
    return _with_coeffs(w, coeffs)


def exp_filter(f: SpectralField, spec: FilterSpec) -> SpectralField:
    if not spec.enabled:
        return f
    grid = f.grid
    sigma = spec.sigma(grid.plan.k / grid.k_max)
    return _with_coeffs(f, f.coeffs * sigma)


@tp.overload
def interpolate(f: SpectralField, x: float) -> float:
    ...


@tp.overload  # noqa
def interpolate(f: SpectralField, x: np.ndarray) -> np.ndarray:  # noqa
    ...


def interpolate(f: SpectralField, x: tp.Any) -> tp.Any:  # noqa
    """Evaluates the trigonometric interpolant of `f` at `x` (scalar or array)."""
    return evaluate_coeffs(f.coeffs, f.grid, x)


def evaluate_coeffs(coeffs: np.ndarray, grid: Grid, x: tp.Any) -> tp.Any:
    """Same as `interpolate` but directly from a coefficient array, used when
    the coefficients are blended in time.
    """
    plan = grid.plan
    scalar = np.ndim(x) == 0
    xs = wrap_angle(np.atleast_1d(np.asarray(x, dtype=float)))
    phases = np.exp(1j * np.multiply.outer(xs, plan.k))
    out = (phases @ (plan.weights * coeffs)).real
    if scalar:
        return float(out[0])
    return out.reshape(np.shape(x))
