# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Particle paths of the Elsasser velocities and the checks built on them.

`X` particles follow `p`, `Y` particles follow `m`. Under the pure transport model
`omega` is constant along `X` and `Omega` along `Y`. `Q1` and `Q2` are the inverse maps,
obtained by integrating the same paths backward in time.
"""
from dataclasses import dataclass, field
import logging
import math
import typing as tp

import numpy as np

from .diagnostics import PairPlan, pair_sup
from .errors import SamplerRangeError
from .models import MhdState, ModelSpec, TRANSPORT
from .spectral import (
    Grid, SpectralField, make_grid, evaluate_coeffs, interpolate, velocity_from_vorticity)
from .utils import wrap_angle, periodic_distance

logger = logging.getLogger(__name__)

X = "X"
Y = "Y"
Q1 = "Q1"
Q2 = "Q2"
LABELS = (X, Y, Q1, Q2)
_BACKWARD_LABELS = (Q1, Q2)

Sampler = tp.Callable[[float, np.ndarray], np.ndarray]


def _turns(x: np.ndarray) -> np.ndarray:
    """Number of turns of `x` away from [-pi, pi)."""
    return np.floor((np.asarray(x, dtype=float) + np.pi) / (2 * np.pi)).astype(int)


@dataclass
class ParticleSet:
    """Particles with their starting points `seeds`. `positions` stay in [-pi, pi),
    the number of turns around the circle is kept in `winding`.
    """
    seeds: np.ndarray
    label: str = X
    positions: np.ndarray = field(default=None)  # type: ignore
    winding: np.ndarray = field(default=None)  # type: ignore

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise ValueError(f"Unknown label {self.label!r}, expected one of {LABELS}.")
        self.seeds = np.asarray(self.seeds, dtype=float)
        if self.positions is None:
            self.positions = wrap_angle(self.seeds)
            if self.winding is None:
                self.winding = _turns(self.seeds)
        if self.winding is None:
            self.winding = np.zeros(len(self.seeds), dtype=int)
        if len(self.positions) != len(self.seeds):
            raise ValueError("seeds and positions must have the same length.")

    @classmethod
    def uniform(cls, count: int, label: str = X) -> "ParticleSet":
        return cls(-np.pi + 2 * np.pi * np.arange(count) / count, label)

    @property
    def unwrapped(self) -> np.ndarray:
        return self.positions + 2 * np.pi * self.winding

    @property
    def backward(self) -> bool:
        return self.label in _BACKWARD_LABELS

    def moved_to(self, unwrapped: np.ndarray) -> "ParticleSet":
        return ParticleSet(self.seeds, self.label, wrap_angle(unwrapped), _turns(unwrapped))

    def inverse(self) -> "ParticleSet":
        """Particles seeded at the current positions, labelled with the inverse map."""
        label = {X: Q1, Y: Q2, Q1: X, Q2: Y}[self.label]
        return ParticleSet(self.unwrapped.copy(), label)

    def is_ordered(self, tol: float = 1e-8) -> bool:
        """True when particles did not cross: in the order of their seeds, unwrapped
        positions are non-decreasing and span less than one turn.
        """
        order = np.argsort(self.seeds, kind="stable")
        path = self.unwrapped[order]
        if len(path) < 2:
            return True
        return bool(np.all(np.diff(path) >= -tol) and path[-1] - path[0] <= 2 * np.pi + tol)


class FrozenVelocity:
    """Time independent velocity, trigonometric interpolation of `field`."""

    def __init__(self, field: SpectralField) -> None:
        self.field = field

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return interpolate(self.field, x)


class VelocityHistory:
    """Velocity known at a sequence of times, linear in time between them and
    trigonometric in space.
    """

    def __init__(self, grid: Grid, times: tp.Sequence[float],
                 coeffs: tp.Sequence[np.ndarray]) -> None:
        if len(times) != len(coeffs) or not times:
            raise ValueError("Need as many coefficient arrays as times, at least one.")
        times_arr = np.asarray(times, dtype=float)
        order = np.argsort(times_arr, kind="stable")
        self.grid = grid
        self.times = times_arr[order]
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Times must be distinct.")
        self.coeffs = np.stack([coeffs[i] for i in order])
        self._tolerance = 1e-12 * max(1.0, float(np.abs(self.times).max()))

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_stop(self) -> float:
        return float(self.times[-1])

    def coeffs_at(self, t: float) -> np.ndarray:
        if not self.t_start - self._tolerance <= t <= self.t_stop + self._tolerance:
            raise SamplerRangeError(
                f"Velocity requested at t={t}, known on [{self.t_start}, {self.t_stop}].")
        if len(self.times) == 1:
            return self.coeffs[0]
        index = int(np.clip(np.searchsorted(self.times, t) - 1, 0, len(self.times) - 2))
        t0, t1 = self.times[index], self.times[index + 1]
        weight = min(max((t - t0) / (t1 - t0), 0.0), 1.0)
        return (1 - weight) * self.coeffs[index] + weight * self.coeffs[index + 1]

    def field_at(self, t: float) -> SpectralField:
        return SpectralField(self.grid, coeffs=self.coeffs_at(t))

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return evaluate_coeffs(self.coeffs_at(t), self.grid, x)


class RunHistory:
    """Observer for `advance` keeping the velocities `p, m` of one state out of `every`,
    plus the first and last states.
    """

    def __init__(self, spec: ModelSpec, every: int = 1) -> None:
        if every < 1:
            raise ValueError(f"every must be at least 1, got {every}")
        self.spec = spec
        self.every = every
        self._count = 0
        self.times: tp.List[float] = []
        self._p: tp.List[np.ndarray] = []
        self._m: tp.List[np.ndarray] = []
        self.first: tp.Optional[MhdState] = None
        self.last: tp.Optional[MhdState] = None

    def update(self, s: MhdState) -> None:
        if self.first is None:
            self.first = s
        self.last = s
        self._count += 1
        if (self._count - 1) % self.every == 0:
            self._store(s)

    def _store(self, s: MhdState) -> None:
        self.times.append(s.time)
        self._p.append(velocity_from_vorticity(s.Omega, self.spec.gauge).coeffs)
        self._m.append(velocity_from_vorticity(s.omega, self.spec.gauge).coeffs)

    def __call__(self, s: MhdState) -> None:
        self.update(s)

    def complete(self) -> None:
        """Stores the last state if the stride skipped it."""
        if self.last is not None and self.times[-1] != self.last.time:
            self._store(self.last)

    @property
    def grid(self) -> Grid:
        assert self.first is not None, "empty history"
        return self.first.grid

    def velocity(self, name: str) -> VelocityHistory:
        if name not in ("p", "m"):
            raise ValueError(f"Unknown velocity {name!r}.")
        self.complete()
        return VelocityHistory(self.grid, self.times, self._p if name == "p" else self._m)

    def velocity_for(self, label: str) -> VelocityHistory:
        """`p` drives `X` and `Q1`, `m` drives `Y` and `Q2`."""
        return self.velocity("p" if label in (X, Q1) else "m")


def trace(velocity: Sampler, particles: ParticleSet, t0: float, t1: float,
          dt: float) -> ParticleSet:
    """Integrates `dx/dt = velocity(t, x)` with classical RK4 between `t0` and `t1`.

    `X`/`Y` sets start at `t0` and end at `t1`. `Q1`/`Q2` sets start at `t1` and are
    integrated back to `t0`. The number of steps is `ceil(|t1 - t0| / dt)` so that the
    last one lands exactly.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    span = t1 - t0
    x = particles.unwrapped.astype(float)
    if span == 0:
        return particles.moved_to(x)
    steps = max(1, int(math.ceil(abs(span) / dt - 1e-9)))
    h = span / steps
    t = t0
    if particles.backward:
        h, t = -h, t1
    for _ in range(steps):
        k1 = velocity(t, x)
        k2 = velocity(t + h / 2, x + h / 2 * k1)
        k3 = velocity(t + h / 2, x + h / 2 * k2)
        k4 = velocity(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t + h
    return particles.moved_to(x)


def transport_invariance_error(run: RunHistory, n_particles: int,
                               dt: tp.Optional[float] = None) -> float:
    """Max over particles of `|omega(t, X_t(x)) - omega_0(x)|` and
    `|Omega(t, Y_t(x)) - Omega_0(x)|`, for a run of the transport model.

    `dt` defaults to the median step of the run, recovered from the stored stride.
    """
    if run.spec.kind != TRANSPORT:
        raise ValueError(f"Transport invariance needs a {TRANSPORT} run, got {run.spec.kind}.")
    first, last = run.first, run.last
    if first is None or last is None:
        raise ValueError("Empty run history.")
    if first.time > last.time:
        first, last = last, first
    if last.time == first.time:
        return 0.0
    run.complete()
    if dt is None:
        dt = float(np.median(np.diff(sorted(run.times)))) / run.every
    errors = []
    for label, field_name in [(X, "omega"), (Y, "Omega")]:
        particles = ParticleSet.uniform(n_particles, label)
        moved = trace(run.velocity_for(label), particles, first.time, last.time, dt)
        start = interpolate(getattr(first, field_name), particles.seeds)
        end = interpolate(getattr(last, field_name), moved.positions)
        errors.append(float(np.abs(end - start).max()))
    return max(errors)


@dataclass(frozen=True)
class ModulusSpec:
    """Log-Lipschitz modulus `F(s) = c0 amplitude s (1 - log s)` for `s <= 1`,
    `c0 amplitude` beyond.
    """
    c0: float
    amplitude: float

    def __post_init__(self) -> None:
        if not self.c0 > 0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if not self.amplitude >= 0:
            raise ValueError(f"amplitude must be non negative, got {self.amplitude}")

    @property
    def rate(self) -> float:
        return self.c0 * self.amplitude

    def modulus(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, self.rate)
        small = (s > 0) & (s <= 1)
        out[small] = self.rate * s[small] * (1 - np.log(s[small]))
        out[s <= 0] = 0
        return out


def modulus_ratio(velocity_field: SpectralField, spec: ModulusSpec,
                  pairs: PairPlan = PairPlan()) -> float:
    """Sup over node pairs of `|v(x) - v(y)| / F(d(x, y))`. A value at most 1 certifies
    the modulus with the given `c0`.
    """
    grid = velocity_field.grid
    return pair_sup(velocity_field.values, grid.dx, spec.modulus, pairs)


def comparison_solution(s0: float, rate: float, t: float) -> float:
    """Solution of `z' = F(z)`, `z(0) = s0`, with `F(z) = rate z (1 - log z)` below 1
    and `rate` above.

    With `beta = exp(-rate t)`, `z = s0^beta e^(1 - beta)` until `z` reaches 1 at
    `t0 = log(1 - log s0) / rate`, then `z = 1 + rate (t - t0)`.
    """
    if not 0 < s0 < 1:
        raise ValueError(f"s0 must be in (0, 1), got {s0}")
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if t < 0:
        raise ValueError(f"t must be non negative, got {t}")
    t0 = math.log(1 - math.log(s0)) / rate
    if t >= t0:
        return 1 + rate * (t - t0)
    beta = holder_exponent(rate, t)
    return min(1.0, s0 ** beta * math.exp(1 - beta))


def holder_exponent(rate: float, t: float) -> float:
    """Time decaying Hölder exponent `exp(-rate t)` of the characteristic maps."""
    return math.exp(-rate * t)


def separation_ratio(particles: ParticleSet, rate: float, t: float) -> float:
    """Max over pairs of traced particles, initially closer than 1, of their distance
    divided by `comparison_solution(initial distance, rate, t)`.
    """
    seeds = particles.seeds
    i, j = np.triu_indices(len(seeds), k=1)
    start = periodic_distance(seeds[i], seeds[j])
    keep = (start > 0) & (start < 1)
    if not keep.any():
        return 0.0
    start = start[keep]
    now = periodic_distance(particles.positions[i[keep]], particles.positions[j[keep]])
    bound = np.array([comparison_solution(s, rate, t) for s in start])
    return float((now / bound).max())


def calibration_corpus(n: int = 256, degree: int = 8,
                       seed: int = 0) -> tp.List[tp.Tuple[str, SpectralField]]:
    """Vorticities used to measure c0: single modes, a few mixtures and random
    trigonometric polynomials, all of degree at most `degree`.
    """
    grid = make_grid(n)
    x = grid.nodes
    corpus: tp.List[tp.Tuple[str, np.ndarray]] = []
    for k in range(1, degree + 1):
        corpus.append((f"sin({k}x)", np.sin(k * x)))
        corpus.append((f"cos({k}x)", np.cos(k * x)))
    corpus.append(("sin(x)+cos(4x)", np.sin(x) + np.cos(4 * x)))
    corpus.append(("sin(2x)+0.5cos(3x)", np.sin(2 * x) + 0.5 * np.cos(3 * x)))
    corpus.append(("sin(x)+0.1sin(2x)", np.sin(x) + 0.1 * np.sin(2 * x)))
    rng = np.random.RandomState(seed)
    for index in range(4):
        values = np.zeros(n)
        for k in range(1, degree + 1):
            values += (rng.randn() * np.sin(k * x) + rng.randn() * np.cos(k * x)) / k
        corpus.append((f"random{index}", values))
    return [(name, SpectralField(grid, values=values)) for name, values in corpus]


def calibrate_c0(corpus: tp.Sequence[tp.Tuple[str, SpectralField]],
                 pairs: PairPlan = PairPlan()) -> float:
    """Smallest c0 for which `modulus_ratio <= 1` on the whole corpus."""
    best = 0.0
    for name, vorticity in corpus:
        amplitude = float(np.abs(vorticity.values).max())
        if amplitude == 0:
            continue
        ratio = modulus_ratio(velocity_from_vorticity(vorticity),
                              ModulusSpec(c0=1.0, amplitude=amplitude), pairs)
        logger.debug("calibration %s: ratio %.4f", name, ratio)
        best = max(best, ratio)
    return best
