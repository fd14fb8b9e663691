# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

import math

import numpy as np
import pytest

from vort1d.characteristics import (
    ParticleSet, FrozenVelocity, VelocityHistory, RunHistory, ModulusSpec, X, Y, Q1,
    trace, transport_invariance_error, modulus_ratio, comparison_solution, holder_exponent,
    separation_ratio, calibration_corpus, calibrate_c0)
from vort1d.diagnostics import PairPlan
from vort1d.errors import SamplerRangeError
from vort1d.models import MhdState, ModelSpec, MHD1D, TRANSPORT
from vort1d.spectral import make_grid, SpectralField, velocity_from_vorticity
from vort1d.timestepper import StepControls, advance

FROZEN_C0 = 4.0


def _field(n, func):
    return SpectralField.from_function(make_grid(n), func)


def wrap(x):
    return np.mod(x + np.pi, 2 * np.pi) - np.pi


def _exact_sine_path(x0, t):
    return 2 * np.arctan(np.exp(-t) * np.tan(x0 / 2))


def _transport_run(n, t_end, omega=lambda x: np.sin(2 * x) + 2, cfl=0.5, every=1):
    grid = make_grid(n)
    s = MhdState(SpectralField.from_function(grid, lambda x: np.sin(x) + np.cos(4 * x) + 5),
                 SpectralField.from_function(grid, omega))
    spec = ModelSpec(TRANSPORT)
    history = RunHistory(spec, every)
    history.update(s)
    advance(s, spec, StepControls(t_end=t_end, cfl=cfl), observer=history)
    return history


def test_particle_set():
    particles = ParticleSet.uniform(8)
    assert particles.positions[0] == -np.pi
    moved = particles.moved_to(particles.seeds + 2 * np.pi + 0.1)
    np.testing.assert_allclose(moved.positions, wrap(particles.seeds + 0.1), atol=1e-14)
    np.testing.assert_allclose(moved.unwrapped, particles.seeds + 2 * np.pi + 0.1, atol=1e-13)
    assert moved.is_ordered()
    assert moved.inverse().label == Q1
    with pytest.raises(ValueError):
        ParticleSet(np.zeros(3), label="Z")


def test_particle_set_winding():
    particles = ParticleSet(np.array([3.0, 3.5, 4.0]))
    np.testing.assert_array_equal(particles.winding, [0, 1, 1])
    np.testing.assert_allclose(particles.unwrapped, particles.seeds, atol=1e-14)
    assert particles.is_ordered()
    assert ParticleSet(np.array([-4.0])).winding[0] == -1
    moved = ParticleSet.uniform(4).moved_to(ParticleSet.uniform(4).seeds - 0.1)
    inverse = moved.inverse()
    np.testing.assert_allclose(inverse.unwrapped, moved.unwrapped, atol=1e-14)
    np.testing.assert_array_equal(inverse.winding, moved.winding)


def test_trace_zero_velocity():
    particles = ParticleSet.uniform(16)
    moved = trace(FrozenVelocity(SpectralField.zeros(make_grid(16))), particles, 0, 1, 0.1)
    np.testing.assert_array_equal(moved.positions, particles.positions)


def test_trace_constant_velocity():
    particles = ParticleSet(np.array([0.0, 3.0, -2.0]))
    moved = trace(lambda t, x: np.full_like(x, 1.5), particles, 0, 2.0, 0.01)
    np.testing.assert_allclose(moved.positions, wrap(particles.seeds + 3.0), atol=1e-12)
    np.testing.assert_array_equal(moved.winding, [0, 1, 0])


def test_trace_sine_closed_form():
    velocity = FrozenVelocity(_field(32, lambda x: -np.sin(x)))
    particles = ParticleSet(np.array([np.pi / 2]))
    moved = trace(velocity, particles, 0, 1, 1e-3)
    assert moved.positions[0] == pytest.approx(2 * math.atan(math.exp(-1)), abs=1e-10)
    assert moved.positions[0] == pytest.approx(0.705027, abs=1e-6)


def test_trace_order():
    velocity = FrozenVelocity(_field(32, lambda x: -np.sin(x)))
    seeds = np.linspace(-3, 3, 7)
    exact = _exact_sine_path(seeds, 1.0)
    errors = []
    for dt in [0.1, 0.05, 0.025]:
        moved = trace(velocity, ParticleSet(seeds), 0, 1, dt)
        errors.append(np.abs(moved.positions - exact).max())
    for e1, e2 in zip(errors, errors[1:]):
        assert 3.7 <= math.log2(e1 / e2) <= 4.3


def test_velocity_history():
    grid = make_grid(16)
    a = SpectralField.from_function(grid, np.sin).coeffs
    b = SpectralField.from_function(grid, lambda x: 3 * np.sin(x)).coeffs
    history = VelocityHistory(grid, [1.0, 0.0], [b, a])
    assert history.t_start == 0 and history.t_stop == 1
    assert history(0.5, np.array([np.pi / 2]))[0] == pytest.approx(2, abs=1e-12)
    assert history(1.0, np.array([np.pi / 2]))[0] == pytest.approx(3, abs=1e-12)
    with pytest.raises(SamplerRangeError):
        history(1.5, np.array([0.0]))


def test_inverse_map():
    history = _transport_run(128, 0.5)
    particles = ParticleSet.uniform(64, X)
    moved = trace(history.velocity_for(X), particles, 0, 0.5, 0.005)
    back = trace(history.velocity_for(Q1), moved.inverse(), 0, 0.5, 0.005)
    np.testing.assert_allclose(back.unwrapped, particles.seeds, atol=1e-6)
    assert moved.is_ordered()


def test_transport_invariance():
    history = _transport_run(256, 0.5, cfl=0.25)
    coarse = transport_invariance_error(history, 64)
    assert coarse <= 1e-4
    finer = transport_invariance_error(_transport_run(256, 0.5, cfl=0.125), 64)
    assert finer < coarse


def test_run_history_stride():
    full = _transport_run(128, 0.5)
    strided = _transport_run(128, 0.5, every=10)
    strided.complete()
    assert len(strided.times) < len(full.times) // 5
    assert strided.times[0] == 0 and strided.times[-1] == full.times[-1] == 0.5
    error = transport_invariance_error(strided, 64)
    assert error <= 1e-3
    with pytest.raises(ValueError):
        RunHistory(ModelSpec(TRANSPORT), every=0)


def test_transport_invariance_degenerate():
    history = _transport_run(64, 0.5, omega=lambda x: 0 * x)
    assert transport_invariance_error(history, 32) <= 1e-10
    history = _transport_run(64, 0.0)
    assert transport_invariance_error(history, 32) == 0
    with pytest.raises(ValueError):
        transport_invariance_error(RunHistory(ModelSpec(MHD1D)), 8)


def test_modulus():
    spec = ModulusSpec(c0=2.0, amplitude=1.0)
    s = np.array([0.0, 0.5, 1.0, 2.0])
    expected = [0, 2 * 0.5 * (1 - math.log(0.5)), 2, 2]
    np.testing.assert_allclose(spec.modulus(s), expected)
    assert spec.modulus(np.array([1 - 1e-12]))[0] == pytest.approx(2)
    assert modulus_ratio(SpectralField.zeros(make_grid(32)), spec) == 0
    omega = _field(512, np.sin)
    ratio = modulus_ratio(velocity_from_vorticity(omega), spec)
    assert 0 < ratio <= 1 + 1e-12


def test_comparison_solution():
    assert comparison_solution(0.3, 2.0, 0.0) == pytest.approx(0.3)
    rate = 1.5
    for s0 in [0.05, 0.3, 0.8]:
        spec = ModulusSpec(c0=rate, amplitude=1.0)
        for t in [0.1, 0.5, 1.0]:
            h = 1e-6
            slope = (comparison_solution(s0, rate, t + h)
                     - comparison_solution(s0, rate, t - h)) / (2 * h)
            expected = spec.modulus(np.array([comparison_solution(s0, rate, t)]))[0]
            assert slope == pytest.approx(expected, abs=1e-6)
    # continuity of the branch switch as s0 goes to 1
    assert comparison_solution(1 - 1e-9, rate, 0.5) == pytest.approx(1 + rate * 0.5, abs=1e-6)
    with pytest.raises(ValueError):
        comparison_solution(1.0, rate, 0.5)


def test_holder_exponent():
    assert holder_exponent(2.0, 0.0) == 1
    assert holder_exponent(2.0, 1.0) == pytest.approx(math.exp(-2))


def test_calibration():
    corpus = calibration_corpus(256)
    assert len(corpus) == 23
    c0 = calibrate_c0(corpus)
    assert 1 <= c0 <= FROZEN_C0
    for name, vorticity in corpus:
        amplitude = np.abs(vorticity.values).max()
        ratio = modulus_ratio(velocity_from_vorticity(vorticity), ModulusSpec(c0, amplitude))
        assert ratio <= 1 + 1e-12, name


def test_modulus_along_run():
    grid = make_grid(256)
    s = MhdState(SpectralField.from_function(grid, lambda x: np.sin(x) + np.cos(4 * x) + 5),
                 SpectralField.from_function(grid, lambda x: np.sin(2 * x) + 2))
    spec = ModelSpec(MHD1D, a=1)
    for t_end in [0.5, 1.0]:
        s = advance(s, spec, StepControls(t_end=t_end)).state
        for vorticity in [s.Omega, s.omega]:
            modulus = ModulusSpec(FROZEN_C0, np.abs(vorticity.values).max())
            assert modulus_ratio(velocity_from_vorticity(vorticity), modulus) <= 1


def test_separation_bound():
    history = _transport_run(128, 1.0)
    for label, vorticity in [(X, history.first.Omega), (Y, history.first.omega)]:
        rate = FROZEN_C0 * np.abs(vorticity.values).max()
        particles = ParticleSet.uniform(64, label)
        for t in [0.02, 1.0]:
            moved = trace(history.velocity_for(label), particles, 0, t, 0.005)
            assert separation_ratio(moved, rate, t) <= 1 + 1e-3
        assert separation_ratio(particles, rate, 0.0) <= 1 + 1e-12
    # frozen p = -sin x comes from Omega = sin x
    velocity = FrozenVelocity(_field(64, lambda x: -np.sin(x)))
    particles = ParticleSet.uniform(128, X)
    moved = trace(velocity, particles, 0, 0.2, 0.01)
    assert separation_ratio(moved, FROZEN_C0, 0.2) <= 1


def test_pair_plan():
    plan = PairPlan.for_grid(4096)
    assert plan.window == 64
    assert PairPlan.for_grid(512).window is None
