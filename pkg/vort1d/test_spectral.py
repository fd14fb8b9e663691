# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

import math

import numpy as np
import pytest

from vort1d.errors import ConfigError, NumericalFailure
from vort1d.spectral import (
    make_grid, SpectralField, GaugeSpec, FilterSpec, POINT_VALUE,
    hilbert, derivative, velocity_from_vorticity, exp_filter, interpolate)


def _field(n, func):
    return SpectralField.from_function(make_grid(n), func)


def _band_limited(n, bandwidth, seed, zero_mean=True):
    rng = np.random.RandomState(seed)
    grid = make_grid(n)
    coeffs = np.zeros(n // 2 + 1, dtype=complex)
    coeffs[1:bandwidth + 1] = rng.randn(bandwidth) + 1j * rng.randn(bandwidth)
    coeffs[1:bandwidth + 1] /= np.arange(1, bandwidth + 1) ** 2
    if not zero_mean:
        coeffs[0] = rng.randn()
    return SpectralField(grid, coeffs=coeffs)


def test_make_grid():
    grid = make_grid(8)
    np.testing.assert_allclose(grid.nodes, -np.pi + np.pi / 4 * np.arange(8), atol=1e-14)
    assert grid.nodes[0] == -np.pi
    assert grid.k_max == 4
    assert np.all(np.diff(grid.nodes) > 0)
    assert make_grid(8) is grid
    with pytest.raises(ConfigError, match="grid size must be even"):
        make_grid(7)
    with pytest.raises(ConfigError):
        make_grid(2)


def test_round_trip():
    f = _field(64, lambda x: np.exp(np.sin(x)) + 3)
    g = SpectralField(f.grid, coeffs=f.coeffs.copy())
    np.testing.assert_allclose(g.values, f.values, rtol=1e-12, atol=1e-12)
    assert f.mean() == pytest.approx(3 + np.i0(1), abs=1e-12)


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.7])
def test_hilbert_trig(theta):
    n = 256
    for k in range(1, n // 4 + 1):
        s = hilbert(_field(n, lambda x: np.sin(k * x + theta)))
        c = hilbert(_field(n, lambda x: np.cos(k * x + theta)))
        x = make_grid(n).nodes
        assert np.abs(s.values + np.cos(k * x + theta)).max() <= 1e-12, k
        assert np.abs(c.values - np.sin(k * x + theta)).max() <= 1e-12, k


def test_hilbert_constant():
    grid = make_grid(16)
    coeffs = np.zeros(9, dtype=complex)
    coeffs[0] = 5
    h = hilbert(SpectralField(grid, coeffs=coeffs))
    assert np.all(h.values == 0)
    h = hilbert(_field(16, lambda x: 5 + 0 * x))
    assert np.abs(h.values).max() < 1e-14


def test_hilbert_involution_and_isometry():
    for seed in range(5):
        f = _band_limited(128, 20, seed, zero_mean=False)
        hh = hilbert(hilbert(f))
        np.testing.assert_allclose(hh.values, -(f.values - f.mean()), atol=1e-12)
        u = _band_limited(128, 30, seed + 10)
        v = _band_limited(128, 30, seed + 20)
        inner = np.dot(u.values, v.values)
        h_inner = np.dot(hilbert(u).values, hilbert(v).values)
        assert abs(inner - h_inner) <= 1e-10 * max(1, abs(inner))


def test_hilbert_product_identity():
    n = 256
    for seed in range(5):
        # products of the top modes must stay below Nyquist
        v = _band_limited(n, n // 4 - 1, seed)
        hv = hilbert(v)
        lhs = hilbert(v * hv)
        rhs = (hv * hv - v * v) / 2
        assert np.abs(lhs.values - rhs.values).max() <= 1e-8


def test_derivative():
    x = make_grid(32).nodes
    np.testing.assert_allclose(derivative(_field(32, np.sin)).values, np.cos(x), atol=1e-12)
    np.testing.assert_allclose(derivative(_field(32, lambda x: np.cos(4 * x))).values,
                               -4 * np.sin(4 * x), atol=1e-12)
    assert np.abs(derivative(_field(32, lambda x: 2 + 0 * x)).values).max() == 0
    # Nyquist is dropped
    assert derivative(_field(32, lambda x: np.cos(16 * x))).coeffs[-1] == 0


def test_spectral_accuracy():
    n = 64
    x = make_grid(n).nodes
    d = derivative(_field(n, lambda x: np.exp(np.sin(x))))
    assert np.abs(d.values - np.cos(x) * np.exp(np.sin(x))).max() < 1e-10


def test_velocity_from_vorticity():
    n = 64
    x = make_grid(n).nodes
    p = velocity_from_vorticity(_field(n, np.sin))
    np.testing.assert_allclose(p.values, -np.sin(x), atol=1e-13)
    p = velocity_from_vorticity(_field(n, lambda x: np.cos(2 * x)))
    np.testing.assert_allclose(p.values, -np.cos(2 * x) / 2, atol=1e-13)
    p = velocity_from_vorticity(_field(n, np.sin), GaugeSpec(POINT_VALUE, 0.0))
    np.testing.assert_allclose(p.values, -np.sin(x), atol=1e-13)


def test_velocity_point_gauge():
    w = _field(64, lambda x: np.cos(x) + 0.5 * np.sin(3 * x) + 1)
    gauge = GaugeSpec(POINT_VALUE, 0.7)
    p = velocity_from_vorticity(w, gauge)
    assert abs(interpolate(p, 0.7)) < 1e-13
    p0 = velocity_from_vorticity(w)
    shift = p.values - p0.values
    np.testing.assert_allclose(shift, shift[0], atol=1e-13)


@pytest.mark.parametrize("gauge", [GaugeSpec(), GaugeSpec(POINT_VALUE, -1.2)])
def test_velocity_derivative_is_hilbert(gauge):
    w = _band_limited(128, 40, 3, zero_mean=False)
    p = velocity_from_vorticity(w, gauge)
    np.testing.assert_allclose(derivative(p).values, hilbert(w).values, atol=1e-10)


def test_exp_filter():
    grid = make_grid(32)
    coeffs = np.ones(17, dtype=complex)
    f = SpectralField(grid, coeffs=coeffs)
    g = exp_filter(f, FilterSpec())
    assert g.coeffs[0] == 1
    assert g.coeffs[-1].real == pytest.approx(math.exp(-36))
    assert g.coeffs[-1].real < 2.5e-16
    assert exp_filter(f, FilterSpec(enabled=False)) is f
    spec = FilterSpec(alpha=2.0, order=4)
    assert spec.sigma(np.array([0.0]))[0] == 1
    assert spec.sigma(np.array([1.0]))[0] == pytest.approx(math.exp(-2))
    with pytest.raises(ConfigError):
        FilterSpec(order=3)
    with pytest.raises(ConfigError):
        FilterSpec(alpha=0)


def test_interpolate():
    f = _field(32, lambda x: np.sin(x) + 0.3 * np.cos(5 * x))
    for j in [0, 3, 17, 31]:
        assert interpolate(f, f.grid.nodes[j]) == pytest.approx(f.values[j], abs=1e-12)
    g = _field(32, np.sin)
    assert interpolate(g, 0.5) == pytest.approx(0.479425538604203, abs=1e-12)
    assert interpolate(f, 1.3) == pytest.approx(interpolate(f, 1.3 + 2 * np.pi), abs=1e-12)
    xs = np.array([[0.1, 2.0], [-3.0, 7.0]])
    out = interpolate(f, xs)
    assert out.shape == (2, 2)
    np.testing.assert_allclose(out, np.sin(xs) + 0.3 * np.cos(5 * xs), atol=1e-12)


def test_gauge_validation():
    with pytest.raises(ConfigError):
        GaugeSpec("banana")
    with pytest.raises(ConfigError):
        GaugeSpec(POINT_VALUE, 4.0)


def test_check_finite():
    f = _field(8, np.sin)
    assert f.check_finite("Omega") is f
    bad = SpectralField(f.grid, values=np.full(8, np.nan))
    with pytest.raises(NumericalFailure, match="Omega"):
        bad.check_finite("Omega")
