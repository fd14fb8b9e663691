# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

import math

import numpy as np
import pytest

from vort1d.diagnostics import (
    field_norms, sup_norm, record, DiagnosticsRecord, DiagnosticsSeries, bkm_integral,
    holder_seminorm, holder_estimate, mean_balance_residual, linear_growth_fit,
    gronwall_constant)
from vort1d.models import MhdState, ModelSpec, MHD1D, OSW
from vort1d.spectral import make_grid, SpectralField
from vort1d.timestepper import StepControls, advance


def _field(n, func):
    return SpectralField.from_function(make_grid(n), func)


def _state(n, Omega, omega):
    return MhdState(_field(n, Omega), _field(n, omega))


def _fig2(n):
    return _state(n, lambda x: np.sin(x) + np.cos(4 * x) + 5, lambda x: np.sin(2 * x) + 2)


def _random_state(n, bandwidth, seed):
    rng = np.random.RandomState(seed)
    grid = make_grid(n)
    out = []
    for _ in range(2):
        coeffs = np.zeros(n // 2 + 1, dtype=complex)
        coeffs[1:bandwidth + 1] = rng.randn(bandwidth) + 1j * rng.randn(bandwidth)
        coeffs[1:bandwidth + 1] /= np.arange(2, bandwidth + 2)
        coeffs[0] = rng.randn()
        out.append(SpectralField(grid, coeffs=coeffs))
    return MhdState(*out)


def test_field_norms():
    norms = field_norms(_field(64, np.sin))
    assert norms.l2 == pytest.approx(math.sqrt(math.pi), abs=1e-12)
    assert norms.linf == pytest.approx(1, abs=1e-12)
    assert norms.h1 == pytest.approx(math.sqrt(math.pi), abs=1e-12)
    norms = field_norms(_field(64, lambda x: 3 + 0 * x))
    assert norms.l2 == pytest.approx(3 * math.sqrt(2 * math.pi), abs=1e-12)
    assert norms.h1 == 0
    assert norms.h2 == 0
    norms = field_norms(_fig2(64).Omega)
    assert norms.h1 == pytest.approx(math.sqrt(17 * math.pi), abs=1e-10)


def test_parseval():
    s = _random_state(128, 40, 0)
    f = s.Omega
    nodal = math.sqrt(f.grid.dx * np.sum(f.values ** 2))
    assert field_norms(f).l2 == pytest.approx(nodal, rel=1e-10)


def test_sup_norm_oversample():
    f = _field(16, lambda x: np.sin(7 * x + 0.3))
    assert sup_norm(f) < 1
    assert sup_norm(f, 4) == pytest.approx(1, abs=1e-2)
    assert sup_norm(f, 4) >= sup_norm(f)
    g = _field(8, lambda x: np.cos(4 * x))
    assert sup_norm(g, 2) == pytest.approx(1, abs=1e-12)


def test_record():
    rec = record(_state(64, np.sin, lambda x: 0 * x))
    assert rec.linf_HOmega == pytest.approx(1, abs=1e-12)
    assert rec.linf_Homega == 0
    assert rec.linf_ux == pytest.approx(0.5, abs=1e-12)
    assert rec.linf_Bx == pytest.approx(0.5, abs=1e-12)
    assert rec.bkm_integral == 0
    rec = record(_fig2(64))
    assert rec.linf_Homega == pytest.approx(1, abs=1e-12)
    assert rec.mean_Omega == pytest.approx(5, abs=1e-12)
    assert rec.mean_omega == pytest.approx(2, abs=1e-12)
    assert rec.is_finite()


def test_record_osw():
    grid = make_grid(32)
    s = MhdState(SpectralField.zeros(grid), SpectralField.from_function(grid, np.cos))
    rec = record(s, kind=OSW)
    assert rec.linf_HOmega == 0
    assert rec.linf_Homega == pytest.approx(1, abs=1e-12)
    assert rec.linf_ux == pytest.approx(1, abs=1e-12)
    assert rec.linf_Bx == 0


def test_columns():
    expected = ("t,l2_Omega,l2_omega,h1_Omega,h1_omega,h2_Omega,h2_omega,linf_HOmega,"
                "linf_Homega,linf_ux,linf_Bx,mean_Omega,mean_omega,bkm_integral")
    assert ",".join(DiagnosticsRecord.columns()) == expected


def test_bkm_integral():
    assert bkm_integral([(0, 2), (1, 2), (3, 2)]) == pytest.approx(6)
    assert bkm_integral([(t, t) for t in [0, 0.1, 0.5, 0.55, 1.0]]) == pytest.approx(0.5)
    assert bkm_integral([(0.3, 5.0)]) == 0
    with pytest.raises(ValueError):
        bkm_integral([(0, 1), (1, 1), (0.5, 1)])


def test_series_along_run():
    s = _fig2(64)
    series = DiagnosticsSeries()
    series.update(s)
    advance(s, ModelSpec(MHD1D, a=1), StepControls(t_end=0.5), observer=series.update)
    records = series.records
    bkm = [r.bkm_integral for r in records]
    assert all(b2 >= b1 for b1, b2 in zip(bkm, bkm[1:]))
    assert bkm[-1] == pytest.approx(bkm_integral(series.series("integrand")), rel=1e-12)
    frame = series.get()
    assert list(frame.columns) == DiagnosticsRecord.columns()
    assert len(frame) == len(records)
    constant = gronwall_constant(records)
    assert math.isfinite(constant) and constant >= 0
    start = records[0].h1_total
    for rec in records:
        assert math.log(rec.h1_total / start) <= constant * rec.bkm_integral + 1e-12


def test_holder():
    assert holder_seminorm(_field(64, lambda x: 2 + 0 * x), 0.5) == 0
    f = _field(256, np.sin)
    value = holder_seminorm(f, 1.0)
    assert abs(value - 1) <= 1 / 256
    assert holder_seminorm(2 * f, 0.7) == 2 * holder_seminorm(f, 0.7)
    g = _field(512, lambda x: np.sin(x) + 0.3 * np.cos(5 * x))
    exact = holder_seminorm(g, 1.0)
    assert holder_seminorm(g, 1.0, window=64, n_random=2048) == pytest.approx(exact, rel=1e-12)
    exact = holder_seminorm(g, 0.3)
    windowed = holder_seminorm(g, 0.3, window=64, n_random=2048)
    assert 0.8 * exact <= windowed <= exact
    assert holder_estimate(g, 0.5) == holder_seminorm(g, 0.5)
    with pytest.raises(ValueError):
        holder_seminorm(g, 0.0)


@pytest.mark.parametrize("a", [-1.0, 0.0, 1.0, 2.0])
def test_mean_balance(a):
    for seed in range(20):
        s = _random_state(64, 12, seed)
        balance = mean_balance_residual(s, ModelSpec(MHD1D, a=a))
        assert abs(balance.lhs_Omega - balance.rhs_Omega) <= 1e-10 * (1 + abs(balance.rhs_Omega))
        assert abs(balance.lhs_omega - balance.rhs_omega) <= 1e-10 * (1 + abs(balance.rhs_omega))
        if a == 1:
            assert abs(balance.lhs_Omega) <= 1e-12
            assert abs(balance.lhs_omega) <= 1e-12


def test_mean_balance_values():
    s = _state(64, np.sin, np.cos)
    balance = mean_balance_residual(s, ModelSpec(MHD1D, a=0))
    assert balance.rhs_Omega == pytest.approx(-math.pi, abs=1e-12)
    s = _state(64, np.sin, lambda x: 0 * x)
    for value in mean_balance_residual(s, ModelSpec(MHD1D, a=0.5)):
        assert abs(value) < 1e-14


def test_linear_growth_fit():
    fit = linear_growth_fit([(t, 2 * t + 1) for t in np.linspace(0, 3, 7)])
    assert fit.slope == pytest.approx(2)
    assert fit.intercept == pytest.approx(1)
    assert fit.max_abs_residual == pytest.approx(0, abs=1e-12)
    fit = linear_growth_fit([(t, 4.0) for t in range(5)])
    assert fit.slope == pytest.approx(0, abs=1e-12)
    assert fit.intercept == pytest.approx(4)
    assert fit.relative_residual == 0
    # running maxima flatten the dips
    fit = linear_growth_fit([(0, 0), (1, 1), (2, 0.5), (3, 3)])
    assert fit.value_range == 3
    with pytest.raises(ValueError):
        linear_growth_fit([(0, 1), (1, 2)])
