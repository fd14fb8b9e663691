# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Right-hand sides of the nonlocal 1D models.

All models evolve the vorticities `(Omega, omega)`, the velocities `p, m` are recovered
with `p_x = H Omega`, `m_x = H omega`. The one field models (`osw`) keep their vorticity in
`MhdState.omega` and leave `Omega` identically zero.
Products are formed pointwise on the nodes, without padding.
"""
from dataclasses import dataclass, field, replace
import logging
import math
import typing as tp

from .errors import ConfigError
from .spectral import (
    GaugeSpec, SpectralField, Grid, derivative, hilbert, velocity_from_vorticity)

logger = logging.getLogger(__name__)

MHD1D = "mhd1d"
MHD1D_FULL = "mhd1d-full"
TRANSPORT = "transport"
OSW = "osw"
MODEL_KINDS = (MHD1D, MHD1D_FULL, TRANSPORT, OSW)

Rhs = tp.Tuple[SpectralField, SpectralField]


@dataclass
class MhdState:
    Omega: SpectralField
    omega: SpectralField
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.Omega.grid != self.omega.grid:
            raise ValueError("Omega and omega must share one grid.")

    @property
    def grid(self) -> Grid:
        return self.Omega.grid

    def check_finite(self) -> "MhdState":
        self.Omega.check_finite("Omega")
        self.omega.check_finite("omega")
        return self

    def evolve(self, Omega: SpectralField, omega: SpectralField, time: float) -> "MhdState":
        return replace(self, Omega=Omega, omega=omega, time=time)


@dataclass(frozen=True)
class ModelSpec:
    """Which right-hand side to use.

    Args:
        kind: one of `MODEL_KINDS`.
        a: transport coefficient, ignored by `transport`.
        gauge: how velocities are recovered from vorticities.
        full_model_dedup: for `mhd1d-full`, keep a single copy of the repeated
            transport terms instead of the doubled ones.
    """
    kind: str = MHD1D
    a: float = 1.0
    gauge: GaugeSpec = field(default_factory=GaugeSpec)
    full_model_dedup: bool = False

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            options = ", ".join(MODEL_KINDS)
            raise ConfigError(f"Unknown model {self.kind!r}. Did you mean one of: {options}?",
                              key="model")
        if not math.isfinite(self.a):
            raise ConfigError(f"a must be finite, got {self.a}", key="a")


def _velocities(s: MhdState, gauge: GaugeSpec) -> tp.Tuple[SpectralField, SpectralField]:
    p = velocity_from_vorticity(s.Omega, gauge).check_finite("p")
    m = velocity_from_vorticity(s.omega, gauge).check_finite("m")
    return p, m


def _checked(d_Omega: SpectralField, d_omega: SpectralField) -> Rhs:
    return d_Omega.check_finite("dOmega"), d_omega.check_finite("domega")


def rhs_mhd1d(s: MhdState, spec: ModelSpec) -> Rhs:
    """`dOmega = -a m Omega_x + omega p_x`, `domega = -a p omega_x + Omega m_x`."""
    p, m = _velocities(s, spec.gauge)
    Omega_x = derivative(s.Omega).check_finite("Omega_x")
    omega_x = derivative(s.omega).check_finite("omega_x")
    p_x = hilbert(s.Omega)
    m_x = hilbert(s.omega)
    a = spec.a
    d_Omega = -a * (m * Omega_x) + s.omega * p_x
    d_omega = -a * (p * omega_x) + s.Omega * m_x
    return _checked(d_Omega, d_omega)


def rhs_mhd1d_full(s: MhdState, spec: ModelSpec) -> Rhs:
    """Model with the stretching terms kept:
    `dOmega = -2 m Omega_x + Omega m_x + omega p_x`,
    `domega = -2 p omega_x + omega p_x + Omega m_x`.

    The transport terms appear twice, `full_model_dedup` keeps them once.
    """
    p, m = _velocities(s, spec.gauge)
    Omega_x = derivative(s.Omega).check_finite("Omega_x")
    omega_x = derivative(s.omega).check_finite("omega_x")
    p_x = hilbert(s.Omega)
    m_x = hilbert(s.omega)
    transport = 1.0 if spec.full_model_dedup else 2.0
    d_Omega = -transport * (m * Omega_x) + s.Omega * m_x + s.omega * p_x
    d_omega = -transport * (p * omega_x) + s.omega * p_x + s.Omega * m_x
    return _checked(d_Omega, d_omega)


def rhs_transport(s: MhdState, spec: ModelSpec) -> Rhs:
    """Pure transport, `dOmega = -m Omega_x`, `domega = -p omega_x`."""
    p, m = _velocities(s, spec.gauge)
    Omega_x = derivative(s.Omega).check_finite("Omega_x")
    omega_x = derivative(s.omega).check_finite("omega_x")
    return _checked(-(m * Omega_x), -(p * omega_x))


def rhs_osw(w: SpectralField, a: float, gauge: GaugeSpec = GaugeSpec()) -> SpectralField:
    """`dw = -a u w_x + w H w`, `u_x = H w`. `a = 0` is the CLM model,
    `a = 1` is De Gregorio's.
    """
    u = velocity_from_vorticity(w, gauge).check_finite("u")
    w_x = derivative(w).check_finite("omega_x")
    return (-a * (u * w_x) + w * hilbert(w)).check_finite("domega")


def _rhs_osw_state(s: MhdState, spec: ModelSpec) -> Rhs:
    return SpectralField.zeros(s.grid), rhs_osw(s.omega, spec.a, spec.gauge)


_RHS: tp.Dict[str, tp.Callable[[MhdState, ModelSpec], Rhs]] = {
    MHD1D: rhs_mhd1d,
    MHD1D_FULL: rhs_mhd1d_full,
    TRANSPORT: rhs_transport,
    OSW: _rhs_osw_state,
}


def evaluate_rhs(s: MhdState, spec: ModelSpec) -> Rhs:
    return _RHS[spec.kind](s, spec)


@dataclass
class DerivedFields:
    """Elsasser velocities and the physical fields, `u = (p + m) / 2`, `B = (p - m) / 2`."""
    p: SpectralField
    m: SpectralField
    u: SpectralField
    B: SpectralField
    ux: SpectralField
    Bx: SpectralField

    def as_dict(self) -> tp.Dict[str, SpectralField]:
        return dict(p=self.p, m=self.m, u=self.u, B=self.B, ux=self.ux, Bx=self.Bx)


def derived_fields(s: MhdState, gauge: GaugeSpec = GaugeSpec(),
                   kind: str = MHD1D) -> DerivedFields:
    """Recovers `p, m, u, B, u_x, B_x` from the state.

    For `osw` there is a single velocity: `p = m = u` and `B = B_x = 0`.
    """
    if kind == OSW:
        u = velocity_from_vorticity(s.omega, gauge)
        zero = SpectralField.zeros(s.grid)
        return DerivedFields(p=u, m=u, u=u, B=zero, ux=hilbert(s.omega), Bx=zero)
    p = velocity_from_vorticity(s.Omega, gauge)
    m = velocity_from_vorticity(s.omega, gauge)
    return DerivedFields(
        p=p, m=m,
        u=(p + m) / 2, B=(p - m) / 2,
        ux=hilbert(s.Omega + s.omega) / 2,
        Bx=hilbert(s.Omega - s.omega) / 2)
