"""Closed-form trap physics and analytic error budget."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .. import constants as C
from ..errors import DomainError, SingularityError, UnsupportedConfigurationError
from .config import DriveConfig, TrapConfig


def lamb_dicke(trap: TrapConfig) -> float:
    """Magnetic-gradient Lamb-Dicke parameter in the linear Zeeman approximation."""
    num = trap.g_F * C.MU_B * trap.gradient
    den = math.sqrt(2 * trap.n_ions * trap.ion_mass * C.HBAR) * trap.nu_axial**1.5
    return num / den


def ion_separation(trap: TrapConfig) -> float:
    """Equilibrium spacing of a two-ion crystal (m)."""
    k = C.ELEMENTARY_CHARGE**2 / (2 * math.pi * C.EPSILON_0 * trap.ion_mass * trap.nu_axial**2)
    return k ** (1.0 / 3.0)


def two_ion_splitting(trap: TrapConfig) -> tuple[float, float]:
    """Return (separation in m, qubit frequency difference in rad/s)."""
    if trap.n_ions != 2:
        raise UnsupportedConfigurationError("two_ion_splitting needs n_ions = 2")
    d = ion_separation(trap)
    return d, trap.g_F * C.MU_B * trap.gradient * d / C.HBAR


def breit_rabi_chi(trap: TrapConfig, B: float) -> float:
    return (trap.g_J + trap.g_I * C.ELECTRON_MASS / C.PROTON_MASS) * C.MU_B * B / (C.HBAR * trap.E_HFS)


def breit_rabi_level(trap: TrapConfig, B: float, m_F: int, upper: bool) -> float:
    """Hyperfine level energy (rad/s) for I = J = 1/2."""
    chi = breit_rabi_chi(trap, B)
    arg = 1 + 2 * m_F * chi + chi * chi
    if arg < 0:
        raise DomainError("Breit-Rabi square-root argument is negative")
    sign = 1.0 if upper else -1.0
    return trap.E_HFS / 4 + trap.g_I * C.MU_N * B * m_F / C.HBAR + sign * trap.E_HFS / 2 * math.sqrt(arg)


def breit_rabi_transition(trap: TrapConfig, B: float) -> float:
    """|F=0, m_F=0> to |F=1, m_F=-1> transition frequency (rad/s) at field B."""
    if B < 0:
        raise DomainError("B must be >= 0")
    return breit_rabi_level(trap, B, -1, upper=True) - breit_rabi_level(trap, B, 0, upper=False)


def _detuning(trap: TrapConfig, drive: DriveConfig) -> float:
    return trap.nu_axial - drive.omega1


def stark_shift_rabi(trap: TrapConfig, drive: DriveConfig) -> float:
    """Per-phonon dressed-state shift (eta nu)^2 / (4 (nu - Omega1))."""
    eps = _detuning(trap, drive)
    if eps == 0:
        raise SingularityError("nu equals Omega1")
    return (trap.eta * trap.nu_axial) ** 2 / (4 * eps)


def delta_qss(trap: TrapConfig, drive: DriveConfig) -> float:
    """Residual Stark shift in the double-dressed basis, (eta nu)^2 / (4 Omega2)."""
    if drive.omega2 == 0:
        raise SingularityError("Omega2 is zero")
    return (trap.eta * trap.nu_axial) ** 2 / (4 * drive.omega2)


def analytic_infidelity(trap: TrapConfig, drive: DriveConfig, t: float) -> float:
    """Leading-order unitary infidelity (delta_qss t)^2 / 2."""
    return 0.5 * (delta_qss(trap, drive) * t) ** 2


def heating_dephasing_rate(trap: TrapConfig, drive: DriveConfig) -> float:
    eps = _detuning(trap, drive)
    if eps == 0:
        raise SingularityError("nu equals Omega1")
    return abs(trap.eta * trap.nu_axial / eps) * trap.heating_rate / 8


def heating_dephasing_infidelity(trap: TrapConfig, drive: DriveConfig, t: float) -> float:
    return t * heating_dephasing_rate(trap, drive)


def jc_collapse_time(trap: TrapConfig) -> float:
    eta = trap.eta
    if eta == 0:
        raise SingularityError("eta is zero")
    return 2 * math.sqrt(2) / (eta * trap.nu_axial)


@dataclass(frozen=True)
class ScalingRow:
    gradient: float
    mode: str
    eta: float
    nu: float
    omega2: float
    t_gate: float
    delta_qss: float
    if_heating: float
    if_unitary: float


def scaled_trap(trap: TrapConfig, target_gradient: float) -> TrapConfig:
    """Same trap at another gradient; eta scales linearly either way."""
    if trap.eta_override is not None:
        ratio = target_gradient / trap.gradient
        return replace(trap, gradient=target_gradient, eta_override=trap.eta_override * ratio)
    return replace(trap, gradient=target_gradient)


def scaling_report(trap: TrapConfig, drive: DriveConfig, target_gradient: float, mode: str = "com") -> ScalingRow:
    """Predicted gate figures at another gradient, on the COM or stretch mode.

    Each row assumes the drive is re-planned so that epsilon = eta nu. The
    stretch mode has frequency sqrt(3) nu, eta reduced by 3^(-3/4), and
    allows Omega2 to grow by sqrt(3).
    """
    if not target_gradient > 0:
        raise DomainError("target_gradient must be > 0")
    if mode not in ("com", "stretch"):
        raise DomainError(f"unknown mode {mode!r}")
    base = scaled_trap(trap, target_gradient)
    eta, nu, omega2 = base.eta, base.nu_axial, drive.omega2
    if mode == "stretch":
        eta, nu, omega2 = eta * 3 ** -0.75, nu * math.sqrt(3), omega2 * math.sqrt(3)
    eps = eta * nu
    t_gate = 2 * math.pi / eps
    dq = (eta * nu) ** 2 / (4 * omega2)
    if_heat = (eta * nu / eps) * trap.heating_rate / 8 * t_gate
    return ScalingRow(
        gradient=target_gradient,
        mode=mode,
        eta=eta,
        nu=nu,
        omega2=omega2,
        t_gate=t_gate,
        delta_qss=dq,
        if_heating=if_heat,
        if_unitary=0.5 * (dq * t_gate) ** 2,
    )
