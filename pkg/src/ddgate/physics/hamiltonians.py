"""Hamiltonians of the phase-modulated, gradient-coupled ion chain.

Sign conventions: computational |0> is the lower hyperfine level, so the
energy-ordered Pauli operators are (X, -Y, -Z) in computational terms and
sigma_+ = |1><0|. Dressed operators: S_x = Z, S_y = -Y, S_z = X. Double
dressed: F_z = S_x, F_y = S_y, F_x = -S_z.

Every ``*_hamiltonian`` function returns a :class:`TimeDependentHamiltonian`
(a cheap callable t -> ndarray for integrators); the ``build_*`` wrappers
return a validated :class:`QuantumOperator` at a single time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import LayoutError
from ..quantum import HilbertLayout, OperatorSet, QuantumOperator
from .config import DriveConfig, TrapConfig


@dataclass(frozen=True, eq=False)
class TimeDependentHamiltonian:
    layout: HilbertLayout
    func: Callable[[float], np.ndarray]
    period: float | None = None

    def __call__(self, t: float) -> np.ndarray:
        return self.func(t)

    def operator(self, t: float) -> QuantumOperator:
        return QuantumOperator(self.layout, self.func(t), hermitian=True)


def _check(drive: DriveConfig, layout: HilbertLayout) -> None:
    if drive.n_qubits != layout.n_qubits:
        raise LayoutError(f"drive has {drive.n_qubits} qubits, layout has {layout.n_qubits}")


def _phases(drive: DriveConfig, t: float, include_detuning: bool = True) -> list[float]:
    env = drive.envelope
    tracked = getattr(env, "phase_tracking", False)
    out = []
    for q in drive.qubits:
        theta = q.omega1_phase * (env.integral(t) if tracked else t)
        phi = q.modulation_depth * np.sin(theta)
        if include_detuning:
            phi += q.carrier_detuning * t
        out.append(phi)
    return out


def modulation_phase(drive: DriveConfig, t: float) -> list[float]:
    """Drive phase phi_j(t) for every qubit."""
    return _phases(drive, t)


def rwa_hamiltonian(
    trap: TrapConfig,
    drive: DriveConfig,
    layout: HilbertLayout,
    static_detuning: bool = False,
) -> TimeDependentHamiltonian:
    """Bare-state RWA Hamiltonian (carrier rotated out, 12.6 GHz never integrated).

    With ``static_detuning`` the carrier detuning is moved from the drive
    phase into a static -delta/2 sigma_z term; this is a qubit-diagonal frame
    change, so populations are unchanged while the Hamiltonian stays periodic.
    """
    _check(drive, layout)
    ops = OperatorSet.for_layout(layout)
    eta_nu = trap.eta * trap.nu_axial
    x = ops.b + ops.bdag
    static = trap.nu_axial * ops.number
    for z in ops.z:
        static = static - 0.5 * eta_nu * z @ x
    if static_detuning:
        for z, q in zip(ops.z, drive.qubits):
            static = static + 0.5 * q.carrier_detuning * z
    sps = ops.sp
    sms = tuple(s.T.copy() for s in sps)
    amps = [q.omega1_amp for q in drive.qubits]
    env = drive.envelope

    def h(t: float) -> np.ndarray:
        e = env.value(t)
        out = static.copy()
        for a, phi, sp, sm in zip(amps, _phases(drive, t, not static_detuning), sps, sms):
            c = 0.5 * a * e * np.exp(-1j * phi)
            out += c * sp + np.conj(c) * sm
        return out

    period = None
    if env.kind == "flat" and drive.omega1 > 0 and len({q.omega1_phase for q in drive.qubits}) == 1:
        if static_detuning or all(q.carrier_detuning == 0 for q in drive.qubits):
            period = 2 * np.pi / drive.omega1
    return TimeDependentHamiltonian(layout, h, period)


def dressed_hamiltonian(trap: TrapConfig, drive: DriveConfig, layout: HilbertLayout) -> TimeDependentHamiltonian:
    """Exact rotating frame that removes the drive phase from the RWA Hamiltonian.

    For equal amplitude and modulation frequency this is
    sum_j Omega1/2 S_z + Omega2/2 S_x cos(Omega1 t) + nu b^dag b - eta nu/2 S_x (b + b^dag).
    """
    _check(drive, layout)
    ops = OperatorSet.for_layout(layout)
    eta_nu = trap.eta * trap.nu_axial
    x = ops.b + ops.bdag
    sz_d, sx_d = ops.x, ops.z
    static = trap.nu_axial * ops.number
    for s in sx_d:
        static = static - 0.5 * eta_nu * s @ x
    env = drive.envelope
    tracked = getattr(env, "phase_tracking", False)

    def h(t: float) -> np.ndarray:
        e = env.value(t)
        out = static.copy()
        for q, sz, sx in zip(drive.qubits, sz_d, sx_d):
            theta = q.omega1_phase * (env.integral(t) if tracked else t)
            rate = q.omega1_phase * (e if tracked else 1.0)
            dphi = q.modulation_depth * rate * np.cos(theta) + q.carrier_detuning
            out += 0.5 * q.omega1_amp * e * sz + 0.5 * dphi * sx
        return out

    return TimeDependentHamiltonian(layout, h)


def dressed_frame_unitary(drive: DriveConfig, layout: HilbertLayout, t: float) -> np.ndarray:
    """V(t) with rho_rwa = V rho_dressed V^dag."""
    ops = OperatorSet.for_layout(layout)
    diag = np.zeros(layout.dim)
    for phi, z in zip(_phases(drive, t), ops.z):
        diag = diag + 0.5 * phi * np.real(np.diag(z))
    return np.diag(np.exp(1j * diag))


def double_dressed_hamiltonian(trap: TrapConfig, drive: DriveConfig, layout: HilbertLayout) -> TimeDependentHamiltonian:
    """sum_j Omega2/4 F_z - eta nu/2 (F_z cos(Omega1 t) - F_y sin(Omega1 t)) (b e^{-i nu t} + h.c.)."""
    _check(drive, layout)
    ops = OperatorSet.for_layout(layout)
    eta_nu = trap.eta * trap.nu_axial
    nu = trap.nu_axial
    fz = ops.z
    fy = tuple(-y for y in ops.y)
    static = np.zeros((layout.dim, layout.dim), dtype=complex)
    for q, f in zip(drive.qubits, fz):
        static = static + 0.25 * q.omega2 * f

    def h(t: float) -> np.ndarray:
        bt = ops.b * np.exp(-1j * nu * t)
        x = bt + bt.conj().T
        out = static.copy()
        for q, z, y in zip(drive.qubits, fz, fy):
            w = q.omega1_phase * t
            out -= 0.5 * eta_nu * (z * np.cos(w) - y * np.sin(w)) @ x
        return out

    return TimeDependentHamiltonian(layout, h)


def ms_hamiltonian(trap: TrapConfig, drive: DriveConfig, layout: HilbertLayout) -> TimeDependentHamiltonian:
    """Secular double-dressed Hamiltonian sum_j Omega2/4 F_z - eta nu/4 F_z (b e^{-i eps t} + h.c.)."""
    _check(drive, layout)
    if layout.n_qubits != 2:
        raise LayoutError("the MS-type Hamiltonian needs a two-qubit layout")
    ops = OperatorSet.for_layout(layout)
    eta_nu = trap.eta * trap.nu_axial
    eps = trap.nu_axial - drive.omega1
    static = sum(0.25 * q.omega2 * z for q, z in zip(drive.qubits, ops.z))
    fz_sum = ops.z[0] + ops.z[1]

    def h(t: float) -> np.ndarray:
        bt = ops.b * np.exp(-1j * eps * t)
        return static - 0.25 * eta_nu * fz_sum @ (bt + bt.conj().T)

    return TimeDependentHamiltonian(layout, h)


def build_rwa_hamiltonian(t: float, trap: TrapConfig, drive: DriveConfig, layout: HilbertLayout) -> QuantumOperator:
    return rwa_hamiltonian(trap, drive, layout).operator(t)


def build_dressed_hamiltonian(t: float, trap: TrapConfig, drive: DriveConfig, layout: HilbertLayout) -> QuantumOperator:
    return dressed_hamiltonian(trap, drive, layout).operator(t)


def build_double_dressed_hamiltonian(
    t: float, trap: TrapConfig, drive: DriveConfig, layout: HilbertLayout
) -> QuantumOperator:
    return double_dressed_hamiltonian(trap, drive, layout).operator(t)


def build_ms_hamiltonian(t: float, trap: TrapConfig, drive: DriveConfig, layout: HilbertLayout) -> QuantumOperator:
    return ms_hamiltonian(trap, drive, layout).operator(t)
