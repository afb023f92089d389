"""Trap, drive and envelope configuration dataclasses."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy.special import erf

from .. import constants as C
from ..errors import DomainError


@dataclass(frozen=True)
class TrapConfig:
    """Linear Paul trap with a static axial magnetic gradient.

    Angular frequencies are in rad/s. ``eta_override`` pins the Lamb-Dicke
    parameter directly instead of deriving it from the gradient.
    """

    nu_axial: float = C.hz(98.08e3)
    gradient: float = 19.09
    n_ions: int = 2
    ion_mass: float = C.YB171_MASS
    g_F: float = 1.0
    g_I: float = C.YB171_G_I
    g_J: float = C.YB171_G_J
    E_HFS: float = C.YB171_HFS
    B0: float = 0.0
    heating_rate: float = 0.0
    n_bar_init: float = 0.0
    eta_override: float | None = None

    def __post_init__(self):
        for name in ("nu_axial", "ion_mass", "E_HFS"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")
        if self.n_ions < 1:
            raise DomainError("n_ions must be >= 1")
        if self.gradient < 0:
            raise DomainError("gradient must be >= 0")
        if self.heating_rate < 0 or self.n_bar_init < 0 or self.B0 < 0:
            raise DomainError("heating_rate, n_bar_init and B0 must be >= 0")
        if self.eta_override is not None and self.eta_override < 0:
            raise DomainError("eta_override must be >= 0")

    @property
    def eta(self) -> float:
        if self.eta_override is not None:
            return float(self.eta_override)
        from .budget import lamb_dicke

        return lamb_dicke(self)

    def with_(self, **changes) -> TrapConfig:
        return replace(self, **changes)


@dataclass(frozen=True)
class FlatEnvelope:
    kind: str = field(default="flat", init=False)

    def value(self, t: float) -> float:
        return 1.0

    def integral(self, t: float) -> float:
        return float(t)


@dataclass(frozen=True)
class GaussianRamp:
    """Offset-free Gaussian rise over [0, tau] and fall over [T - tau, T].

    The edges are shifted Gaussians rescaled so they reach exactly 0 at the
    pulse boundaries and 1 at the plateau. ``phase_tracking`` makes the
    modulation phase follow the accumulated dressing angle, so the second
    dressing keeps a constant depth as the amplitude ramps.
    """

    ramp_duration: float
    sigma: float
    total_duration: float
    phase_tracking: bool = True
    kind: str = field(default="gaussian_ramp", init=False)

    def __post_init__(self):
        if self.ramp_duration < 0:
            raise DomainError("ramp_duration must be >= 0")
        if self.ramp_duration > 0 and self.sigma <= 0:
            raise DomainError("sigma must be > 0 for a nonzero ramp")
        if 2 * self.ramp_duration > self.total_duration:
            raise DomainError("ramps longer than half the pulse")

    @property
    def _g0(self) -> float:
        return math.exp(-self.ramp_duration**2 / (2 * self.sigma**2))

    def _edge(self, x: float) -> float:
        # x in [-tau, 0]: distance before the plateau
        g0 = self._g0
        return (math.exp(-x * x / (2 * self.sigma**2)) - g0) / (1 - g0)

    def _edge_integral(self, a: float, b: float) -> float:
        # integral of _edge over [a, b] within [-tau, 0]
        s = self.sigma
        k = s * math.sqrt(math.pi / 2)
        gauss = k * (erf(b / (s * math.sqrt(2))) - erf(a / (s * math.sqrt(2))))
        return (gauss - self._g0 * (b - a)) / (1 - self._g0)

    def value(self, t: float) -> float:
        tau, T = self.ramp_duration, self.total_duration
        if tau <= 0:
            return 1.0
        if t < 0 or t > T:
            return 0.0
        if t < tau:
            return min(max(self._edge(t - tau), 0.0), 1.0)
        if t > T - tau:
            return min(max(self._edge(t - (T - tau)), 0.0), 1.0)
        return 1.0

    def integral(self, t: float) -> float:
        """Closed-form integral of the envelope from 0 to t."""
        tau, T = self.ramp_duration, self.total_duration
        if tau <= 0:
            return float(t)
        t = min(max(t, 0.0), T)
        rise = self._edge_integral(-tau, 0.0)
        if t <= tau:
            return self._edge_integral(-tau, t - tau)
        if t <= T - tau:
            return rise + (t - tau)
        return rise + (T - 2 * tau) + self._edge_integral(0.0, t - (T - tau))


Envelope = Union[FlatEnvelope, GaussianRamp]


@dataclass(frozen=True)
class QubitDrive:
    """Phase-modulated dressing drive for one qubit (rad/s)."""

    omega1_amp: float
    omega1_phase: float
    omega2: float
    carrier_detuning: float = 0.0

    def __post_init__(self):
        if self.omega2 > 0 and not self.omega1_phase > 0:
            raise DomainError("omega1_phase must be > 0 when omega2 > 0")
        if self.omega2 < 0 or self.omega1_amp < 0:
            raise DomainError("omega1_amp and omega2 must be >= 0")

    @property
    def modulation_depth(self) -> float:
        return self.omega2 / self.omega1_phase if self.omega1_phase > 0 else 0.0


@dataclass(frozen=True)
class DriveConfig:
    qubits: tuple[QubitDrive, ...]
    envelope: Envelope = FlatEnvelope()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if not self.qubits:
            raise DomainError("at least one qubit drive is required")

    @classmethod
    def symmetric(
        cls,
        omega1: float,
        omega2: float,
        n_qubits: int = 2,
        envelope: Envelope | None = None,
        carrier_detuning: float = 0.0,
    ) -> DriveConfig:
        q = QubitDrive(omega1, omega1, omega2, carrier_detuning)
        return cls((q,) * n_qubits, envelope or FlatEnvelope())

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def omega1(self) -> float:
        """Reference dressing frequency (the modulation frequency of qubit 1)."""
        return self.qubits[0].omega1_phase

    @property
    def omega2(self) -> float:
        return self.qubits[0].omega2

    def with_offsets(self, offsets: RobustnessOffsets) -> DriveConfig:
        """Apply amplitude offsets relative to the modulation frequency.

        delta1 shifts both amplitudes (Amp = Phase - delta1); delta2 further
        lowers qubit 2's amplitude (Amp1 - Amp2 = delta2).
        """
        qs = []
        for j, q in enumerate(self.qubits):
            amp = q.omega1_phase - offsets.delta1 - (offsets.delta2 if j == 1 else 0.0)
            qs.append(replace(q, omega1_amp=amp))
        return replace(self, qubits=tuple(qs))

    def with_envelope(self, envelope: Envelope) -> DriveConfig:
        return replace(self, envelope=envelope)

    def scaled_amplitudes(self, factor: float) -> DriveConfig:
        return replace(self, qubits=tuple(replace(q, omega1_amp=q.omega1_amp * factor) for q in self.qubits))


@dataclass(frozen=True)
class RobustnessOffsets:
    delta1: float = 0.0
    delta2: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.delta1) and np.isfinite(self.delta2)):
            raise DomainError("offsets must be finite")


@dataclass(frozen=True)
class GatePlan:
    epsilon: float
    t_gate: float
    loop_index: int
    phase_index: int
    eta: float
    nu: float
    valid: bool = True
    reasons: tuple[str, ...] = ()

    @property
    def omega1(self) -> float:
        """Dressing frequency that realizes the planned detuning."""
        return self.nu - self.epsilon
