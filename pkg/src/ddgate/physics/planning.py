"""Gate planning and parameter-regime checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InvalidGatePlanError
from .config import DriveConfig, GatePlan, TrapConfig

DEFAULT_THRESHOLD = 5.0


def effective_coupling(trap: TrapConfig, drive: DriveConfig) -> float:
    """Qubit-qubit coupling (eta nu)^2 / (8 eps) with eps = nu - Omega1."""
    eps = trap.nu_axial - drive.omega1
    if eps == 0:
        raise InvalidGatePlanError("epsilon = 0: coupling diverges", ["epsilon == 0"])
    return (trap.eta * trap.nu_axial) ** 2 / (8 * eps)


@dataclass(frozen=True)
class Condition:
    name: str
    group: str
    ratio: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.ratio >= self.threshold


def _ratio(num: float, den: float) -> float:
    if den == 0:
        return math.inf if num != 0 else 0.0
    return abs(num) / abs(den)


def validity_check(
    trap: TrapConfig,
    drive: DriveConfig,
    plan: GatePlan | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> list[Condition]:
    """Evaluate every '>>' condition as a ratio against ``threshold``.

    Group "sideband" holds the three conditions for dropping the sideband
    driving term in the double-dressed frame; "rwa" and "decoupling" hold
    the single-qubit frame and motional-decoupling conditions.
    """
    nu = trap.nu_axial
    eta_nu = trap.eta * nu
    omega1 = plan.omega1 if plan is not None else drive.omega1
    omega2 = drive.omega2
    eps = nu - omega1
    half = eta_nu / 2
    return [
        Condition("|eps+O2/2| >> eta*nu/2", "sideband", _ratio(eps + omega2 / 2, half), threshold),
        Condition("|eps-O2/2| >> eta*nu/2", "sideband", _ratio(eps - omega2 / 2, half), threshold),
        Condition("|O1+nu-O2/2| >> eta*nu/2", "sideband", _ratio(omega1 + nu - omega2 / 2, half), threshold),
        Condition("|eps| << O1+nu", "sideband", _ratio(omega1 + nu, eps), threshold),
        Condition("O2 << 4*O1", "rwa", _ratio(4 * omega1, omega2), threshold),
        Condition("O2 >> eta*nu", "decoupling", _ratio(omega2, eta_nu), threshold),
        Condition("|O1-nu| << O2", "decoupling", _ratio(omega2, omega1 - nu), threshold),
        Condition("O2 << |O1+nu|", "decoupling", _ratio(omega1 + nu, omega2), threshold),
    ]


def flip_flop_resonance(trap: TrapConfig, drive: DriveConfig, rtol: float = 1e-9) -> bool:
    """True when Omega2 = 2 eps, where the dressed flip-flop term is resonant."""
    eps = trap.nu_axial - drive.omega1
    return math.isclose(drive.omega2, 2 * abs(eps), rel_tol=rtol)


def gate_plan(
    trap: TrapConfig,
    drive: DriveConfig,
    n: int = 1,
    k: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    strict: bool = False,
) -> GatePlan:
    """Solve eps t = 2 pi n together with (eta nu)^2 t / (8 eps) = pi/4 + pi k/2.

    The solution is eps = eta nu sqrt(n / (1 + 2k)), t = 2 pi n / eps; for
    n = 1, k = 0 this is eps = eta nu, t = 2 pi / (eta nu).
    """
    eta = trap.eta
    if not eta > 0:
        raise InvalidGatePlanError("eta must be > 0", ["eta <= 0"])
    if n < 1 or k < 0:
        raise InvalidGatePlanError("need n >= 1 and k >= 0", [f"n={n}, k={k}"])
    eta_nu = eta * trap.nu_axial
    eps = eta_nu if (n == 1 and k == 0) else eta_nu * math.sqrt(n / (1 + 2 * k))
    t = 2 * math.pi * n / eps
    plan = GatePlan(eps, t, n, k, eta, trap.nu_axial)
    conds = validity_check(trap, drive, plan, threshold)
    failed = tuple(c.name for c in conds if not c.passed)
    sideband_failed = [c.name for c in conds if c.group == "sideband" and not c.passed]
    if strict and sideband_failed:
        raise InvalidGatePlanError("planned detuning violates sideband conditions", sideband_failed)
    return GatePlan(eps, t, n, k, eta, trap.nu_axial, valid=not sideband_failed, reasons=failed)
