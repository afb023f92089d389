import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ddgate.constants import hz
from ddgate.physics import DriveConfig, TrapConfig

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

NU = hz(98.08e3)
ETA = 0.0329


@pytest.fixture
def trap() -> TrapConfig:
    return TrapConfig(eta_override=ETA)


@pytest.fixture
def measured_drive() -> DriveConfig:
    return DriveConfig.symmetric(hz(94.8e3), hz(71e3))


@pytest.fixture
def planned_drive(trap) -> DriveConfig:
    return DriveConfig.symmetric(NU * (1 - ETA), hz(71e3))


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
