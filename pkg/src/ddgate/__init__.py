"""Simulation toolkit for a double-dressed trapped-ion entangling gate."""
from . import constants, dynamics, entanglement, physics, quantum, tomography
from .errors import DDGateError, TruncationWarning

__version__ = "0.1.0"
__all__ = ["constants", "dynamics", "entanglement", "physics", "quantum", "tomography", "DDGateError", "TruncationWarning"]
