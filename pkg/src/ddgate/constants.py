"""CODATA 2018 constants (SI) and 171Yb+ properties."""
import math

TWO_PI = 2.0 * math.pi

HBAR = 1.054571817e-34  # J s
MU_B = 9.2740100783e-24  # J/T
MU_N = 5.0507837461e-27  # J/T
ELEMENTARY_CHARGE = 1.602176634e-19  # C
EPSILON_0 = 8.8541878128e-12  # F/m
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
ELECTRON_MASS = 9.1093837015e-31  # kg
PROTON_MASS = 1.67262192369e-27  # kg

# 171Yb+ ground-state hyperfine structure
YB171_MASS = 170.9363258 * ATOMIC_MASS_UNIT
YB171_G_J = 2.00231930436
YB171_G_I = 0.98734
YB171_HFS = TWO_PI * 12.642812118466e9  # rad/s


def hz(f: float) -> float:
    """Convert an ordinary frequency in Hz to rad/s."""
    return TWO_PI * f
