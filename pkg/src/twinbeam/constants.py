"""Physical constants (SI units)."""

import math

HBAR = 1.054571817e-34  # J s
C_LIGHT = 299792458.0   # m/s

SQRT_HALF = math.sqrt(0.5)  # vacuum-level amplitude in symmetric ordering


def angular_frequency(wavelength):
    """Vacuum angular frequency (rad/s) for a wavelength in metres."""
    return 2.0 * math.pi * C_LIGHT / wavelength


def photons_per_pulse(power, repetition_rate, omega0):
    """Mean photon number per pulse for average power (W) at carrier omega0."""
    return power / (repetition_rate * HBAR * omega0)
