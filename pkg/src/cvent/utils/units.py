"""Decibel conversions and efficiency-budget arithmetic."""

from __future__ import annotations

import math


def db_to_variance(db: float) -> float:
    """Squeezing quoted in dB below shot noise → linear variance (4.1 dB → 0.389)."""
    return 10 ** (-db / 10)


def variance_to_db(variance: float) -> float:
    """Linear variance → dB below shot noise. Negative result means above shot noise."""
    if variance <= 0:
        raise ValueError(f"variance must be positive, got {variance}")
    return -10 * math.log10(variance)


def detection_efficiency(quantum_efficiency: float, visibilities: tuple[float, ...] = ()) -> float:
    """Homodyne detection efficiency: photodiode quantum efficiency times each fringe visibility squared."""
    if not 0 <= quantum_efficiency <= 1:
        raise ValueError(f"quantum_efficiency must be in [0, 1], got {quantum_efficiency}")
    for v in visibilities:
        if not 0 <= v <= 1:
            raise ValueError(f"visibility must be in [0, 1], got {v}")
    return quantum_efficiency * math.prod(v * v for v in visibilities)


def combine_efficiencies(*etas: float) -> float:
    """Cascaded losses compose multiplicatively."""
    for eta in etas:
        if not 0 <= eta <= 1:
            raise ValueError(f"efficiency must be in [0, 1], got {eta}")
    return math.prod(etas)
