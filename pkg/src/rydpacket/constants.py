"""Unit conversions.

All internal physics is done in Hartree atomic units (hbar = m_e = e =
4 pi eps0 = 1).  Energies and angular frequencies share the same unit;
times are atomic time units.  Conversions below are used only at the
reporting and config-parsing boundaries.
"""

import math

AU_TIME_S = 2.418884e-17      # one atomic time unit in seconds
AU_TIME_NS = AU_TIME_S * 1e9  # ... in nanoseconds

S_TO_AU = 1.0 / AU_TIME_S

# time units accepted in config files, value = factor to atomic units
TIME_UNITS = {
    "au": 1.0,
    "s": S_TO_AU,
    "ms": 1e-3 * S_TO_AU,
    "us": 1e-6 * S_TO_AU,
    "ns": 1e-9 * S_TO_AU,
    "ps": 1e-12 * S_TO_AU,
    "fs": 1e-15 * S_TO_AU,
}

TWO_PI = 2.0 * math.pi
LN2 = math.log(2.0)
