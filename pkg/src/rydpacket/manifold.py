"""Level manifold of a circular-orbit electronic wave packet.

A band of d adjacent principal quantum numbers around a mean nbar forms
the computational manifold.  Level offsets j run over

    j = -d/2 + 1 ... d/2        (d even)
    j = -(d-1)/2 ... (d-1)/2    (d odd)

so that j = 0 is the mean level.  Detunings are measured from the mean
level, omega_j0 = E(nbar+j) - E(nbar) with E(n) = -1/(2 n^2) a.u.

Expanding omega_j0 in j gives the hierarchy of orbital time scales: the
classical orbit period t_kepler = 2 pi nbar^3, the quadratic rephasing
time t_revival = 4 pi nbar^4 / 3 and the cubic one t_superrevival =
pi nbar^5 (all atomic units).
"""

from dataclasses import dataclass

import numpy as np

from .constants import AU_TIME_NS, TWO_PI

SPECTRUM_MODES = ("exact", "taylor1", "taylor2", "taylor3")


@dataclass(frozen=True)
class ManifoldSpec:
    """Defining parameters of the level manifold."""

    nbar: int
    d: int

    def __post_init__(self):
        if self.nbar < 4:
            raise ValueError(f"nbar must be >= 4, got {self.nbar}")
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if self.d >= self.nbar:
            raise ValueError(f"need d < nbar, got d={self.d}, nbar={self.nbar}")

    @property
    def j_values(self) -> np.ndarray:
        """Level offsets in ascending order, always containing 0."""
        if self.d % 2 == 0:
            return np.arange(-self.d // 2 + 1, self.d // 2 + 1)
        return np.arange(-(self.d - 1) // 2, (self.d - 1) // 2 + 1)

    @property
    def k_values(self) -> np.ndarray:
        """Conjugate (wave-packet slot) labels; same range as j_values."""
        return self.j_values

    def slot_index(self, k: int) -> int:
        """Array position of slot label k."""
        ks = self.k_values
        if k < ks[0] or k > ks[-1]:
            raise ValueError(f"slot {k} outside {ks[0]}..{ks[-1]}")
        return int(k - ks[0])

    @property
    def kepler_regime_ok(self) -> bool:
        # linear spectrum dominates while d^2 << nbar; factor 4 margin
        return self.d * self.d < self.nbar / 4


@dataclass(frozen=True)
class TimeScales:
    """Orbital time scales of a manifold, atomic units."""

    t_kepler: float
    t_revival: float
    t_superrevival: float

    @property
    def t_kepler_ns(self) -> float:
        return self.t_kepler * AU_TIME_NS

    @property
    def t_revival_ns(self) -> float:
        return self.t_revival * AU_TIME_NS

    @property
    def t_superrevival_ns(self) -> float:
        return self.t_superrevival * AU_TIME_NS


def time_scales(spec: ManifoldSpec) -> TimeScales:
    """Kepler period, revival and super-revival times for a manifold.

    t_kepler = 2 pi nbar^3, t_revival = 4 pi nbar^4 / 3,
    t_superrevival = pi nbar^5, all in atomic units.  For nbar = 180
    these are about 0.89 ns, 106 ns and 14 us.
    """
    n = float(spec.nbar)
    return TimeScales(
        t_kepler=TWO_PI * n**3,
        t_revival=4.0 * np.pi * n**4 / 3.0,
        t_superrevival=np.pi * n**5,
    )


def exact_detunings(spec: ManifoldSpec) -> np.ndarray:
    """omega_j0 = -1/(2(nbar+j)^2) + 1/(2 nbar^2) for each j, a.u."""
    n = float(spec.nbar)
    j = spec.j_values.astype(float)
    return -1.0 / (2.0 * (n + j) ** 2) + 1.0 / (2.0 * n**2)


def taylor_detunings(spec: ManifoldSpec, order: int) -> np.ndarray:
    """Detunings truncated after the given power of j (1, 2 or 3).

    omega_j0 = 2 pi (j / t_kepler - j^2 / t_revival + j^3 / t_superrevival - ...)
    """
    if order not in (1, 2, 3):
        raise ValueError(f"taylor order must be 1, 2 or 3, got {order}")
    ts = time_scales(spec)
    j = spec.j_values.astype(float)
    w = j / ts.t_kepler
    if order >= 2:
        w = w - j**2 / ts.t_revival
    if order >= 3:
        w = w + j**3 / ts.t_superrevival
    return TWO_PI * w


def detunings(spec: ManifoldSpec, mode: str = "exact") -> np.ndarray:
    """Level detunings from the mean level under the chosen spectrum model.

    mode 'exact' uses the closed-form Coulomb energies; 'taylorN' keeps
    the expansion through j^N.  'taylor1' makes free evolution exactly
    periodic with period t_kepler, which is what the idealized shift
    gate assumes.
    """
    if mode == "exact":
        return exact_detunings(spec)
    if mode in ("taylor1", "taylor2", "taylor3"):
        return taylor_detunings(spec, int(mode[-1]))
    raise ValueError(f"unknown spectrum mode {mode!r}, expected one of {SPECTRUM_MODES}")
