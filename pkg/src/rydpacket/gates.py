"""Gate compilation on the packet-slot qudit.

Any d x d unitary on the slot amplitudes factors into at most
d(d-1)/2 two-level rotations plus diagonal phases (Givens elimination).
Each two-level factor is executed physically with a fixed protocol:

    wait until slot k crosses the core, pi-pulse it into ground storage;
    wait until slot k' crosses, pi-pulse it into the auxiliary storage;
    rotate the two stored amplitudes (resonant storage pulses + phases);
    pi-pulse k' back, then k back, each at a core crossing;
    pad with free flight to a whole number of Kepler periods.

Slot addressing is purely temporal: the slot that started the schedule
with label k crosses the core at clock times t = (-k mod d) t_k / d
modulo t_kepler (linearized spectrum), so the compiler only chooses
pulse center times.  Each storage pi pulse contributes a factor i to
the transferred amplitude; four of them make -1, which the compiler
absorbs by realizing -u2 between the storages.

Schedules carry relative timing only (Wait entries); a pulse occupies
the support [t, t + 8 sigma] starting at the clock position where it
appears, centered at t + 4 sigma.

The default gate pulse FWHM is 0.25 ln2 t_kepler / d, half the
bandwidth-limit demonstration value: transfer to slots adjacent to the
addressed one falls quadratically with pulse length, and the shorter
pulse keeps the per-pulse neighbor loss near 1 percent, which is what
lets a compiled fragment stay above 0.9 process fidelity at nbar = 180.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .basis import energy_to_packet_matrix
from .constants import AU_TIME_NS, LN2
from .manifold import ManifoldSpec, time_scales
from .pulse import (
    PulseSpec,
    SimulationState,
    integrate_pulse,
    pi_pulse_peak_rabi,
    state_from_packet,
)
from .evolution import shift_matrix

UNITARITY_TOL = 1e-9
IDENTITY_TOL = 1e-12
DEFAULT_GATE_FWHM_FACTOR = 0.25 * LN2   # times t_kepler / d


# ---------------------------------------------------------------------------
# two-level factors


@dataclass(frozen=True)
class TwoLevelOp:
    """A 2x2 unitary acting on slot pair (k, k2), identity elsewhere."""

    k: int
    k2: int
    u2: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.k == self.k2:
            raise ValueError("two-level op needs distinct slots")
        u = np.asarray(self.u2, dtype=complex)
        object.__setattr__(self, "u2", u)
        if u.shape != (2, 2):
            raise ValueError("u2 must be 2x2")
        if np.max(np.abs(u @ u.conj().T - np.eye(2))) > UNITARITY_TOL:
            raise ValueError("u2 not unitary")

    def embed(self, spec: ManifoldSpec) -> np.ndarray:
        U = np.eye(spec.d, dtype=complex)
        a, b = spec.slot_index(self.k), spec.slot_index(self.k2)
        U[np.ix_([a, b], [a, b])] = self.u2
        return U


def compose_ops(ops: list[TwoLevelOp], spec: ManifoldSpec) -> np.ndarray:
    """Matrix of the ops applied in list order (ops[0] acts first)."""
    U = np.eye(spec.d, dtype=complex)
    for op in ops:
        U = op.embed(spec) @ U
    return U


def decompose_unitary(U: np.ndarray, spec: ManifoldSpec) -> list[TwoLevelOp]:
    """Factor U into two-level rotations plus paired diagonal phases.

    Column-major Givens elimination: for each column, sub-diagonal
    entries are rotated into the diagonal from the bottom up with
    numerically stable complex rotations (entries below ~1e-14 of the
    column scale are skipped rather than rotated degenerately).  The
    unitary diagonal that remains is emitted as two-level phase ops on
    slot pairs.  Result: U equals the ops applied in list order, to
    machine precision, with at most d(d-1)/2 + ceil(d/2) factors.
    """
    d = spec.d
    U = np.asarray(U, dtype=complex)
    if U.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix")
    if np.max(np.abs(U @ U.conj().T - np.eye(d))) > UNITARITY_TOL:
        raise ValueError("matrix is not unitary within 1e-9")

    ks = spec.k_values
    M = U.copy()
    rotations: list[TwoLevelOp] = []   # elimination order
    for c in range(d - 1):
        for r in range(d - 1, c, -1):
            y = M[r, c]
            if abs(y) <= 1e-14:
                M[r, c] = 0.0
                continue
            x = M[c, c]
            nrm = math.hypot(abs(x), abs(y))
            g = np.array(
                [[np.conj(x) / nrm, np.conj(y) / nrm], [-y / nrm, x / nrm]],
                dtype=complex,
            )
            M[[c, r], :] = g @ M[[c, r], :]
            M[r, c] = 0.0
            rotations.append(TwoLevelOp(k=int(ks[c]), k2=int(ks[r]), u2=g))

    # pair up the residual diagonal phases; pairing nonzero phases with
    # each other keeps a two-level-sparse input down to a single factor
    ops: list[TwoLevelOp] = []
    diag = np.angle(np.diag(M))
    hot = [i for i in range(d) if abs(diag[i]) > 1e-12]
    for a, b in zip(hot[0::2], hot[1::2]):
        ops.append(_phase_pair_op(spec, a, diag[a], b, diag[b]))
    if len(hot) % 2 == 1:
        # a lone phase rides along with the last rotation touching its
        # slot, so it fuses into that rotation's pulse fragment
        i = hot[-1]
        partner = None
        for g in reversed(rotations):
            pa, pb = spec.slot_index(g.k), spec.slot_index(g.k2)
            if i in (pa, pb):
                partner = pb if i == pa else pa
                break
        if partner is None:
            partner = i - 1 if i == d - 1 else i + 1
        phis = {i: diag[i],
                partner: 0.0 if partner in hot[:-1] else diag[partner]}
        lo, hi = min(i, partner), max(i, partner)
        ops.append(_phase_pair_op(spec, lo, phis[lo], hi, phis[hi]))

    # U = G1' G2' ... GN' D, so D acts first, then the inverses in reverse
    for g in reversed(rotations):
        ops.append(TwoLevelOp(k=g.k, k2=g.k2, u2=g.u2.conj().T))
    return ops


def _phase_pair_op(spec, i, phi_i, i2, phi_i2) -> TwoLevelOp:
    ks = spec.k_values
    u2 = np.diag([np.exp(1j * phi_i), np.exp(1j * phi_i2)]).astype(complex)
    return TwoLevelOp(k=int(ks[i]), k2=int(ks[i2]), u2=u2)


def zyz_angles(u2: np.ndarray) -> tuple[float, float, float, float]:
    """(alpha, beta, gamma, delta) with u2 = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta).

    Rz(b) = diag(e^{-ib/2}, e^{+ib/2}); Ry(g) the real rotation.
    """
    u = np.asarray(u2, dtype=complex)
    alpha = 0.5 * np.angle(np.linalg.det(u))
    su = u * np.exp(-1j * alpha)
    gamma = 2.0 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    if abs(su[0, 0]) > 1e-12 and abs(su[1, 0]) > 1e-12:
        s = -2.0 * np.angle(su[0, 0])
        dmb = 2.0 * np.angle(su[1, 0])
        beta = 0.5 * (s + dmb)
        delta = 0.5 * (s - dmb)
    elif abs(su[1, 0]) <= 1e-12:
        beta = -2.0 * np.angle(su[0, 0])
        delta = 0.0
    else:
        beta = 2.0 * np.angle(su[1, 0])
        delta = 0.0
    return float(alpha), float(beta), float(gamma), float(delta)


# ---------------------------------------------------------------------------
# schedule primitives


@dataclass(frozen=True)
class Wait:
    """Free flight for a fixed duration (a.u.)."""

    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("wait duration must be >= 0")


@dataclass(frozen=True)
class ManifoldPiPulse:
    """Calibrated pi pulse swapping the core slot with a storage level.

    slot records which schedule-start slot label the pulse addresses;
    the physical selection is purely the pulse timing.
    """

    slot: int
    target: str          # 'g' or 'e'
    phase: float = 0.0


@dataclass(frozen=True)
class StoragePulse:
    """Instantaneous unitary on the two storage amplitudes (g, e).

    Resonant rotation by area theta about the equatorial axis set by
    phi, optionally tilted by a detuning-area term, followed by bare
    phases on each storage level (theta = 0 gives a pure phase pulse):

        U = diag(e^{i phase_g}, e^{i phase_e})
            . exp(i/2 [[chi, theta e^{i phi}], [theta e^{-i phi}, -chi]])

    with chi = detuning_area.  Storage levels are dispersion-free, so
    the idealized zero-duration action is exact for the model.
    """

    theta: float = 0.0
    phi: float = 0.0
    detuning_area: float = 0.0
    phase_g: float = 0.0
    phase_e: float = 0.0

    def matrix(self) -> np.ndarray:
        chi, th = self.detuning_area, self.theta
        eff = math.hypot(th, chi)
        if eff == 0.0:
            u = np.eye(2, dtype=complex)
        else:
            m = np.array(
                [[chi, th * np.exp(1j * self.phi)], [th * np.exp(-1j * self.phi), -chi]],
                dtype=complex,
            )
            u = math.cos(eff / 2.0) * np.eye(2) + 1j * math.sin(eff / 2.0) * m / eff
        return np.diag([np.exp(1j * self.phase_g), np.exp(1j * self.phase_e)]) @ u


Primitive = Wait | ManifoldPiPulse | StoragePulse


@dataclass
class GateSchedule:
    """Timed pulse program implementing a unitary on the slot qudit."""

    nbar: int
    d: int
    pulse_fwhm: float            # manifold pi-pulse FWHM, a.u.
    peak_rabi: float             # calibrated pi-pulse peak Rabi frequency, a.u.
    primitives: list = field(default_factory=list)
    recorded_global_phase: float = 0.0

    @property
    def spec(self) -> ManifoldSpec:
        return ManifoldSpec(nbar=self.nbar, d=self.d)

    def duration(self) -> float:
        sigma8 = 8.0 * PulseSpec(fwhm=self.pulse_fwhm, peak_rabi=1.0).sigma
        t = 0.0
        for p in self.primitives:
            if isinstance(p, Wait):
                t += p.duration
            elif isinstance(p, ManifoldPiPulse):
                t += sigma8
        return t

    def manifold_pulse_count(self) -> int:
        return sum(isinstance(p, ManifoldPiPulse) for p in self.primitives)


# ---------------------------------------------------------------------------
# serialization (JSON; atomic-unit fields are authoritative)


def schedule_to_json(schedule: GateSchedule) -> str:
    prims = []
    for p in schedule.primitives:
        if isinstance(p, Wait):
            prims.append({
                "type": "wait",
                "duration_au": p.duration,
                "duration_si_ns": p.duration * AU_TIME_NS,
            })
        elif isinstance(p, ManifoldPiPulse):
            prims.append({
                "type": "manifold_pi_pulse",
                "slot": p.slot,
                "target": p.target,
                "phase": p.phase,
            })
        elif isinstance(p, StoragePulse):
            prims.append({
                "type": "storage_pulse",
                "theta": p.theta,
                "phi": p.phi,
                "detuning_area": p.detuning_area,
                "phase_g": p.phase_g,
                "phase_e": p.phase_e,
            })
        else:
            raise TypeError(f"unknown primitive {p!r}")
    doc = {
        "nbar": schedule.nbar,
        "d": schedule.d,
        "pulse_fwhm_au": schedule.pulse_fwhm,
        "pulse_fwhm_si_ns": schedule.pulse_fwhm * AU_TIME_NS,
        "peak_rabi_au": schedule.peak_rabi,
        "recorded_global_phase": schedule.recorded_global_phase,
        "primitives": prims,
    }
    return json.dumps(doc, indent=2)


def schedule_from_json(text: str) -> GateSchedule:
    doc = json.loads(text)
    prims: list = []
    for p in doc["primitives"]:
        kind = p["type"]
        if kind == "wait":
            prims.append(Wait(duration=p["duration_au"]))
        elif kind == "manifold_pi_pulse":
            prims.append(ManifoldPiPulse(slot=p["slot"], target=p["target"], phase=p["phase"]))
        elif kind == "storage_pulse":
            prims.append(StoragePulse(
                theta=p["theta"], phi=p["phi"], detuning_area=p["detuning_area"],
                phase_g=p["phase_g"], phase_e=p["phase_e"],
            ))
        else:
            raise ValueError(f"unknown primitive type {kind!r}")
    return GateSchedule(
        nbar=doc["nbar"],
        d=doc["d"],
        pulse_fwhm=doc["pulse_fwhm_au"],
        peak_rabi=doc["peak_rabi_au"],
        primitives=prims,
        recorded_global_phase=doc.get("recorded_global_phase", 0.0),
    )


# ---------------------------------------------------------------------------
# compilation


class _Compiler:
    def __init__(self, spec: ManifoldSpec, pulse_fwhm: float):
        self.spec = spec
        self.step = time_scales(spec).t_kepler / spec.d
        self.fwhm = pulse_fwhm
        self.sigma = PulseSpec(fwhm=pulse_fwhm, peak_rabi=1.0).sigma
        self.t = 0.0                      # clock at end of emitted primitives
        self.prims: list = []

    def _next_center(self, slot: int, t_min: float) -> float:
        """Earliest core crossing of the slot with pulse center >= t_min."""
        d = self.spec.d
        m_min = int(math.ceil(t_min / self.step - 1e-9))
        m = m_min + ((-slot - m_min) % d)
        return m * self.step

    def _pulse_at(self, center: float, slot: int, target: str) -> None:
        start = center - 4.0 * self.sigma
        if start < self.t - 1e-6 * self.step:
            raise RuntimeError("pulse scheduling went backwards")
        self.prims.append(Wait(duration=max(start - self.t, 0.0)))
        self.prims.append(ManifoldPiPulse(slot=slot, target=target))
        self.t = center + 4.0 * self.sigma

    def add_fragment(self, op: TwoLevelOp) -> None:
        """Emit the store / rotate / restore protocol for one factor."""
        c1 = self._next_center(op.k, self.t + 4.0 * self.sigma)
        self._pulse_at(c1, op.k, "g")
        c2 = self._next_center(op.k2, self.t + 4.0 * self.sigma)
        self._pulse_at(c2, op.k2, "e")

        # four i factors from the pi pulses make -1: realize -u2 in storage
        v = -np.asarray(op.u2, dtype=complex)
        alpha, beta, gamma, delta = zyz_angles(v)
        if abs(delta) > 1e-14:
            self.prims.append(StoragePulse(phase_g=-delta / 2.0, phase_e=delta / 2.0))
        if abs(gamma) > 1e-14:
            self.prims.append(StoragePulse(theta=gamma, phi=math.pi / 2.0))
        if abs(alpha - beta / 2.0) > 1e-14 or abs(alpha + beta / 2.0) > 1e-14:
            self.prims.append(StoragePulse(phase_g=alpha - beta / 2.0,
                                           phase_e=alpha + beta / 2.0))

        c3 = self._next_center(op.k2, self.t + 4.0 * self.sigma)
        self._pulse_at(c3, op.k2, "e")
        c4 = self._next_center(op.k, self.t + 4.0 * self.sigma)
        self._pulse_at(c4, op.k, "g")

    def pad_to_steps(self, multiple: int) -> None:
        """Wait until the clock is a whole multiple of `multiple` steps."""
        span = multiple * self.step
        t_end = math.ceil(self.t / span - 1e-9) * span
        if t_end > self.t:
            self.prims.append(Wait(duration=t_end - self.t))
            self.t = t_end


def merge_same_pair(ops: list[TwoLevelOp]) -> list[TwoLevelOp]:
    """Fuse consecutive factors acting on the same slot pair."""
    out: list[TwoLevelOp] = []
    for op in ops:
        if out and {out[-1].k, out[-1].k2} == {op.k, op.k2}:
            prev = out.pop()
            u_prev = prev.u2 if (prev.k, prev.k2) == (op.k, op.k2) else _swapped(prev.u2)
            out.append(TwoLevelOp(k=op.k, k2=op.k2, u2=op.u2 @ u_prev))
        else:
            out.append(op)
    return [op for op in out if np.max(np.abs(op.u2 - np.eye(2))) > IDENTITY_TOL]


def _swapped(u2: np.ndarray) -> np.ndarray:
    p = np.array([[0, 1], [1, 0]], dtype=complex)
    return p @ u2 @ p


def compile_two_level(op: TwoLevelOp, spec: ManifoldSpec,
                      pulse_fwhm: float | None = None) -> GateSchedule:
    """Schedule for a single two-level factor."""
    return compile_unitary(op.embed(spec), spec, pulse_fwhm=pulse_fwhm)


def compile_unitary(
    U: np.ndarray,
    spec: ManifoldSpec,
    pulse_fwhm: float | None = None,
    align_revival: bool = False,
) -> GateSchedule:
    """Compile a d x d unitary on the slot amplitudes to a pulse program.

    Cyclic shifts (including the identity) short-circuit to bare free
    flight.  Everything else goes through the two-level decomposition;
    consecutive factors on the same slot pair are fused first.  Each
    fragment is padded to a whole number of Kepler periods so fragments
    concatenate as plain matrix products; align_revival instead pads the
    finished schedule to a whole number of revival times, which trades
    extra flight time for re-aligned quadratic dispersion phases.
    """
    d = spec.d
    U = np.asarray(U, dtype=complex)
    if U.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix")
    if np.max(np.abs(U @ U.conj().T - np.eye(d))) > UNITARITY_TOL:
        raise ValueError("matrix is not unitary within 1e-9")

    ts = time_scales(spec)
    if pulse_fwhm is None:
        pulse_fwhm = DEFAULT_GATE_FWHM_FACTOR * ts.t_kepler / d
    sched = GateSchedule(
        nbar=spec.nbar, d=d, pulse_fwhm=pulse_fwhm,
        peak_rabi=pi_pulse_peak_rabi(spec, pulse_fwhm),
    )

    for n in range(d):
        if np.max(np.abs(U - shift_matrix(d, n))) <= UNITARITY_TOL:
            if n > 0:
                sched.primitives.append(Wait(duration=n * ts.t_kepler / d))
            return sched

    comp = _Compiler(spec, pulse_fwhm)
    for op in merge_same_pair(decompose_unitary(U, spec)):
        comp.add_fragment(op)
        comp.pad_to_steps(d)
    if align_revival:
        comp.pad_to_steps(d * int(round(ts.t_revival / ts.t_kepler)))
    sched.primitives = comp.prims
    return sched


# ---------------------------------------------------------------------------
# simulation and process fidelity


def simulate_schedule(
    schedule: GateSchedule,
    bt0: np.ndarray,
    mode: str = "exact",
    pulses: str = "full",
) -> tuple[np.ndarray, dict]:
    """Run a schedule on initial packet amplitudes bt0 (clock starts at 0).

    pulses='full' integrates every manifold pulse in the d+1 level model;
    pulses='ideal' replaces them with instantaneous perfect swaps at the
    pulse center (the compiler's design model: with mode='taylor1' a
    compiled schedule reproduces its target exactly).  Returns lab-frame
    packet amplitudes at the final clock plus a diagnostics dict.
    """
    spec = schedule.spec
    F = energy_to_packet_matrix(spec.d)
    state = state_from_packet(spec, bt0)
    sigma = PulseSpec(fwhm=schedule.pulse_fwhm, peak_rabi=1.0).sigma
    core = spec.slot_index(0)

    from .manifold import detunings

    w = detunings(spec, mode)
    for prim in schedule.primitives:
        if isinstance(prim, Wait):
            state.advance(prim.duration)
        elif isinstance(prim, StoragePulse):
            g, e = prim.matrix() @ np.array([state.b_g, state.b_e])
            state.b_g, state.b_e = complex(g), complex(e)
        elif isinstance(prim, ManifoldPiPulse):
            center = state.t + 4.0 * sigma
            if pulses == "ideal":
                bt = F @ (state.b_energy * np.exp(-1j * w * center))
                stored = state.b_g if prim.target == "g" else state.b_e
                ph = np.exp(1j * prim.phase)
                new_stored = 1j * ph * bt[core]
                bt[core] = 1j * np.conj(ph) * stored
                state.b_energy = np.exp(1j * w * center) * (F.conj().T @ bt)
                if prim.target == "g":
                    state.b_g = complex(new_stored)
                else:
                    state.b_e = complex(new_stored)
                state.t = center + 4.0 * sigma
            else:
                ps = PulseSpec(
                    fwhm=schedule.pulse_fwhm,
                    peak_rabi=schedule.peak_rabi,
                    phase=prim.phase,
                    center_time=center,
                    target=prim.target,
                )
                state = integrate_pulse(state, ps, mode=mode)
        else:
            raise TypeError(f"unknown primitive {prim!r}")

    bt_final = state.packet_amplitudes(mode=mode)
    info = {
        "t_end": state.t,
        "storage_leak": abs(state.b_g) ** 2 + abs(state.b_e) ** 2,
        "b_g": state.b_g,
        "b_e": state.b_e,
        "norm": state.norm(),
    }
    return bt_final, info


def probe_states(spec: ManifoldSpec) -> list[np.ndarray]:
    """Deterministic fidelity probes: slot deltas + fractional shifts.

    The d slot basis states, plus d+1 states with uniform level
    populations and linear phase ramps at non-slot spacings (packets
    displaced by fractions m/(d+1) of the orbit).  Every probe has flat
    level populations, so free-flight dispersion affects the whole set
    evenly and the probe average is also sensitive to inter-slot phase
    errors.
    """
    d = spec.d
    F = energy_to_packet_matrix(d)
    probes = [np.eye(d, dtype=complex)[i] for i in range(d)]
    j = spec.j_values
    for m in range(d + 1):
        b = np.exp(-2j * np.pi * j * m / (d + 1)) / np.sqrt(d)
        probes.append(F @ b)
    return probes


def process_fidelity(
    schedule: GateSchedule,
    U_target: np.ndarray,
    mode: str = "exact",
    pulses: str = "full",
) -> float:
    """Average state fidelity of the schedule against a target unitary.

    Mean of |<U psi, simulated psi>|^2 over the deterministic probe set.
    An empty schedule against the identity gives exactly 1.
    """
    spec = schedule.spec
    U = np.asarray(U_target, dtype=complex)
    fids = []
    for p in probe_states(spec):
        out, _ = simulate_schedule(schedule, p, mode=mode, pulses=pulses)
        fids.append(abs(np.vdot(U @ p, out)) ** 2)
    return float(np.mean(fids))


def random_two_level_unitary(spec: ManifoldSpec, seed: int) -> np.ndarray:
    """Random two-level-sparse test unitary: one Haar U(2) block."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(x)
    q = q @ np.diag(np.diag(r) / np.abs(np.diag(r)))
    ks = spec.k_values
    a, b = rng.choice(spec.d, size=2, replace=False)
    return TwoLevelOp(k=int(ks[min(a, b)]), k2=int(ks[max(a, b)]), u2=q).embed(spec)
