"""Echo-refocused RIP schedules.

A schedule alternates drive segments with instantaneous X_pi masks. After
segment k the qubits sit in frame F_k (XOR of all earlier masks), so a
logical sector A occupies physical sector A ^ F_k and a Z string Q picks
up the sign (-1)^popcount(Q & F_k) in that segment. Choosing the frames as
the subgroup {F : popcount(F & P) even} makes every string other than the
target P cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import pauli
from .device import EffectiveModel
from .dynamics import dephasing_matrix, propagate
from .errors import ConfigError, UnsupportedTarget
from .pulses import DriveSpec, PulseEnvelope
from .units import TWO_PI

PI_DURATION = 36.7e-9


@dataclass(frozen=True, eq=False)
class EchoStep:
    """One drive segment followed by an X_pi on every qubit in ``pi_mask``."""

    segment: DriveSpec
    pi_mask: int = 0


@dataclass(frozen=True, eq=False)
class EchoSchedule:
    n_qubits: int
    target: int
    steps: tuple[EchoStep, ...]
    pi_duration: float = PI_DURATION

    @property
    def frames(self) -> list[int]:
        """Frame in force during each segment."""
        out, f = [], 0
        for step in self.steps:
            out.append(f)
            f ^= step.pi_mask
        return out

    @property
    def final_frame(self) -> int:
        f = 0
        for step in self.steps:
            f ^= step.pi_mask
        return f

    @property
    def total_time(self) -> float:
        # the closing mask only restores the frame and is not timed
        seg = sum(s.segment.duration for s in self.steps)
        return seg + max(len(self.steps) - 1, 0) * self.pi_duration

    @property
    def target_label(self) -> str:
        return pauli.string_label(self.target)

    def pi_counts(self) -> list[int]:
        return [sum((s.pi_mask >> q) & 1 for s in self.steps) for q in range(self.n_qubits)]

    def with_segment(self, segment: DriveSpec) -> EchoSchedule:
        steps = tuple(EchoStep(segment, s.pi_mask) for s in self.steps)
        return EchoSchedule(self.n_qubits, self.target, steps, self.pi_duration)


@dataclass(frozen=True, eq=False)
class SequenceResult:
    """Outcome of one schedule run.

    ``residual_photons`` is the final photon number averaged over the
    computational sectors, i.e. for an equal superposition input;
    ``max_sector_photons`` is the worst single sector.
    """

    mu_target: complex
    residual_photons: float
    total_time: float
    pauli_phases: np.ndarray  # complex theta per Z-string mask
    mu: np.ndarray  # logical pairwise phases
    final_alphas: np.ndarray  # physical labels, frame restored
    times: np.ndarray | None = None
    mu_series: np.ndarray | None = None  # logical mu[:, 0] over times
    max_sector_photons: float = 0.0
    segment_ends: np.ndarray | None = None  # clock time at the end of each segment
    segment_mu: np.ndarray | None = None  # logical mu[:, 0] at those times
    alpha_series: np.ndarray | None = None  # logical labels over times

    def pauli_phase(self, mask) -> complex:
        n = int(round(math.log2(len(self.pauli_phases))))
        return complex(self.pauli_phases[pauli.parse_zstring(mask, n)])


def _gray_masks(n: int, target: int) -> list[int]:
    partners = [q for q in range(n) if (target >> q) & 1]
    basis = [1 << q for q in range(n) if not (target >> q) & 1]
    basis += [(1 << partners[0]) | (1 << p) for p in partners[1:]]
    basis.sort()
    count = 1 << len(basis)
    masks = []
    for k in range(1, count + 1):
        # bit flipped between gray(k-1) and gray(k); the last step closes the cycle
        g_prev, g_next = (k - 1) ^ ((k - 1) >> 1), (k % count) ^ ((k % count) >> 1)
        flipped = g_prev ^ g_next
        m = 0
        for i, b in enumerate(basis):
            if (flipped >> i) & 1:
                m ^= b
        masks.append(m)
    return masks


def build_schedule(n_qubits: int, target, segment: DriveSpec, pi_duration: float = PI_DURATION) -> EchoSchedule:
    """Echo schedule with 2^(n-1) identical segments isolating one Z string."""
    if n_qubits not in (2, 3, 4):
        raise UnsupportedTarget(f"schedules need 2 to 4 qubits, got {n_qubits}")
    mask = pauli.parse_zstring(target, n_qubits)
    if mask >> n_qubits:
        raise UnsupportedTarget(f"target {target!r} acts outside {n_qubits} qubits")
    if pauli.popcount(mask) < 2:
        raise UnsupportedTarget("target must have weight 2 to 4")
    steps = tuple(EchoStep(segment, m) for m in _gray_masks(n_qubits, mask))
    return EchoSchedule(n_qubits, mask, steps, pi_duration)


def cancellation_report(schedule: EchoSchedule) -> dict[str, int]:
    """Signed segment count per non-identity Z string."""
    n = schedule.n_qubits
    frames = schedule.frames
    out = {}
    for q in range(1, 2**n):
        out[pauli.string_label(q)] = int(sum((-1) ** pauli.popcount(q & f) for f in frames))
    return out


def is_valid(schedule: EchoSchedule) -> bool:
    if not schedule.steps or schedule.final_frame != 0:
        return False
    report = cancellation_report(schedule)
    target = schedule.target_label
    if report.get(target, 0) == 0:
        return False
    return all(v == 0 for k, v in report.items() if k != target)


def run_schedule(
    model: EffectiveModel,
    schedule: EchoSchedule,
    decoherence: bool = False,
    t2=None,
    dt: float | None = None,
    record_series: bool = False,
) -> SequenceResult:
    """Propagate a schedule, carrying cavity states across the pi masks.

    Phases are accumulated in logical labels. With ``decoherence`` the
    per-qubit ``t2`` (defaults to the model's echo times) acts over the
    full schedule time including the pi slots.
    """
    n = model.n_qubits
    if schedule.n_qubits != n:
        raise ConfigError("schedule and model qubit counts differ", key="n_qubits")
    if not is_valid(schedule):
        raise ConfigError("schedule fails the cancellation check", key="schedule")
    idx = np.arange(2**n)
    alpha = np.zeros(2**n, dtype=complex)
    mu = np.zeros((2**n, 2**n), dtype=complex)
    times, series, alphas = [], [], []
    ends, end_mu = [], []
    clock, frame = 0.0, 0
    for step in schedule.steps:
        traj, led = propagate(model, step.segment, initial=alpha, dt=dt, record_series=record_series, ref=frame)
        phys = idx ^ frame
        if record_series:
            times.append(clock + led.times)
            series.append(mu[:, 0][None, :] + led.ref_series[:, phys])
            alphas.append(traj.alphas[:, phys])
        mu += led.mu[np.ix_(phys, phys)]
        ends.append(clock + step.segment.duration)
        end_mu.append(mu[:, 0].copy())
        alpha = traj.final[idx ^ step.pi_mask]
        frame ^= step.pi_mask
        clock += step.segment.duration + schedule.pi_duration
    total = schedule.total_time
    if decoherence:
        t2 = model.t_echo if t2 is None else t2
        mu = mu + 1j * total * dephasing_matrix(n, 1.0 / np.asarray(t2, dtype=float))
    theta = pauli.walsh_coefficients(mu[:, 0], n)
    return SequenceResult(
        mu_target=complex(2 * theta[schedule.target]),
        residual_photons=float(np.mean(np.abs(alpha) ** 2)),
        max_sector_photons=float(np.max(np.abs(alpha) ** 2)),
        segment_ends=np.array(ends),
        segment_mu=np.array(end_mu),
        total_time=total,
        pauli_phases=theta,
        mu=mu,
        final_alphas=alpha,
        times=np.concatenate(times) if record_series else None,
        mu_series=np.concatenate(series) if record_series else None,
        alpha_series=np.concatenate(alphas) if record_series else None,
    )


# text export: one step per line, "RIP <width_ns> <amp_mhz> <detuning_mhz>" or "PI <mask>"


def export_schedule(schedule: EchoSchedule) -> str:
    lines = [
        "# ripsim echo schedule",
        f"# n_qubits {schedule.n_qubits}",
        f"# target {schedule.target_label}",
        f"# pi_ns {schedule.pi_duration * 1e9:.9g}",
    ]
    kinds = {s.segment.envelope.kind for s in schedule.steps}
    if kinds - {"adiabatic_cosine", "constant"} or len(kinds) > 1:
        raise ConfigError("export needs one analytic envelope kind", key="kind")
    if kinds:
        lines.append(f"# kind {kinds.pop()}")
    for s in schedule.steps:
        env = s.segment.envelope
        amp = env.amplitude.real / TWO_PI / 1e6
        lines.append(f"RIP {env.width * 1e9:.9g} {amp:.9g} {s.segment.detuning / TWO_PI / 1e6:.9g}")
        lines.append(f"PI {s.pi_mask}")
    return "\n".join(lines) + "\n"


def parse_schedule(text: str) -> EchoSchedule:
    meta = {"kind": "adiabatic_cosine", "pi_ns": str(PI_DURATION * 1e9)}
    steps, pending = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2:
                meta[parts[0]] = parts[1]
            continue
        parts = line.split()
        try:
            if parts[0] == "RIP" and len(parts) == 4:
                if pending is not None:
                    steps.append(EchoStep(pending, 0))
                width, amp, det = (float(x) for x in parts[1:])
                env = PulseEnvelope(meta["kind"], complex(amp * TWO_PI * 1e6), width * 1e-9)
                pending = DriveSpec(det * TWO_PI * 1e6, env)
            elif parts[0] == "PI" and len(parts) == 2 and pending is not None:
                steps.append(EchoStep(pending, int(parts[1])))
                pending = None
            else:
                raise ValueError
        except ValueError:
            raise ConfigError(f"bad schedule line {lineno}: {raw!r}", key=f"line {lineno}") from None
    if pending is not None:
        steps.append(EchoStep(pending, 0))
    try:
        n = int(meta["n_qubits"])
        target = pauli.parse_zstring(meta["target"], n)
    except KeyError as exc:
        raise ConfigError(f"missing header {exc.args[0]}", key=exc.args[0]) from None
    return EchoSchedule(n, target, tuple(steps), float(meta["pi_ns"]) * 1e-9)
