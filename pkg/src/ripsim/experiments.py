"""Simulated measurement protocols: Ramsey, ZZ maps, tune-up, dephasing, GHZ."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from . import pauli
from .device import EffectiveModel
from .dynamics import dephasing_matrix, propagate, ramsey_weights
from .errors import ConfigError, Unreachable
from .metrics import coherence_limited_fidelity, state_fidelity
from .pulses import DriveSpec, PulseEnvelope, adiabatic_drive
from .sequences import EchoSchedule, build_schedule, run_schedule

PHOTON_LIMIT = 0.01


def parallel_map(fn, items, workers: int = 1) -> list:
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _check_qubit(model: EffectiveModel, qubit: int):
    if not 0 <= qubit < model.n_qubits:
        raise ConfigError(f"qubit index {qubit} outside 0..{model.n_qubits - 1}", key="qubit")


def _with_width(drive, width: float):
    if isinstance(drive, EchoSchedule):
        return drive.with_segment(_with_width(drive.steps[0].segment, width))
    env = drive.envelope
    if env.kind == "piecewise_samples":
        raise ConfigError("sampled envelopes have a fixed width", key="width_ns")
    return drive.with_envelope(PulseEnvelope(env.kind, env.amplitude, width))


def _with_detuning(drive, detuning: float):
    if isinstance(drive, EchoSchedule):
        return drive.with_segment(_with_detuning(drive.steps[0].segment, detuning))
    return DriveSpec(detuning, drive.envelope)


def _with_amplitude(drive, amplitude: complex):
    if isinstance(drive, EchoSchedule):
        return drive.with_segment(_with_amplitude(drive.steps[0].segment, amplitude))
    env = drive.envelope
    return drive.with_envelope(PulseEnvelope(env.kind, complex(amplitude), env.width))


def ramsey_probability(mu) -> np.ndarray:
    """Excited-state probability after the closing pi/2 pulse."""
    mu = np.asarray(mu)
    return 0.5 * (1 - np.sin(mu.real) * np.exp(-mu.imag))


# --- Ramsey -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RamseyCurve:
    times: np.ndarray
    p_up: np.ndarray
    n_resid: np.ndarray
    qubit: int
    drive: object
    mu: np.ndarray

    @property
    def p_down(self) -> np.ndarray:
        return 1.0 - self.p_up


def _ramsey_point(model, qubit, drive, decoherence, dt):
    """Final (mu, photons) of a Ramsey shot on ``qubit`` for one drive."""
    n = model.n_qubits
    e = 1 << qubit
    if isinstance(drive, EchoSchedule):
        res = run_schedule(model, drive, decoherence=decoherence, dt=dt)
        mu, alpha = res.mu[e, 0], res.final_alphas
    else:
        t2 = model.t2_star if decoherence else None
        traj, led = propagate(model, drive, dt=dt, t2=t2)
        mu, alpha = led.mu[e, 0], traj.final
    w = ramsey_weights(mu, qubit, n)
    return complex(mu), float(np.sum(w * np.abs(alpha) ** 2))


def ramsey(model: EffectiveModel, qubit: int, drive, decoherence: bool = False, widths=None, dt=None) -> RamseyCurve:
    """Ramsey fringe on ``qubit`` (zero-based) with the others in the ground state.

    Without ``widths`` the curve follows the phase during one run of
    ``drive`` (a single tone or an echo schedule). With ``widths`` each point
    is a separate run with that segment width. Decoherence uses T2* for a
    single tone and the echo times inside schedules.
    """
    _check_qubit(model, qubit)
    n = model.n_qubits
    e = 1 << qubit
    if widths is not None:
        widths = np.asarray(widths, dtype=float)
        pts = [_ramsey_point(model, qubit, _with_width(drive, w), decoherence, dt) for w in widths]
        mu = np.array([p[0] for p in pts])
        n_resid = np.array([p[1] for p in pts])
        times = widths
    elif isinstance(drive, EchoSchedule):
        res = run_schedule(model, drive, dt=dt, record_series=True)
        times, mu, alphas = res.times, res.mu_series[:, e], res.alpha_series
        if decoherence:
            mu = mu + 1j * times / model.t_echo[qubit]
        n_resid = np.sum(ramsey_weights(mu, qubit, n) * np.abs(alphas) ** 2, axis=-1)
    else:
        t2 = model.t2_star if decoherence else None
        traj, led = propagate(model, drive, dt=dt, t2=t2, record_series=True)
        times, mu = led.times, led.ref_series[:, e]
        n_resid = np.sum(ramsey_weights(mu, qubit, n) * np.abs(traj.alphas) ** 2, axis=-1)
    p_up = np.clip(ramsey_probability(mu), 0.0, 1.0)
    return RamseyCurve(np.asarray(times), p_up, np.asarray(n_resid), qubit, drive, np.asarray(mu))


@dataclass(frozen=True, eq=False)
class ZZMap:
    detunings: np.ndarray
    widths: np.ndarray
    p_up: np.ndarray  # (n_detunings, n_widths)
    n_resid: np.ndarray
    mu: np.ndarray
    qubit: int


def _map_row(detuning, model, qubit, drive, widths, decoherence, dt):
    curve = ramsey(model, qubit, _with_detuning(drive, detuning), decoherence, widths=widths, dt=dt)
    return curve.p_up, curve.n_resid, curve.mu


def zz_map(model, qubit, drive, detunings, widths, decoherence=False, dt=None, workers=1) -> ZZMap:
    """Ramsey probability over (detuning, segment width)."""
    _check_qubit(model, qubit)
    detunings = np.asarray(detunings, dtype=float)
    widths = np.asarray(widths, dtype=float)
    fn = partial(_map_row, model=model, qubit=qubit, drive=drive, widths=widths, decoherence=decoherence, dt=dt)
    rows = parallel_map(fn, detunings, workers)
    return ZZMap(
        detunings,
        widths,
        np.array([r[0] for r in rows]),
        np.array([r[1] for r in rows]),
        np.array([r[2] for r in rows]),
        qubit,
    )


# --- non-adiabatic threshold --------------------------------------------------


def residual_photons(model, drive, dt=None) -> float:
    """Sector-averaged photon number left after a tone or a schedule."""
    if isinstance(drive, EchoSchedule):
        return run_schedule(model, drive, dt=dt).residual_photons
    traj, _ = propagate(model, drive, dt=dt)
    return float(np.mean(np.abs(traj.final) ** 2))


def threshold_time(model, drive, widths, photon_limit=PHOTON_LIMIT, dt=None, resolution=None) -> float:
    """Shortest width beyond which every scanned run leaves < photon_limit photons.

    With ``resolution`` the interval after the last failing scan point is
    rescanned at that spacing.
    """
    widths = np.sort(np.asarray(widths, dtype=float))

    def photons(ws):
        return np.array([residual_photons(model, _with_width(drive, w), dt) for w in ws])

    bad = np.nonzero(photons(widths) > photon_limit)[0]
    if bad.size == 0:
        return float(widths[0])
    if bad[-1] == widths.size - 1:
        raise Unreachable("residual photons stay above the limit over the whole scan")
    lo, hi = widths[bad[-1]], widths[bad[-1] + 1]
    if resolution is None or hi - lo <= resolution:
        return float(hi)
    # hi is known to pass, so it closes the refined grid
    fine = np.append(np.arange(lo + resolution, hi - 0.5 * resolution, resolution), hi)
    fine_bad = np.nonzero(photons(fine[:-1]) > photon_limit)[0]
    return float(fine[fine_bad[-1] + 1] if fine_bad.size else fine[0])


@dataclass(frozen=True)
class ThresholdFit:
    detunings: np.ndarray
    thresholds: np.ndarray
    slope: float
    prefactor: float


def _threshold_row(detuning, model, drive, widths, photon_limit, dt, resolution):
    return threshold_time(model, _with_detuning(drive, detuning), widths, photon_limit, dt, resolution)


def threshold_scaling(
    model, drive, detunings, widths, photon_limit=PHOTON_LIMIT, dt=None, resolution=None, workers=1
) -> ThresholdFit:
    """Threshold width per detuning and its log-log power-law fit."""
    detunings = np.asarray(detunings, dtype=float)
    fn = partial(
        _threshold_row, model=model, drive=drive, widths=widths, photon_limit=photon_limit, dt=dt, resolution=resolution
    )
    th = np.array(parallel_map(fn, detunings, workers))
    slope, icpt = np.polyfit(np.log(np.abs(detunings)), np.log(th), 1)
    return ThresholdFit(detunings, th, float(slope), float(np.exp(icpt)))


# --- tune-up ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TuneUpResult:
    amplitude: complex
    width: float
    gate_time: float
    mu_target: complex
    residual_photons: float
    schedule: EchoSchedule


def _pair_mask(model, pair) -> int:
    i, j = pair
    if i == j:
        raise ConfigError("pair needs two different qubits", key="pair")
    for q in (i, j):
        _check_qubit(model, q)
    return (1 << i) | (1 << j)


def tune_up_cz(
    model: EffectiveModel,
    pair,
    drive: DriveSpec,
    mode: str = "amplitude",
    target_phase: float = math.pi / 2,
    max_time: float = 5e-6,
    tol: float = 1e-4,
    photon_limit: float = PHOTON_LIMIT,
    dt=None,
) -> TuneUpResult:
    """Calibrate the refocused ZZ schedule on ``pair`` to a CZ-equivalent phase.

    ``amplitude`` mode keeps the segment width and rescales the drive; the
    drive-induced phase scales exactly with |eps|^2 so one probe run fixes
    the amplitude. ``time`` mode keeps the amplitude and bisects on the
    segment width for the first crossing of the target phase.
    """
    mask = _pair_mask(model, pair)
    schedule = build_schedule(model.n_qubits, mask, drive)

    def run(sched):
        return run_schedule(model, sched, dt=dt)

    if mode == "amplitude":
        static = run(_with_amplitude(schedule, 0.0)).mu_target.real
        a0 = drive.envelope.amplitude
        driven = run(schedule).mu_target.real - static
        if a0 == 0 or driven == 0:
            raise Unreachable("the drive produces no ZZ phase")
        ratios = [(s * target_phase - static) / driven for s in (1, -1)]
        ratios = [r for r in ratios if r > 0]
        if not ratios:
            raise Unreachable("no amplitude reaches the target phase")
        amp = a0 * math.sqrt(min(ratios))
        tuned = _with_amplitude(schedule, amp)
        res = run(tuned)
        if abs(abs(res.mu_target.real) - target_phase) > tol:
            raise Unreachable(f"calibrated phase {res.mu_target.real:.6g} misses the target")
    elif mode == "time":
        k = len(schedule.steps)
        w_max = (max_time - (k - 1) * schedule.pi_duration) / k
        if w_max <= 0:
            raise Unreachable("max_time is shorter than the pi-pulse overhead")
        step = max(5e-9, w_max / 200)
        grid = np.arange(step, w_max + 0.5 * step, step)

        def phase(w):
            r = run(_with_width(schedule, w))
            return abs(r.mu_target.real) - target_phase, r

        found = None
        prev_w, prev_f = 0.0, -target_phase
        for w in grid:
            f, _ = phase(w)
            if prev_f < 0 <= f:
                lo, hi = prev_w, w
                for _ in range(100):
                    mid = 0.5 * (lo + hi)
                    f_mid, r_mid = phase(mid)
                    if abs(f_mid) <= tol:
                        break
                    if f_mid < 0:
                        lo = mid
                    else:
                        hi = mid
                if r_mid.residual_photons <= photon_limit:
                    found = mid
                    break
            prev_w, prev_f = w, f
        if found is None:
            raise Unreachable(f"no segment width below {w_max * 1e9:.0f} ns reaches the target phase")
        tuned = _with_width(schedule, found)
        res = run(tuned)
    else:
        raise ConfigError(f"unknown tune-up mode {mode!r}", key="mode")

    if res.residual_photons > photon_limit:
        raise Unreachable(f"{res.residual_photons:.3g} photons remain after the gate")
    seg = tuned.steps[0].segment
    return TuneUpResult(seg.envelope.amplitude, seg.duration, tuned.total_time, res.mu_target, res.residual_photons, tuned)


# --- measurement-induced dephasing ----------------------------------------------


@dataclass(frozen=True, eq=False)
class DephasingPoint:
    detuning: float
    amplitude: complex
    t2_induced: np.ndarray
    t2_effective: np.ndarray
    f_intrinsic: float
    f_limit: float
    induced_error: float
    gate_time: float
    residual_photons: float
    residual_dephasing: np.ndarray  # Im mu left by leftover photons with kappa = 0


def fit_decay_time(times, im_mu) -> float:
    """T2 from Im mu = t / T2 by least squares through the origin."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(im_mu, dtype=float)
    rate = float(np.dot(t, y) / np.dot(t, t))
    return math.inf if rate <= 0 else 1.0 / rate


def _dephasing_point(detuning, model, pair, width, amplitude_guess, dt):
    drive = adiabatic_drive(amplitude_guess, width, detuning)
    tuned = tune_up_cz(model, pair, drive, mode="amplitude", dt=dt)
    lossy = run_schedule(model, tuned.schedule, dt=dt)
    lossless = run_schedule(replace(model, kappa=0.0), tuned.schedule, dt=dt)
    n = model.n_qubits
    # cavity decay part of each single-excitation coherence, sampled when the
    # drive is off so the reversible photon overlap does not enter
    excess = (lossy.segment_mu - lossless.segment_mu).imag
    t2_ind = np.array([fit_decay_time(lossy.segment_ends, excess[:, 1 << q]) for q in range(n)])
    t2_int = model.t_echo
    t2_eff = 1.0 / (1.0 / t2_int + 1.0 / t2_ind)
    f_int = coherence_limited_fidelity(tuned.gate_time, model.t1, t2_int)
    f_eff = coherence_limited_fidelity(tuned.gate_time, model.t1, t2_eff)
    leftover = np.array([lossless.mu[1 << q, 0].imag for q in range(n)])
    return DephasingPoint(
        detuning,
        tuned.amplitude,
        t2_ind,
        t2_eff,
        f_int,
        f_eff,
        f_int - f_eff,
        tuned.gate_time,
        tuned.residual_photons,
        leftover,
    )


def dephasing_sweep(
    model: EffectiveModel,
    pair,
    detunings,
    total_pulse_time: float = 533.4e-9,
    amplitude_guess: float = 2 * math.pi * 30e6,
    dt=None,
    workers: int = 1,
) -> list[DephasingPoint]:
    """Per-detuning calibrated CZ with the induced dephasing it causes.

    The pulse time is split evenly over the schedule segments; each point
    recalibrates the amplitude, fits the cavity-decay part of Im mu of
    every single-excitation coherence to t / T2, and folds the result into
    the coherence limit.
    """
    _pair_mask(model, pair)
    segments = 2 ** (model.n_qubits - 1)
    fn = partial(
        _dephasing_point,
        model=model,
        pair=tuple(pair),
        width=total_pulse_time / segments,
        amplitude_guess=amplitude_guess,
        dt=dt,
    )
    return parallel_map(fn, list(np.asarray(detunings, dtype=float)), workers)


# --- GHZ ----------------------------------------------------------------------

GHZ_PAIRS = ((0, 1), (1, 2), (2, 3))
CZ_SEGMENT_TIMES = (203e-9, 203e-9, 173e-9)
SINGLE_QUBIT_TIME = 36.7e-9
NOISE_MODES = {"none": "none", "static": "static", "full": "full", "static_zz": "static", "static_zz+decoherence": "full"}


@dataclass(frozen=True, eq=False)
class GhzResult:
    rho: np.ndarray
    fidelity: float
    target: np.ndarray
    state: np.ndarray | None  # pure state when no damping was applied

    @property
    def off_ghz_population(self) -> float:
        d = np.real(np.diag(self.rho))
        return float(1.0 - d[0] - d[-1])

    @property
    def spurious_coherence(self) -> float:
        """Largest |rho_AB| with A or B outside the two GHZ sectors."""
        r = np.abs(self.rho).copy()
        keep = [0, r.shape[0] - 1]
        r[np.ix_(keep, keep)] = 0.0
        return float(r.max())


def ghz_target(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1 / math.sqrt(2)
    psi[-1] = -1j / math.sqrt(2)
    return psi


def _ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _layer(n, ops: dict) -> np.ndarray:
    """Tensor product with qubit 0 as the least significant index bit."""
    u = np.eye(1, dtype=complex)
    for q in reversed(range(n)):
        u = np.kron(u, ops.get(q, np.eye(2)))
    return u


def _cz_diag(n, a, b) -> np.ndarray:
    bits = pauli.bit_matrix(n)
    return np.where((bits[:, a] == 1) & (bits[:, b] == 1), -1.0, 1.0).astype(complex)


def _validate_chain(n, cz_order):
    pairs = [tuple(int(x) for x in p) for p in cz_order]
    if not pairs:
        raise ConfigError("cz_order is empty", key="cz_order")
    members = {pairs[0][0]}
    for a, b in pairs:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise ConfigError(f"invalid pair {(a, b)}", key="cz_order")
        if a not in members or b in members:
            raise ConfigError(f"pair {(a, b)} must extend the entangled set by one new qubit", key="cz_order")
        members.add(b)
    if len(members) != n:
        raise ConfigError("cz_order must reach every qubit", key="cz_order")
    return pairs


def ghz_sequence(
    model: EffectiveModel,
    cz_order=GHZ_PAIRS,
    noise: str = "none",
    cz_segment_times=None,
    single_qubit_time: float = SINGLE_QUBIT_TIME,
    pi_duration: float = 36.7e-9,
) -> GhzResult:
    """GHZ preparation from CZ gates and Y rotations.

    Qubits start in |0>; the first control gets Ry(pi/2) and the rest
    Ry(-pi/2). Each CZ(a, b) is followed by Ry(pi/2) on b, and a closing
    virtual S^dagger on the last target gives (|0..0> - i|1..1>)/sqrt(2).
    ``static`` applies the always-on ZZ during every single-qubit layer;
    ``full`` also damps coherences with T_echo during each refocused CZ
    and T2* during single-qubit layers.
    """
    mode = NOISE_MODES.get(noise)
    if mode is None:
        raise ConfigError(f"unknown noise model {noise!r}", key="noise")
    n = model.n_qubits
    pairs = _validate_chain(n, cz_order)
    times = tuple(cz_segment_times) if cz_segment_times is not None else CZ_SEGMENT_TIMES[: len(pairs)]
    if len(times) != len(pairs):
        raise ConfigError("one segment time per CZ is required", key="cz_segment_times")

    zz = np.exp(-1j * model.static_energies * single_qubit_time)
    d_t2s = dephasing_matrix(n, 1.0 / model.t2_star)
    d_echo = dephasing_matrix(n, 1.0 / model.t_echo)
    segments = 2 ** (n - 1)

    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0

    def single_layer(ops):
        nonlocal rho
        u = _layer(n, ops)
        rho = u @ rho @ u.conj().T
        if mode in ("static", "full"):
            rho = zz[:, None] * rho * zz.conj()[None, :]
        if mode == "full":
            rho = rho * np.exp(-single_qubit_time * d_t2s)

    root = pairs[0][0]
    single_layer({q: _ry(math.pi / 2 if q == root else -math.pi / 2) for q in range(n)})
    for (a, b), t in zip(pairs, times):
        c = _cz_diag(n, a, b)
        rho = c[:, None] * rho * c.conj()[None, :]
        if mode == "full":
            rho = rho * np.exp(-(segments * t + (segments - 1) * pi_duration) * d_echo)
        single_layer({b: _ry(math.pi / 2)})
    sdg = np.diag([1.0, -1j])
    u = _layer(n, {pairs[-1][1]: sdg})
    rho = u @ rho @ u.conj().T

    target = ghz_target(n)
    state = None
    if mode != "full":
        # rank one: any column with weight is the state up to a global phase
        k = int(np.argmax(np.real(np.diag(rho))))
        state = rho[:, k] / math.sqrt(rho[k, k].real)
    return GhzResult(rho, state_fidelity(rho, target), target, state)


__all__ = [
    "GHZ_PAIRS",
    "DephasingPoint",
    "GhzResult",
    "RamseyCurve",
    "ThresholdFit",
    "TuneUpResult",
    "ZZMap",
    "coherence_limited_fidelity",
    "dephasing_sweep",
    "fit_decay_time",
    "ghz_sequence",
    "ghz_target",
    "parallel_map",
    "ramsey",
    "ramsey_probability",
    "residual_photons",
    "threshold_scaling",
    "threshold_time",
    "tune_up_cz",
    "zz_map",
]
