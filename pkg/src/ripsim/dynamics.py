"""Closed-form cavity and phase dynamics per computational sector.

In the frame rotating with the drive and the single-qubit terms, sector
``s`` sees a linear damped cavity,

    d alpha_s / dt = -Dt_s alpha_s - (i/2) eps(t),
    Dt_s = i (chi_s - Delta) + kappa / 2,

with chi_s the cavity pull of sector s relative to the all-ground sector
and Delta the drive detuning from the all-ground dressed cavity. The
pairwise phase is

    mu_{A,B}(t) = (chi_B - chi_A) int_0^t alpha_B^* alpha_A dt'
                  - t (E_A - E_B)

where E is the static ZZ energy. ``Im mu`` is dephasing; the Ramsey
coherence between A and B is proportional to exp(i mu_{A,B}).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from . import pauli
from .device import EffectiveModel
from .errors import ResonantDrive, StepTooLarge
from .pulses import DriveSpec

DEFAULT_DT = 0.1e-9

# cubic interpolation of the envelope on nodes u = 0, 1/3, 2/3, 1 of each step
_NODES = np.array([0.0, 1 / 3, 2 / 3, 1.0])
_TO_MONOMIAL = np.linalg.inv(np.vander(_NODES, 4, increasing=True))


@dataclass(frozen=True, eq=False)
class SectorTrajectory:
    labels: tuple[str, ...]
    times: np.ndarray
    alphas: np.ndarray  # (T, S)
    delta_tilde: np.ndarray  # (S,)
    chi_sector: np.ndarray  # (S,)

    @property
    def final(self) -> np.ndarray:
        return self.alphas[-1]


@dataclass(frozen=True, eq=False)
class PhaseLedger:
    """Pairwise phases accumulated over one propagation.

    ``mu[A, B]`` is the end value; ``ref_series[t, s]`` tracks
    ``mu[s, ref]`` over ``times`` when a series was requested.
    """

    labels: tuple[str, ...]
    mu: np.ndarray
    duration: float
    times: np.ndarray | None = None
    ref_series: np.ndarray | None = None

    @property
    def n_qubits(self) -> int:
        return len(self.labels[0])

    def theta(self) -> np.ndarray:
        """Z-string coefficients of the accumulated phase, indexed by mask."""
        return pauli.walsh_coefficients(self.mu[:, 0], self.n_qubits)

    def pauli_phase(self, mask) -> complex:
        return complex(self.theta()[pauli.parse_zstring(mask, self.n_qubits)])


def phi_functions(z, kmax=4):
    """phi_1..phi_kmax of complex z: phi_k(z) = sum_j z^j / (j + k)!."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((kmax,) + z.shape, dtype=complex)
    small = np.abs(z) < 0.5
    if np.any(small):
        zs = z[small]
        for k in range(1, kmax + 1):
            acc = np.zeros_like(zs)
            term = np.full_like(zs, 1.0 / math.factorial(k))
            for j in range(30):
                acc += term
                term = term * zs / (j + k + 1)
            out[k - 1][small] = acc
    if np.any(~small):
        zl = z[~small]
        prev = np.exp(zl)
        for k in range(1, kmax + 1):
            prev = (prev - 1.0 / math.factorial(k - 1)) / zl
            out[k - 1][~small] = prev
    return out


def delta_tilde(model: EffectiveModel, detuning: float) -> np.ndarray:
    return 1j * (model.chi_sector - detuning) + model.kappa / 2


def max_step(model: EffectiveModel, drive: DriveSpec) -> float:
    dt_ = delta_tilde(model, drive.detuning)
    bound = drive.duration / 200
    top = np.max(np.abs(dt_))
    if top > 0:
        bound = min(bound, 1 / (20 * top))
    return bound


def dephasing_matrix(n: int, rates) -> np.ndarray:
    """D[A, B] = sum_q |a_q - b_q| * rate_q."""
    bits = pauli.bit_matrix(n)
    diff = np.abs(bits[:, None, :] - bits[None, :, :])
    return diff @ np.asarray(rates, dtype=float)


def propagate(
    model: EffectiveModel,
    drive: DriveSpec,
    initial=None,
    duration: float | None = None,
    dt: float | None = None,
    t2=None,
    static: bool = True,
    record_series: bool = False,
    ref: int = 0,
) -> tuple[SectorTrajectory, PhaseLedger]:
    """Propagate every sector's coherent amplitude and the phase ledger.

    The amplitude update is exact for an envelope that is cubic within a
    step (integrating factor with phi functions), and the resulting linear
    recurrence is run per sector with ``lfilter``. The phase integral uses
    the trapezoidal rule on the stored samples. ``t2`` (per-qubit times)
    adds the pure-dephasing imaginary part. With ``record_series`` the
    running value of ``mu[:, ref]`` is kept for every stored time.
    """
    n = model.n_qubits
    ns = 2**n
    labels = pauli.sector_labels(n)
    duration = drive.duration if duration is None else float(duration)
    if duration <= 0:
        raise ValueError("duration must be positive")

    dtil = delta_tilde(model, drive.detuning)
    limit = max_step(model, drive)
    if dt is None:
        dt = min(DEFAULT_DT, limit)
    elif dt > limit * (1 + 1e-9):
        raise StepTooLarge(f"dt={dt:.3g}s exceeds the stability bound {limit:.3g}s")
    steps = max(1, math.ceil(duration / dt - 1e-9))
    h = duration / steps
    times = np.linspace(0.0, duration, steps + 1)

    if initial is None:
        alpha0 = np.zeros(ns, dtype=complex)
    elif isinstance(initial, SectorTrajectory):
        alpha0 = np.asarray(initial.final, dtype=complex)
    else:
        alpha0 = np.asarray(initial, dtype=complex).reshape(ns)

    env = drive.envelope.evaluate(np.linspace(0.0, duration, 3 * steps + 1))
    nodes = np.stack([env[0:-1:3], env[1::3], env[2::3], env[3::3]], axis=1)
    poly = nodes @ _TO_MONOMIAL.T  # (steps, 4) monomial coefficients in u

    z = -dtil * h
    phis = phi_functions(z)
    # int_0^1 exp(z (1-u)) u^k du = k! phi_{k+1}(z)
    kern = np.stack([math.factorial(k) * phis[k] for k in range(4)])  # (4, S)
    forcing = -0.5j * h * (poly @ kern)  # (steps, S)
    decay = np.exp(z)

    alphas = np.empty((steps + 1, ns), dtype=complex)
    alphas[0] = alpha0
    for s in range(ns):
        alphas[1:, s] = lfilter([1.0], [1.0, -decay[s]], forcing[:, s], zi=[decay[s] * alpha0[s]])[0]

    w = np.full(steps + 1, h)
    w[0] = w[-1] = h / 2
    gram = (alphas * w[:, None]).T @ alphas.conj()  # int alpha_A alpha_B^*
    chi = model.chi_sector
    dchi = chi[None, :] - chi[:, None]
    mu = dchi * gram

    energies = model.static_energies if static else np.zeros(ns)
    mu = mu - duration * (energies[:, None] - energies[None, :])
    deph = None
    if t2 is not None:
        deph = dephasing_matrix(n, 1.0 / np.asarray(t2, dtype=float))
        mu = mu + 1j * duration * deph

    series = None
    if record_series:
        f = alphas * alphas[:, ref : ref + 1].conj()  # alpha_s alpha_ref^*
        cum = np.zeros_like(f)
        cum[1:] = np.cumsum(0.5 * h * (f[1:] + f[:-1]), axis=0)
        series = (chi[ref] - chi)[None, :] * cum
        series = series - times[:, None] * (energies - energies[ref])[None, :]
        if deph is not None:
            series = series + 1j * times[:, None] * deph[:, ref][None, :]

    traj = SectorTrajectory(labels, times, alphas, dtil, chi)
    ledger = PhaseLedger(labels, mu, duration, times if record_series else None, series)
    return traj, ledger


def steady_state_alpha(model: EffectiveModel, eps0: complex, detuning: float) -> np.ndarray:
    return -0.5j * eps0 / delta_tilde(model, detuning)


def photon_number(traj: SectorTrajectory, weights, ledger: PhaseLedger | None = None) -> np.ndarray:
    """<n>(t) = sum_s w_s(t) |alpha_s(t)|^2 for sector weights (S,) or (T, S)."""
    w = np.asarray(weights, dtype=float)
    total = w.sum(axis=-1)
    if not np.allclose(total, 1.0, atol=1e-9):
        raise ValueError("sector weights must be normalized")
    return np.sum(w * np.abs(traj.alphas) ** 2, axis=-1)


def ramsey_weights(mu, qubit: int, n: int, ground: int = 0) -> np.ndarray:
    """Weights on the two Ramsey sectors for phase ``mu`` (scalar or series).

    The excited sector carries the excited-state probability (1 - sin mu)/2.
    """
    m = np.real(np.asarray(mu))
    w = np.zeros(m.shape + (2**n,))
    w[..., ground] = 0.5 * (1 + np.sin(m))
    w[..., ground ^ (1 << qubit)] = 0.5 * (1 - np.sin(m))
    return w


def _effective_chi(model: EffectiveModel) -> float:
    """Positive per-excitation shift entering the closed-form rates."""
    chi = -np.asarray(model.chi)
    mean = float(np.mean(chi))
    if mean != 0 and np.ptp(chi) > 0.2 * abs(mean):
        warnings.warn("qubit Stark shifts differ by more than 20%; using their mean", stacklevel=3)
    return mean


def _check_resonance(model, detuning, chi, n):
    for k in range(n + 1):
        d = abs(detuning + k * chi)
        if d == 0 or d < model.kappa:
            raise ResonantDrive(f"drive is within kappa of the {k}-excitation cavity line")


def rates_by_enumeration(n: int, eps0: complex, chi: float, detuning: float) -> dict:
    """Identical-qubit steady-state Z-string rates by direct sector sum."""
    e2 = abs(eps0) ** 2
    exc = pauli.excitations(n)
    theta_dot = -e2 / (4 * (detuning + chi * exc))
    out = {}
    for w, key in ((2, "rate_zz"), (3, "rate_zzz"), (4, "rate_zzzz")):
        if w > n:
            out[key] = 0.0
        else:
            out[key] = float(np.mean(pauli.z_signs((1 << w) - 1, n) * theta_dot))
    return out


def steady_state_rates(model: EffectiveModel, eps0: complex, detuning: float) -> dict:
    """Z-string phase rates under a constant tone, identical-qubit closed forms (rad/s)."""
    chi = _effective_chi(model)
    n = model.n_qubits
    _check_resonance(model, detuning, chi, max(n, 4))
    if n != 4:
        return rates_by_enumeration(n, eps0, chi, detuning)
    e2 = abs(eps0) ** 2
    d = detuning
    return {
        "rate_zz": -e2 * chi**2 / (8 * d * (d + 2 * chi) * (d + 4 * chi)),
        "rate_zzz": -3 * e2 * chi**3 / (16 * d * (d + chi) * (d + 3 * chi) * (d + 4 * chi)),
        "rate_zzzz": -3
        * e2
        * chi**4
        / (8 * d * (d + chi) * (d + 2 * chi) * (d + 3 * chi) * (d + 4 * chi)),
    }


def dephasing_rate(model: EffectiveModel, eps0: complex, detuning: float) -> float:
    """Steady-state decay rate of the all-ground / all-excited coherence."""
    chi = _effective_chi(model)
    n = model.n_qubits
    _check_resonance(model, detuning, chi, max(n, 4))
    e2 = abs(eps0) ** 2
    span = n * chi
    return model.kappa * e2 * span**2 / (8 * detuning**2 * (detuning + span) ** 2)
