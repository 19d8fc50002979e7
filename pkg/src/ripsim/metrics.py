"""Benchmarking and state-fidelity arithmetic."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import DomainError, InvalidDensityMatrix


def _check_inputs(alpha, d, n_c):
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha={alpha} outside [0, 1]")
    if d < 2:
        raise DomainError(f"dimension d={d} must be at least 2")
    if n_c <= 0:
        raise DomainError(f"generators per Clifford n_c={n_c} must be positive")


def f_c_from_alpha(alpha: float, d: int = 4) -> float:
    """Average fidelity per Clifford from the RB decay exponent."""
    _check_inputs(alpha, d, 1.0)
    return 1.0 - (d - 1) * (1.0 - alpha) / d


def f_g_from_alpha(alpha: float, d: int = 4, n_c: float = 1.5) -> float:
    """Fidelity per generator, 1 - (d-1)(1 - alpha^(1/n_c))/d."""
    _check_inputs(alpha, d, n_c)
    return 1.0 - (d - 1) * (1.0 - alpha ** (1.0 / n_c)) / d


@dataclass(frozen=True)
class RbSummary:
    alpha: float
    d: int = 4
    n_c: float = 1.5

    def __post_init__(self):
        _check_inputs(self.alpha, self.d, self.n_c)

    @property
    def f_c(self) -> float:
        return f_c_from_alpha(self.alpha, self.d)

    @property
    def f_g(self) -> float:
        return f_g_from_alpha(self.alpha, self.d, self.n_c)


def average_gate_fidelity(f_pro: float, d: int) -> float:
    return (d * f_pro + 1.0) / (d + 1.0)


def state_fidelity(rho, psi, atol: float = 1e-8) -> float:
    """<psi|rho|psi> for a density matrix and a normalized pure state."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex).ravel()
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] != psi.size:
        raise InvalidDensityMatrix(f"shape {rho.shape} does not match state of size {psi.size}")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise InvalidDensityMatrix("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise InvalidDensityMatrix(f"trace {np.trace(rho).real:.12g} differs from 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -atol:
        raise InvalidDensityMatrix("density matrix has a negative eigenvalue")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > atol:
        raise InvalidDensityMatrix("target state is not normalized")
    f = float(np.vdot(psi, rho @ psi).real)
    return min(max(f, 0.0), 1.0)


@dataclass(frozen=True)
class Table2Row:
    qubit_detuning_ghz: float
    pair: str
    t_gate_ns: float
    zeta_khz: float
    f_coh: float
    f_c: float
    f_c_err: float
    f_g: float
    f_g_err: float


def load_table2() -> list[Table2Row]:
    """Measured two-qubit RB results shipped with the package."""
    text = resources.files("ripsim").joinpath("data/table2.csv").read_text()
    rows = []
    for rec in csv.DictReader(text.splitlines()):
        rows.append(Table2Row(**{k: (v if k == "pair" else float(v)) for k, v in rec.items()}))
    return rows


def coherence_limited_fidelity(gate_time: float, t1, t2, worst: bool = False) -> float:
    """Average gate fidelity when only T1 and T2 act during ``gate_time``.

    Each qubit contributes a process fidelity (1 + 2 e^(-t/T2) + e^(-t/T1)) / 4.
    Pass the worst measured times per qubit; with ``worst`` every qubit
    additionally takes the smallest T1 and T2 of the set.
    """
    t1 = np.atleast_1d(np.asarray(t1, dtype=float))
    t2 = np.atleast_1d(np.asarray(t2, dtype=float))
    if t1.shape != t2.shape:
        raise DomainError("t1 and t2 must list the same qubits")
    if np.any(t1 <= 0) or np.any(t2 <= 0) or gate_time < 0:
        raise DomainError("coherence times must be positive and the gate time non-negative")
    if worst:
        t1 = np.full_like(t1, t1.min())
        t2 = np.full_like(t2, t2.min())
    f_pro = float(np.prod((1 + 2 * np.exp(-gate_time / t2) + np.exp(-gate_time / t1)) / 4))
    return average_gate_fidelity(f_pro, 2**t1.size)
