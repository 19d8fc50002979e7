"""Static effective description of N transmons on one bus cavity.

Frequencies are angular (rad/s) throughout. Anharmonicities are signed
(negative for transmons). A qubit may be specified either by its bus
coupling ``g`` or by a measured dispersive shift ``chi_override``; in the
latter case ``g`` is back-solved from the dispersive pull of the cavity.

Two routes to the diagonal multi-qubit coefficients live here:

* :func:`compute_couplings` -- closed-form exchange couplings, Stark shifts
  and dressed frequencies, plus sector energies from fourth-order
  Rayleigh-Schroedinger perturbation theory in ``g`` on the full
  qubit-cavity Hamiltonian;
* :func:`exact_dressed_energies` -- direct diagonalization of the truncated
  Hamiltonian, used as the validation oracle.

:func:`exchange_zeta` keeps the qubit-only route (second order in the
exchange couplings ``J``) for comparison.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import pauli
from .errors import (
    ConfigError,
    DegenerateQubits,
    DispersiveRegimeViolation,
    TruncationTooSmall,
)

INF = math.inf


@dataclass(frozen=True)
class QubitParams:
    omega: float
    delta: float
    g: float | None = None
    chi_override: float | None = None
    t1: float = INF
    t2_star: float = INF
    t_echo: float = INF
    label: str = ""

    def __post_init__(self):
        for name in ("t1", "t2_star", "t_echo"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive", key=name)
        if math.isfinite(self.t1) and self.t2_star > 2 * self.t1 * 1.01:
            raise ConfigError("t2_star exceeds 2*t1", key="t2_star")
        if self.g is None and self.chi_override is None:
            raise ConfigError("qubit needs g or chi_override", key="g")
        if not self.omega > 0:
            raise ConfigError("qubit frequency must be positive", key="omega")


@dataclass(frozen=True)
class CavityParams:
    omega_r: float
    kappa: float = 0.0

    def __post_init__(self):
        if not self.omega_r > 0:
            raise ConfigError("cavity frequency must be positive", key="omega_r")
        if self.kappa < 0:
            raise ConfigError("kappa must be non-negative", key="kappa")


@dataclass(frozen=True)
class DeviceConfig:
    qubits: tuple[QubitParams, ...]
    cavity: CavityParams
    # |omega - omega_r| must exceed dispersive_ratio * |g|
    dispersive_ratio: float = 10.0
    # dressed qubit frequencies must differ by more than degeneracy_ratio * max|J|
    degeneracy_ratio: float = 10.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if not 1 <= len(self.qubits) <= 4:
            raise ConfigError("between 1 and 4 qubits are supported", key="qubit")

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def subset(self, indices) -> DeviceConfig:
        """Device restricted to the listed (zero-based) qubits."""
        return replace(self, qubits=tuple(self.qubits[i] for i in indices))

    def couplings(self) -> np.ndarray:
        return np.array([resolve_coupling(q, self.cavity) for q in self.qubits])


# --- closed-form coefficients -------------------------------------------------


def j_coupling(gi, gj, wi, wj, di, dj, wr, l, m):
    """Exchange coupling between transition l<->l+1 of qubit i and m<->m+1 of j."""
    return gi * gj * (wi + wj + l * di + m * dj - 2 * wr) / (
        2 * (wi + l * di - wr) * (wj + m * dj - wr)
    )


def stark_shift(g, w, d, wr, k):
    """Cavity-photon Stark shift of transmon level k."""
    return g**2 * (d - w + wr) / ((w + k * d - wr) * (w + (k - 1) * d - wr))


def dressed_frequency(g, w, d, wr, k):
    return k * w + 0.5 * d * k * (k - 1) + k * g**2 / (w + (k - 1) * d - wr)


def dispersive_pull_per_g2(w, d, wr):
    """(chi_1 - chi_0) / g**2: cavity pull per qubit excitation."""
    d0 = w - wr
    return 2 * d / (d0 * (d0 + d))


def resolve_coupling(q: QubitParams, cav: CavityParams) -> float:
    if q.chi_override is None:
        return float(q.g)
    per = dispersive_pull_per_g2(q.omega, q.delta, cav.omega_r)
    if per == 0 or not math.isfinite(per):
        raise ConfigError("cannot back-solve g from chi", key="chi_mhz")
    return math.sqrt(abs(q.chi_override) / abs(per))


# --- bare Hamiltonian and perturbation theory ---------------------------------


def _block_basis(n, levels, photons, n_exc):
    """Bare states (transmon levels, photons) with total excitation n_exc."""
    out = []
    for lv in itertools.product(range(levels), repeat=n):
        p = n_exc - sum(lv)
        if 0 <= p <= photons:
            out.append((lv, p))
    return out


def _bare_matrices(omega, delta, g, wr, basis, ref=0.0):
    """Diagonal energies (minus ``ref``) and coupling matrix of the RWA Hamiltonian."""
    index = {b: k for k, b in enumerate(basis)}
    e0 = np.array(
        [
            wr * p + sum(w * k + 0.5 * d * k * (k - 1) for w, d, k in zip(omega, delta, lv))
            for lv, p in basis
        ]
    ) - ref
    v = np.zeros((len(basis), len(basis)))
    for a, (lv, p) in enumerate(basis):
        for q, k in enumerate(lv):
            if k == 0:
                continue
            lower = lv[:q] + (k - 1,) + lv[q + 1 :]
            b = index.get((lower, p + 1))
            if b is not None:
                v[a, b] = v[b, a] = g[q] * math.sqrt(k * (p + 1))
    return e0, v


def _rspt4(e0, v, n, scale):
    """Energy of state n to fourth order (odd orders vanish: V is off-diagonal)."""
    vn = v[:, n]
    de = e0[n] - e0
    reach = (np.abs(vn) > 0) | (np.abs(v @ np.abs(vn)) > 0)
    reach[n] = False
    if np.any(np.abs(de[reach]) < 1e-12 * scale):
        raise DegenerateQubits("resonant intermediate state in perturbation theory")
    r = np.zeros_like(de)
    r[reach] = 1.0 / de[reach]
    e2 = np.sum(vn**2 * r)
    vu = v @ (r * vn)
    e4 = np.sum(r * vu**2) - e2 * np.sum(vn**2 * r**2)
    return e0[n] + e2 + e4, e2


def _sector_energies(omega, delta, g, wr, photons_in_sector, order=4):
    """Perturbative energies of |s, p> for all computational sectors s."""
    n = len(omega)
    scale = max(np.max(np.abs(omega)), wr)
    out = np.zeros(2**n)
    blocks = {}
    for s in range(2**n):
        lv = tuple(int(b) for b in pauli.bit_matrix(n)[s])
        n_exc = sum(lv) + photons_in_sector
        if n_exc not in blocks:
            basis = _block_basis(n, 4, n_exc, n_exc)
            blocks[n_exc] = basis, *_bare_matrices(omega, delta, g, wr, basis)
        basis, e0, v = blocks[n_exc]
        k = basis.index((lv, photons_in_sector))
        e_full, e2 = _rspt4(e0, v, k, scale)
        out[s] = e_full if order == 4 else e0[k] + e2
    return out


# --- effective model ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EffectiveModel:
    """Effective diagonal description consumed by the dynamics.

    ``xi``/``zeta2``/``offset`` hold the zero-photon coefficients of
    ``offset + sum_i xi_i Z_i + sum_{i<j} zeta2_ij Z_i Z_j``;
    ``one_photon`` holds the same triple for the one-photon sector.
    ``chi`` is the signed cavity pull per qubit excitation (chi_1 - chi_0).
    """

    chi: np.ndarray
    kappa: float = 0.0
    xi: np.ndarray | None = None
    zeta2: np.ndarray | None = None
    offset: float = 0.0
    one_photon: tuple | None = None
    j_couplings: np.ndarray | None = None
    stark_shifts: np.ndarray | None = None
    dressed_freqs: np.ndarray | None = None
    g: np.ndarray | None = None
    omega: np.ndarray | None = None
    delta: np.ndarray | None = None
    omega_r: float | None = None
    t1: np.ndarray | None = None
    t2_star: np.ndarray | None = None
    t_echo: np.ndarray | None = None
    labels: tuple[str, ...] = ()
    config: DeviceConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=float)
        n = chi.size
        object.__setattr__(self, "chi", chi)
        defaults = {
            "xi": np.zeros(n),
            "zeta2": np.zeros((n, n)),
            "t1": np.full(n, INF),
            "t2_star": np.full(n, INF),
            "t_echo": np.full(n, INF),
        }
        for name, default in defaults.items():
            value = getattr(self, name)
            value = default if value is None else np.asarray(value, dtype=float)
            object.__setattr__(self, name, value)
        z = self.zeta2
        if z.shape != (n, n) or not np.allclose(z, z.T, rtol=0, atol=0):
            raise ConfigError("zeta2 must be a symmetric n x n array", key="zeta2")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"Q{i + 1}" for i in range(n)))

    @property
    def n_qubits(self) -> int:
        return self.chi.size

    @property
    def zeta3(self) -> np.ndarray:
        # weight-3 terms vanish identically at this order
        n = self.n_qubits
        return np.zeros((n, n, n))

    @property
    def zeta4(self) -> float:
        return 0.0

    @cached_property
    def chi_sector(self) -> np.ndarray:
        """Stark shift of each sector relative to the all-ground sector."""
        return pauli.bit_matrix(self.n_qubits) @ self.chi

    @cached_property
    def static_energies(self) -> np.ndarray:
        """Diagonal of sum_{i<j} zeta_ij Z_i Z_j (zero photons)."""
        return pauli.pair_sum_diagonal(self.zeta2)

    @property
    def dressed_cavity(self) -> float | None:
        if self.omega_r is None or self.stark_shifts is None:
            return None
        return self.omega_r + float(np.sum(self.stark_shifts[:, 0]))

    def with_zeta(self, zeta2) -> EffectiveModel:
        return replace(self, zeta2=np.asarray(zeta2, dtype=float))

    def subset(self, indices) -> EffectiveModel:
        idx = list(indices)
        pick = lambda a: None if a is None else np.asarray(a)[idx]
        return EffectiveModel(
            chi=self.chi[idx],
            kappa=self.kappa,
            xi=self.xi[idx],
            zeta2=self.zeta2[np.ix_(idx, idx)],
            t1=self.t1[idx],
            t2_star=self.t2_star[idx],
            t_echo=self.t_echo[idx],
            labels=tuple(self.labels[i] for i in idx),
            omega_r=self.omega_r,
            stark_shifts=pick(self.stark_shifts),
            g=pick(self.g),
            omega=pick(self.omega),
            delta=pick(self.delta),
        )

    @classmethod
    def synthetic(cls, chi, kappa=0.0, zeta2=None, **kw) -> EffectiveModel:
        """Model from directly specified coefficients (no device)."""
        return cls(chi=np.atleast_1d(np.asarray(chi, dtype=float)), kappa=kappa, zeta2=zeta2, **kw)


def compute_couplings(config: DeviceConfig) -> EffectiveModel:
    qubits = config.qubits
    cav = config.cavity
    n = len(qubits)
    wr = cav.omega_r
    omega = np.array([q.omega for q in qubits])
    delta = np.array([q.delta for q in qubits])
    g = config.couplings()

    for i, q in enumerate(qubits):
        if abs(q.omega - wr) <= config.dispersive_ratio * abs(g[i]):
            raise DispersiveRegimeViolation(
                f"qubit {q.label or i + 1} is too close to the cavity", key="freq_ghz"
            )

    jc = np.zeros((n, n, 2, 2))
    for i, j in itertools.permutations(range(n), 2):
        for l, m in itertools.product(range(2), repeat=2):
            jc[i, j, l, m] = j_coupling(g[i], g[j], omega[i], omega[j], delta[i], delta[j], wr, l, m)
    stark = np.array([[stark_shift(g[i], omega[i], delta[i], wr, k) for k in range(3)] for i in range(n)])
    dressed = np.array(
        [[dressed_frequency(g[i], omega[i], delta[i], wr, k) for k in range(3)] for i in range(n)]
    )

    jmax = np.max(np.abs(jc)) if n > 1 else 0.0
    for i, j in itertools.combinations(range(n), 2):
        if abs(dressed[i, 1] - dressed[j, 1]) <= config.degeneracy_ratio * jmax:
            raise DegenerateQubits(
                f"qubits {i + 1} and {j + 1} are degenerate on the scale of J", key="freq_ghz"
            )

    coeffs = []
    for p in (0, 1):
        energies = _sector_energies(omega, delta, g, wr, p)
        coeffs.append(_diagonal_coefficients(energies, n))
    (off0, xi0, z0), (off1, xi1, z1) = coeffs

    return EffectiveModel(
        chi=stark[:, 1] - stark[:, 0],
        kappa=cav.kappa,
        xi=xi0,
        zeta2=z0,
        offset=off0,
        one_photon=(off1, xi1, z1),
        j_couplings=jc,
        stark_shifts=stark,
        dressed_freqs=dressed,
        g=g,
        omega=omega,
        delta=delta,
        omega_r=wr,
        t1=[q.t1 for q in qubits],
        t2_star=[q.t2_star for q in qubits],
        t_echo=[q.t_echo for q in qubits],
        labels=tuple(q.label or f"Q{i + 1}" for i, q in enumerate(qubits)),
        config=config,
    )


def _diagonal_coefficients(energies, n):
    c = pauli.walsh_coefficients(energies, n)
    xi = np.array([c[1 << i] for i in range(n)])
    z = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        z[i, j] = z[j, i] = c[(1 << i) | (1 << j)]
    return float(c[0]), xi, z


def higher_weight_residual(config: DeviceConfig, photons: int = 0) -> float:
    """Largest |weight>=3 Z coefficient| of the perturbative sector energies."""
    omega = np.array([q.omega for q in config.qubits])
    delta = np.array([q.delta for q in config.qubits])
    n = len(omega)
    c = pauli.walsh_coefficients(
        _sector_energies(omega, delta, config.couplings(), config.cavity.omega_r, photons), n
    )
    high = [c[m] for m in range(2**n) if pauli.popcount(m) >= 3]
    return float(max(np.abs(high), default=0.0))


def effective_diagonal_hamiltonian(model: EffectiveModel, photon_sector: int = 0) -> np.ndarray:
    """Diagonal (over 2**N sectors) of the effective Hamiltonian for 0 or 1 photons."""
    if photon_sector == 0:
        offset, xi, z2 = model.offset, model.xi, model.zeta2
    elif photon_sector == 1:
        if model.one_photon is None:
            raise ValueError("model carries no one-photon coefficients")
        offset, xi, z2 = model.one_photon
    else:
        raise ValueError("photon_sector must be 0 or 1")
    return assemble_diagonal(offset, xi, z2)


def assemble_diagonal(offset, xi, zeta2, zeta3=None, zeta4=0.0) -> np.ndarray:
    n = len(xi)
    coeffs = np.zeros(2**n)
    coeffs[0] = offset
    for i in range(n):
        coeffs[1 << i] = xi[i]
    for i, j in itertools.combinations(range(n), 2):
        coeffs[(1 << i) | (1 << j)] = zeta2[i, j]
    if zeta3 is not None:
        for a, b, c in itertools.combinations(range(n), 3):
            coeffs[(1 << a) | (1 << b) | (1 << c)] = zeta3[a, b, c]
    if n == 4:
        coeffs[15] = zeta4
    return pauli.walsh_assemble(coeffs, n)


def extract_coefficients(diagonal, n):
    """Trace-extract (offset, xi, zeta2, zeta3, zeta4) from a diagonal operator."""
    c = pauli.walsh_coefficients(diagonal, n)
    offset, xi, z2 = _diagonal_coefficients(diagonal, n)
    z3 = np.zeros((n, n, n))
    for a, b, cc in itertools.combinations(range(n), 3):
        val = c[(1 << a) | (1 << b) | (1 << cc)]
        for perm in itertools.permutations((a, b, cc)):
            z3[perm] = val
    z4 = float(c[15]) if n == 4 else 0.0
    return offset, xi, z2, z3, z4


def exchange_zeta(model: EffectiveModel) -> np.ndarray:
    """Static ZZ from second order in the exchange couplings J only.

    Uses the dressed three-level qubit Hamiltonian with couplings
    sqrt((l+1)(m+1)) J^(lm); cavity-mediated paths through two-photon
    states are absent, so this differs from ``model.zeta2`` at order g**4.
    """
    n = model.n_qubits
    dressed, jc = model.dressed_freqs, model.j_couplings
    basis = list(itertools.product(range(3), repeat=n))
    index = {b: k for k, b in enumerate(basis)}
    e0 = np.array([sum(dressed[q, k] for q, k in enumerate(b)) for b in basis])
    v = np.zeros((len(basis), len(basis)))
    for a, lv in enumerate(basis):
        for i, j in itertools.permutations(range(n), 2):
            l, m = lv[i] - 1, lv[j]
            # |l+1_i, m_j> -> |l_i, m+1_j>
            if l < 0 or l > 1 or m > 1:
                continue
            new = list(lv)
            new[i], new[j] = l, m + 1
            b = index[tuple(new)]
            v[a, b] = v[b, a] = math.sqrt((l + 1) * (m + 1)) * jc[i, j, l, m]
    scale = float(np.max(np.abs(e0)))
    energies = np.zeros(2**n)
    for s in range(2**n):
        k = index[tuple(int(x) for x in pauli.bit_matrix(n)[s])]
        mask = np.arange(len(basis)) != k
        de = e0[k] - e0
        if np.any((np.abs(de) < 1e-12 * scale) & mask & (v[:, k] != 0)):
            raise DegenerateQubits("exchange-resonant levels")
        r = np.where(mask & (v[:, k] != 0), 1.0 / np.where(de == 0, 1.0, de), 0.0)
        energies[s] = e0[k] + np.sum(v[:, k] ** 2 * r)
    return _diagonal_coefficients(energies, n)[2]


# --- exact diagonalization oracle --------------------------------------------


@dataclass(frozen=True)
class DressedLevel:
    levels: tuple[int, ...]
    photons: int
    energy: float
    overlap: float

    @property
    def label(self):
        return self.levels, self.photons


def exact_dressed_energies(
    config: DeviceConfig,
    max_transmon_level: int = 4,
    max_photons: int = 6,
    labels=None,
) -> list[DressedLevel]:
    """Eigenvalues of the truncated qubit-cavity Hamiltonian, labelled by bare state.

    ``max_transmon_level`` is the number of transmon levels kept per qubit and
    ``max_photons`` the largest photon number. By default every computational
    sector with 0 or 1 photons is returned, ordered by (photons, levels).
    Each block of fixed excitation number is diagonalized separately and
    eigenvectors are matched one-to-one to bare states by maximal overlap.
    """
    n = config.n_qubits
    if max_transmon_level < 3 or max_photons < 2:
        raise TruncationTooSmall("need at least 3 transmon levels and 2 photons")
    if labels is None:
        labels = [
            (tuple(int(b) for b in bits), p)
            for p in (0, 1)
            for bits in pauli.bit_matrix(n)
        ]
    labels = [(tuple(lv), int(p)) for lv, p in labels]
    for lv, p in labels:
        if len(lv) != n or max(lv) >= max_transmon_level or p > max_photons or min(lv) < 0:
            raise TruncationTooSmall(f"label {lv, p} is outside the truncation")

    omega = [q.omega for q in config.qubits]
    delta = [q.delta for q in config.qubits]
    g = config.couplings()
    wr = config.cavity.omega_r

    found = {}
    for n_exc in sorted({sum(lv) + p for lv, p in labels}):
        basis = _block_basis(n, max_transmon_level, max_photons, n_exc)
        ref = wr * n_exc
        e0, v = _bare_matrices(omega, delta, g, wr, basis, ref=ref)
        evals, evecs = np.linalg.eigh(np.diag(e0) + v)
        weight = np.abs(evecs) ** 2
        rows, cols = linear_sum_assignment(-weight)
        for r, c in zip(rows, cols):
            found[basis[r]] = DressedLevel(basis[r][0], basis[r][1], evals[c] + ref, weight[r, c])

    out = [found[lab] for lab in labels]
    return sorted(out, key=lambda d: (d.photons, d.levels[::-1]))


def _energy_map(config, labels, **trunc):
    levels = exact_dressed_energies(config, labels=labels, **trunc)
    return {d.label: d.energy for d in levels}


def oracle_zeta(config: DeviceConfig, i: int, j: int, **trunc) -> float:
    """(E11 - E10 - E01 + E00) / 4 for qubits i, j with all others in ground."""
    n = config.n_qubits

    def lab(bi, bj):
        lv = [0] * n
        lv[i], lv[j] = bi, bj
        return tuple(lv), 0

    labs = [lab(0, 0), lab(1, 0), lab(0, 1), lab(1, 1)]
    e = _energy_map(config, labs, **trunc)
    return (e[labs[3]] - e[labs[1]] - e[labs[2]] + e[labs[0]]) / 4


def oracle_chi(config: DeviceConfig, i: int, **trunc) -> float:
    """Cavity pull per excitation of qubit i from the exact spectrum."""
    n = config.n_qubits
    ground = tuple([0] * n)
    exc = tuple(1 if q == i else 0 for q in range(n))
    labs = [(ground, 0), (exc, 0), (ground, 1), (exc, 1)]
    e = _energy_map(config, labs, **trunc)
    return e[(exc, 1)] - e[(exc, 0)] - e[(ground, 1)] + e[(ground, 0)]
