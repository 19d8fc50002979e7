"""Computational-sector bookkeeping and diagonal Pauli-Z algebra.

Sector index ``s`` stores qubit ``q`` (zero based) in bit ``q``; the printed
label lists qubit 1 first, so ``"1000"`` is qubit 1 excited (index 1).
A Z-string is encoded by the same bitmask convention: mask ``0b0110`` is
Z2Z3.
"""

from __future__ import annotations

import re
from functools import lru_cache

import numpy as np
from scipy.linalg import hadamard

from .errors import UnsupportedTarget


def sector_label(s: int, n: int) -> str:
    return "".join(str((s >> q) & 1) for q in range(n))


def sector_labels(n: int) -> tuple[str, ...]:
    return tuple(sector_label(s, n) for s in range(2**n))


def sector_index(label: str) -> int:
    return sum(int(b) << q for q, b in enumerate(label))


def popcount(x: int) -> int:
    return bin(x).count("1")


@lru_cache(maxsize=None)
def _walsh(n: int) -> np.ndarray:
    # Sylvester ordering: H[m, s] = (-1)^popcount(m & s)
    h = hadamard(2**n).astype(float)
    h.setflags(write=False)
    return h


def z_signs(mask: int, n: int) -> np.ndarray:
    """Eigenvalues of the Z-string ``mask`` over all ``2**n`` sectors."""
    return _walsh(n)[mask]


def excitations(n: int) -> np.ndarray:
    return np.array([popcount(s) for s in range(2**n)])


def bit_matrix(n: int) -> np.ndarray:
    """``(2**n, n)`` array of sector bits."""
    s = np.arange(2**n)
    return (s[:, None] >> np.arange(n)[None, :]) & 1


def walsh_coefficients(values: np.ndarray, n: int) -> np.ndarray:
    """Z-string coefficients of a diagonal: ``c[m] = Tr[D Z_m] / 2**n``.

    ``values`` may carry trailing axes; the sector axis is the first one.
    """
    values = np.asarray(values)
    return np.tensordot(_walsh(n), values, axes=(1, 0)) / 2**n


def walsh_assemble(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`walsh_coefficients`."""
    return np.tensordot(_walsh(n), np.asarray(coeffs), axes=(1, 0))


def string_label(mask: int, n: int | None = None) -> str:
    if mask == 0:
        return "I"
    return "".join(f"Z{q + 1}" for q in range(mask.bit_length()) if mask >> q & 1)


def parse_zstring(text: str | int, n: int | None = None) -> int:
    """Parse ``"Z1Z2"``, ``"ZZII"`` (qubit 1 first) or an integer mask."""
    if isinstance(text, (int, np.integer)):
        mask = int(text)
    else:
        t = text.strip().upper()
        if re.fullmatch(r"(Z\d+)+", t):
            qubits = [int(x) for x in re.findall(r"Z(\d+)", t)]
            if any(q < 1 for q in qubits) or len(set(qubits)) != len(qubits):
                raise UnsupportedTarget(f"bad Z-string {text!r}")
            mask = sum(1 << (q - 1) for q in qubits)
        elif re.fullmatch(r"[ZI]+", t):
            mask = sum(1 << q for q, c in enumerate(t) if c == "Z")
            if n is None:
                n = len(t)
        else:
            raise UnsupportedTarget(f"cannot parse Z-string {text!r}")
    if n is not None and mask >> n:
        raise UnsupportedTarget(f"{text!r} acts outside {n} qubits")
    return mask


def pair_sum_diagonal(zeta2: np.ndarray) -> np.ndarray:
    """Diagonal of sum_{i<j} zeta_ij Z_i Z_j."""
    n = zeta2.shape[0]
    out = np.zeros(2**n)
    for i in range(n):
        for j in range(i + 1, n):
            if zeta2[i, j]:
                out += zeta2[i, j] * z_signs((1 << i) | (1 << j), n)
    return out
