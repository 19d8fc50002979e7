import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ripsim.config import load_device
from ripsim.errors import DomainError, InvalidDensityMatrix
from ripsim.metrics import (
    RbSummary,
    average_gate_fidelity,
    coherence_limited_fidelity,
    f_c_from_alpha,
    f_g_from_alpha,
    load_table2,
    state_fidelity,
)


def test_f_g_endpoints():
    assert f_g_from_alpha(1.0) == 1.0
    assert f_g_from_alpha(0.0) == pytest.approx(0.25)
    assert f_c_from_alpha(0.9) == pytest.approx(1 - 0.75 * 0.1)


@pytest.mark.parametrize("row", load_table2(), ids=lambda r: r.pair)
def test_table_f_g(row):
    assert f_g_from_alpha(row.f_c) == pytest.approx(row.f_g, abs=5e-4)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_f_g_monotonic(a, b):
    lo, hi = sorted((a, b))
    assert f_g_from_alpha(lo) <= f_g_from_alpha(hi)


@pytest.mark.parametrize("args", [(1.2,), (-0.1,), (0.9, 1), (0.9, 4, 0.0)])
def test_domain_errors(args):
    with pytest.raises(DomainError):
        f_g_from_alpha(*args)


def test_rb_summary():
    s = RbSummary(0.98)
    assert s.f_g == f_g_from_alpha(0.98)
    assert s.f_c == f_c_from_alpha(0.98)
    with pytest.raises(DomainError):
        RbSummary(2.0)


def test_average_gate_fidelity():
    assert average_gate_fidelity(1.0, 4) == 1.0
    assert average_gate_fidelity(0.0, 4) == pytest.approx(0.2)


def test_state_fidelity():
    psi = np.array([1, 0, 0, 1j]) / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    assert state_fidelity(rho, psi) == pytest.approx(1.0)
    mixed = np.eye(4) / 4
    assert state_fidelity(mixed, psi) == pytest.approx(0.25)


@pytest.mark.parametrize(
    "rho",
    [
        np.diag([0.5, 0.5, 0.5, 0.0]),
        np.array([[0.5, 1], [0, 0.5]]),
        np.diag([1.2, -0.2]),
    ],
)
def test_invalid_density_matrix(rho):
    psi = np.zeros(rho.shape[0])
    psi[0] = 1
    with pytest.raises(InvalidDensityMatrix):
        state_fidelity(rho, psi)


def test_coherence_limit_rows():
    # rows whose coherence limit follows from each qubit's shortest measured times
    dev = {"A": load_device("device_a"), "B": load_device("device_b")}
    matched = 0
    for r in load_table2():
        a, b = r.pair.split("-")
        qa, qb = dev[a[0]].qubits[int(a[1]) - 1], dev[b[0]].qubits[int(b[1]) - 1]
        f = coherence_limited_fidelity(r.t_gate_ns * 1e-9, [qa.t1, qb.t1], [qa.t_echo, qb.t_echo])
        # the table prints four decimals
        matched += abs(f - r.f_coh) < 1.5e-4
    assert matched == 8


def test_coherence_limit_properties():
    assert coherence_limited_fidelity(0.0, [10e-6], [10e-6]) == 1.0
    f = coherence_limited_fidelity(1e-6, [30e-6, 20e-6], [40e-6, 10e-6])
    worst = coherence_limited_fidelity(1e-6, [30e-6, 20e-6], [40e-6, 10e-6], worst=True)
    assert worst < f < 1.0
    with pytest.raises(DomainError):
        coherence_limited_fidelity(1e-6, [0.0], [1e-6])
