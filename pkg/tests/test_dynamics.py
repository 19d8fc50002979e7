import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import direct_alpha
from ripsim.device import EffectiveModel
from ripsim.dynamics import (
    delta_tilde,
    dephasing_matrix,
    dephasing_rate,
    phi_functions,
    photon_number,
    propagate,
    ramsey_weights,
    rates_by_enumeration,
    steady_state_alpha,
    steady_state_rates,
    max_step,
)
from ripsim.errors import ResonantDrive, StepTooLarge
from ripsim.pulses import DriveSpec, PulseEnvelope, adiabatic_drive
from ripsim.units import khz, mhz

CHI = [-mhz(5.0), -mhz(4.0), -mhz(6.0)]


def _model(kappa=0.0, n=3):
    return EffectiveModel.synthetic(CHI[:n], kappa=kappa)


@pytest.mark.parametrize("z", [0.0, 1e-3 + 2e-3j, 0.3j, -0.49, 0.51, -2.0 + 5j, 10j])
def test_phi_functions_match_definition(z):
    phis = phi_functions(np.array([z]))[:, 0]
    if abs(z) < 0.1:
        expect = [sum(z**j / math.factorial(j + k) for j in range(40)) for k in range(1, 5)]
    else:
        # phi_k = (e^z - sum_{j<k} z^j / j!) / z^k
        expect = [
            (np.exp(z) - sum(z**j / math.factorial(j) for j in range(k))) / z**k for k in range(1, 5)
        ]
    np.testing.assert_allclose(phis, expect, rtol=1e-9)


def test_constant_drive_from_rest_matches_closed_form():
    model = _model(kappa=khz(500))
    det, eps, t = mhz(20), mhz(10), 300e-9
    traj, _ = propagate(model, DriveSpec(det, PulseEnvelope.constant(eps, t)))
    expect = direct_alpha(eps, delta_tilde(model, det), traj.times[:, None])
    np.testing.assert_allclose(traj.alphas, expect, rtol=1e-9, atol=1e-12)


def test_steady_state_is_stationary():
    model = _model(kappa=khz(300))
    det, eps = mhz(30), mhz(15)
    start = steady_state_alpha(model, eps, det)
    traj, _ = propagate(model, DriveSpec(det, PulseEnvelope.constant(eps, 200e-9)), initial=start)
    np.testing.assert_allclose(traj.final, start, rtol=1e-12)


@given(st.floats(10, 80), st.floats(5, 60), st.floats(50, 300))
def test_step_halving_converges(det_mhz, amp_mhz, width_ns):
    model = _model()
    drive = adiabatic_drive(mhz(amp_mhz), width_ns * 1e-9, mhz(det_mhz))
    h = max_step(model, drive)
    a1 = propagate(model, drive, dt=h)[0].final
    a2 = propagate(model, drive, dt=h / 2)[0].final
    assert np.max(np.abs(a1 - a2)) < 1e-8


@given(st.floats(0.1, 10.0))
def test_linear_in_drive(scale):
    model = _model(kappa=khz(100))
    d1 = adiabatic_drive(mhz(20), 150e-9, mhz(25))
    d2 = d1.with_envelope(d1.envelope.scaled(scale))
    t1, l1 = propagate(model, d1)
    t2, l2 = propagate(model, d2)
    # round-off floor scales with the peak value, not with each sample
    a_ref, mu_ref = scale * t1.alphas, scale**2 * l1.mu
    np.testing.assert_allclose(t2.alphas, a_ref, rtol=1e-10, atol=1e-13 * np.abs(a_ref).max())
    np.testing.assert_allclose(l2.mu, mu_ref, rtol=1e-9, atol=1e-13 * np.abs(mu_ref).max())


@given(st.floats(0.5, 50.0), st.floats(5, 80))
def test_phase_ledger_structure(kappa_khz, det):
    model = EffectiveModel.synthetic(CHI, kappa=khz(kappa_khz), zeta2=np.full((3, 3), khz(50)) - np.diag([khz(50)] * 3))
    drive = adiabatic_drive(mhz(30), 200e-9, mhz(det))
    _, led = propagate(model, drive)
    _, led_t2 = propagate(model, drive, t2=[20e-6, 30e-6, 40e-6])
    mu = led.mu
    np.testing.assert_allclose(mu.real, -mu.real.T, atol=1e-12)
    np.testing.assert_allclose(mu.imag, mu.imag.T, atol=1e-12)
    assert np.all(mu.imag >= -1e-12)
    assert np.all(led_t2.mu.imag >= mu.imag - 1e-15)


def test_series_ends_at_ledger():
    model = _model(kappa=khz(200))
    _, led = propagate(model, adiabatic_drive(mhz(30), 200e-9, mhz(20)), record_series=True, ref=2)
    np.testing.assert_allclose(led.ref_series[-1], led.mu[:, 2], rtol=1e-9, atol=1e-14)
    assert not np.any(led.ref_series[0])


def test_step_too_large():
    with pytest.raises(StepTooLarge):
        propagate(_model(), adiabatic_drive(mhz(10), 100e-9, mhz(20)), dt=5e-9)


def test_steady_state_rates_match_enumeration():
    model = EffectiveModel.synthetic([-mhz(5.0)] * 4)
    closed = steady_state_rates(model, mhz(30), mhz(40))
    direct = rates_by_enumeration(4, mhz(30), mhz(5.0), mhz(40))
    for key in closed:
        assert closed[key] == pytest.approx(direct[key], rel=1e-12)


@given(st.floats(0.05, 0.3), st.floats(10, 100))
def test_rate_hierarchy(ratio, det_mhz):
    d = mhz(det_mhz)
    model = EffectiveModel.synthetic([-ratio * d] * 4)
    r = steady_state_rates(model, mhz(20), d)
    assert abs(r["rate_zz"]) > abs(r["rate_zzz"]) > abs(r["rate_zzzz"])
    assert 0.9 * ratio < abs(r["rate_zzz"] / r["rate_zz"]) < 1.5 * ratio


def test_dephasing_rate_matches_propagation():
    chi, det, eps = mhz(5.0), mhz(20), mhz(10)
    model = EffectiveModel.synthetic([-chi] * 4, kappa=khz(50))
    start = steady_state_alpha(model, eps, det)
    t = 1e-6
    _, led = propagate(model, DriveSpec(det, PulseEnvelope.constant(eps, t)), initial=start)
    assert led.mu[15, 0].imag / t == pytest.approx(dephasing_rate(model, eps, det), rel=0.02)


def test_resonant_drive_detected():
    model = EffectiveModel.synthetic([-mhz(5.0)] * 4, kappa=khz(10))
    with pytest.raises(ResonantDrive):
        steady_state_rates(model, mhz(10), -mhz(10.0))


def test_unequal_shifts_warn():
    model = EffectiveModel.synthetic([-mhz(2.0), -mhz(6.0)])
    with pytest.warns(UserWarning):
        steady_state_rates(model, mhz(10), mhz(40))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        steady_state_rates(_model(n=1), mhz(10), mhz(40))


def test_photon_number_and_weights():
    model = _model()
    traj, led = propagate(model, adiabatic_drive(mhz(40), 100e-9, mhz(20)))
    w = ramsey_weights(led.mu[1, 0], 0, 3)
    assert w.sum() == pytest.approx(1.0)
    assert w[1] == pytest.approx(0.5 * (1 - math.sin(led.mu[1, 0].real)))
    n = photon_number(traj, w)
    assert n.shape == traj.times.shape
    with pytest.raises(ValueError):
        photon_number(traj, np.ones(8))


def test_dephasing_matrix():
    d = dephasing_matrix(2, [1.0, 10.0])
    np.testing.assert_allclose(d, [[0, 1, 10, 11], [1, 0, 11, 10], [10, 11, 0, 1], [11, 10, 1, 0]])
