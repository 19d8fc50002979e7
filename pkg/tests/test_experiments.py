import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ripsim.device import EffectiveModel
from ripsim.errors import ConfigError, Unreachable
from ripsim.experiments import (
    dephasing_sweep,
    fit_decay_time,
    ghz_sequence,
    parallel_map,
    ramsey,
    ramsey_probability,
    residual_photons,
    threshold_time,
    tune_up_cz,
    zz_map,
)
from ripsim.pulses import adiabatic_drive
from ripsim.sequences import build_schedule
from ripsim.units import khz, mhz


@pytest.fixture(scope="module")
def pair_model(model_a):
    return model_a.subset([1, 2])


@given(st.floats(-100, 100), st.floats(0, 50))
def test_ramsey_probability_bounded(re, im):
    p = ramsey_probability(complex(re, im))
    assert 0.0 <= p <= 1.0


def test_ramsey_probability_values():
    assert ramsey_probability(0.0) == 0.5
    assert ramsey_probability(math.pi / 2) == pytest.approx(0.0)
    assert ramsey_probability(-math.pi / 2) == pytest.approx(1.0)
    assert ramsey_probability(1j * 50) == pytest.approx(0.5)


def test_ramsey_trace_and_sweep_agree(pair_model):
    drive = adiabatic_drive(mhz(40), 250e-9, mhz(20))
    trace = ramsey(pair_model, 0, drive)
    assert trace.p_up[0] == pytest.approx(0.5)
    sweep = ramsey(pair_model, 0, drive, widths=[250e-9])
    assert sweep.mu[-1] == pytest.approx(trace.mu[-1], rel=1e-9)
    assert sweep.n_resid[-1] == pytest.approx(trace.n_resid[-1], rel=1e-6, abs=1e-12)
    np.testing.assert_allclose(trace.p_down, 1 - trace.p_up)


def test_ramsey_schedule_and_decoherence(pair_model):
    sched = build_schedule(2, "Z1Z2", adiabatic_drive(mhz(40), 250e-9, mhz(20)))
    clean = ramsey(pair_model, 1, sched)
    noisy = ramsey(pair_model, 1, sched, decoherence=True)
    assert noisy.mu[-1].imag > clean.mu[-1].imag
    assert abs(noisy.p_up[-1] - 0.5) < abs(clean.p_up[-1] - 0.5)
    with pytest.raises(ConfigError):
        ramsey(pair_model, 2, sched)


def test_zz_map_shape(pair_model):
    sched = build_schedule(2, "Z1Z2", adiabatic_drive(mhz(40), 100e-9, mhz(20)))
    zmap = zz_map(pair_model, 0, sched, mhz(np.array([20.0, 40.0])), np.array([100e-9, 200e-9, 300e-9]))
    assert zmap.p_up.shape == (2, 3) == zmap.n_resid.shape
    assert np.all((zmap.p_up >= 0) & (zmap.p_up <= 1))


def test_threshold_time(pair_model):
    drive = adiabatic_drive(mhz(100), 100e-9, mhz(30))
    widths = np.arange(10, 300, 10) * 1e-9
    coarse = threshold_time(pair_model, drive, widths)
    fine = threshold_time(pair_model, drive, widths, resolution=2e-9)
    assert fine <= coarse and coarse - fine < 10e-9
    assert residual_photons(pair_model, replace_width(drive, fine)) < 0.01
    with pytest.raises(Unreachable):
        threshold_time(pair_model, drive, np.array([5e-9, 10e-9]))


def replace_width(drive, width):
    return adiabatic_drive(drive.envelope.amplitude, width, drive.detuning)


def test_tune_up_amplitude_mode(pair_model):
    res = tune_up_cz(pair_model, (0, 1), adiabatic_drive(mhz(30), 266.7e-9, mhz(20)))
    assert abs(res.mu_target.real) == pytest.approx(math.pi / 2, abs=1e-4)
    assert res.residual_photons < 0.01
    assert res.gate_time == pytest.approx(2 * 266.7e-9 + 36.7e-9)
    # tuning again from the tuned point is a fixed point
    again = tune_up_cz(pair_model, (0, 1), res.schedule.steps[0].segment)
    assert again.amplitude == pytest.approx(res.amplitude, rel=1e-9)


def test_tune_up_time_mode_shorter_with_more_drive(pair_model):
    slow = tune_up_cz(pair_model, (0, 1), adiabatic_drive(mhz(20), 100e-9, mhz(20)), mode="time", max_time=5e-6)
    fast = tune_up_cz(pair_model, (0, 1), adiabatic_drive(mhz(40), 100e-9, mhz(20)), mode="time", max_time=5e-6)
    assert fast.width < slow.width
    for r in (slow, fast):
        assert abs(r.mu_target.real) == pytest.approx(math.pi / 2, abs=1e-4)


def test_tune_up_failures(pair_model):
    with pytest.raises(Unreachable):
        # the cavity cannot empty at this detuning within the segment
        tune_up_cz(pair_model, (0, 1), adiabatic_drive(mhz(30), 266.7e-9, mhz(5)))
    with pytest.raises(ConfigError):
        tune_up_cz(pair_model, (0, 0), adiabatic_drive(mhz(30), 266.7e-9, mhz(20)))
    with pytest.raises(ConfigError):
        tune_up_cz(pair_model, (0, 1), adiabatic_drive(mhz(30), 266.7e-9, mhz(20)), mode="bogus")


def test_fit_decay_time():
    t = np.linspace(0, 1e-6, 11)
    assert fit_decay_time(t, t / 5e-5) == pytest.approx(5e-5)
    assert fit_decay_time(t, np.zeros_like(t)) == math.inf


def test_no_cavity_loss_no_induced_dephasing(pair_model):
    lossless = replace(pair_model, kappa=0.0)
    (pt,) = dephasing_sweep(lossless, (0, 1), [mhz(20)])
    assert np.all(np.isinf(pt.t2_induced))
    assert pt.induced_error == 0.0
    (lossy,) = dephasing_sweep(pair_model, (0, 1), [mhz(20)])
    assert 0 < lossy.induced_error < 1e-2
    assert lossy.f_limit < lossy.f_intrinsic


def test_dephasing_grows_with_kappa(pair_model):
    (a,) = dephasing_sweep(pair_model, (0, 1), [mhz(20)])
    (b,) = dephasing_sweep(replace(pair_model, kappa=2 * pair_model.kappa), (0, 1), [mhz(20)])
    assert b.induced_error > a.induced_error


def test_ghz_ideal_and_noisy(model_a):
    ideal = ghz_sequence(model_a)
    assert ideal.fidelity == pytest.approx(1.0, abs=1e-12)
    assert abs(abs(np.vdot(ideal.state, ideal.target)) - 1) < 1e-12
    static = ghz_sequence(model_a, noise="static")
    full = ghz_sequence(model_a, noise="full")
    assert full.fidelity < static.fidelity < ideal.fidelity
    assert static.spurious_coherence > 1e-3
    assert full.state is None
    np.testing.assert_allclose(np.trace(full.rho), 1.0)


@settings(max_examples=15)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_ghz_fidelity_monotonic_in_zz(model_a, a, b):
    lo, hi = sorted((a, b))
    f_lo = ghz_sequence(model_a.with_zeta(lo * model_a.zeta2), noise="static").fidelity
    f_hi = ghz_sequence(model_a.with_zeta(hi * model_a.zeta2), noise="static").fidelity
    assert f_hi <= f_lo + 1e-12


def test_ghz_chain_validation(model_a):
    with pytest.raises(ConfigError):
        ghz_sequence(model_a, cz_order=((0, 1), (2, 3), (1, 2)))
    with pytest.raises(ConfigError):
        ghz_sequence(model_a, cz_order=((0, 1), (1, 2)))
    with pytest.raises(ConfigError):
        ghz_sequence(model_a, noise="loud")
    alt = ghz_sequence(model_a, cz_order=((1, 0), (1, 2), (2, 3)))
    assert alt.fidelity == pytest.approx(1.0, abs=1e-12)


def test_ghz_two_qubits():
    model = EffectiveModel.synthetic([-mhz(5)] * 2, zeta2=np.array([[0, khz(100)], [khz(100), 0]]))
    assert ghz_sequence(model, cz_order=((0, 1),)).fidelity == pytest.approx(1.0)


def test_parallel_map_ordered():
    assert parallel_map(math.sqrt, [1, 4, 9], workers=2) == [1.0, 2.0, 3.0]
    assert parallel_map(math.sqrt, [16], workers=4) == [4.0]
