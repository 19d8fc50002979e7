import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ripsim.config import load_device
from ripsim.device import CavityParams, DeviceConfig, QubitParams, compute_couplings
from ripsim.units import ghz, mhz

settings.register_profile(
    "ripsim", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ripsim")


def two_qubit_config(g_mhz=100.0, w2_ghz=5.5, **kw):
    q1 = QubitParams(ghz(5.0), mhz(-300), g=mhz(g_mhz))
    q2 = QubitParams(ghz(w2_ghz), mhz(-300), g=mhz(g_mhz))
    return DeviceConfig((q1, q2), CavityParams(ghz(7.0)), **kw)


@pytest.fixture
def example_config():
    return two_qubit_config()


@pytest.fixture(scope="session")
def device_a():
    return load_device("device_a")


@pytest.fixture(scope="session")
def model_a(device_a):
    return compute_couplings(device_a)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria report one line each at the end of the run


def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def acceptance(request):
    def record(number, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        request.config._acceptance[number] = f"criterion {number}: {status}  {detail}".rstrip()
        print(request.config._acceptance[number])
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
