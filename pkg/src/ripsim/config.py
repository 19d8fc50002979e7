"""TOML device files.

Layout::

    name = "Device A"
    dispersive_ratio = 5.0        # optional
    degeneracy_ratio = 10.0       # optional

    [cavity]
    freq_ghz = 6.9676
    kappa_khz = 7.7

    [[qubit]]
    label = "A1"
    freq_ghz = 5.7862
    anharm_mhz = -305
    chi_mhz = 10                  # or g_mhz
    t1_us = 26
    t2star_us = 6
    techo_us = 36

    [pulse]                       # optional default drive
    kind = "adiabatic_cosine"
    amp_mhz = 30.0
    width_ns = 266.7
    detuning_mhz = 20.0
"""

from __future__ import annotations

import math
import sys
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .device import CavityParams, DeviceConfig, QubitParams
from .errors import ConfigError
from .pulses import DriveSpec, PulseEnvelope
from .units import ghz, khz, mhz, us

FIXTURES = ("device_a", "device_b")

_QUBIT_KEYS = {"label", "freq_ghz", "anharm_mhz", "chi_mhz", "g_mhz", "t1_us", "t2star_us", "techo_us"}
_CAVITY_KEYS = {"freq_ghz", "kappa_khz"}
_PULSE_KEYS = {"kind", "amp_mhz", "width_ns", "detuning_mhz"}
_TOP_KEYS = {"name", "dispersive_ratio", "degeneracy_ratio", "cavity", "qubit", "pulse"}


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise ConfigError(f"unknown fixture {name!r}", key="device")
    return Path(str(resources.files("ripsim").joinpath(f"data/{name}.toml")))


def _number(table, key, where, required=True, default=None):
    if key not in table:
        if required:
            raise ConfigError(f"missing {where}.{key}", key=f"{where}.{key}")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}.{key} must be a finite number", key=f"{where}.{key}")
    return float(value)


def _unknown(table, allowed, where):
    extra = sorted(set(table) - allowed)
    if extra:
        raise ConfigError(f"unknown key {where}.{extra[0]}", key=f"{where}.{extra[0]}")


def _reraise(exc: ConfigError, prefix: str, mapping: dict) -> ConfigError:
    key = mapping.get(exc.key, exc.key)
    return ConfigError(str(exc), key=f"{prefix}.{key}" if key else prefix)


_QUBIT_FIELD_KEYS = {
    "t1": "t1_us",
    "t2_star": "t2star_us",
    "t_echo": "techo_us",
    "omega": "freq_ghz",
    "g": "g_mhz",
}


def parse_device(data: dict, name: str = "") -> DeviceConfig:
    _unknown(data, _TOP_KEYS, "device")
    cav = data.get("cavity")
    if not isinstance(cav, dict):
        raise ConfigError("missing [cavity] table", key="cavity")
    _unknown(cav, _CAVITY_KEYS, "cavity")
    try:
        cavity = CavityParams(
            omega_r=ghz(_number(cav, "freq_ghz", "cavity")),
            kappa=khz(_number(cav, "kappa_khz", "cavity", required=False, default=0.0)),
        )
    except ConfigError as exc:
        if exc.key and exc.key.startswith("cavity"):
            raise
        raise _reraise(exc, "cavity", {"omega_r": "freq_ghz", "kappa": "kappa_khz"}) from None

    raw = data.get("qubit")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("at least one [[qubit]] table is required", key="qubit")
    qubits = []
    for i, q in enumerate(raw):
        where = f"qubit[{i}]"
        if not isinstance(q, dict):
            raise ConfigError(f"{where} must be a table", key=where)
        _unknown(q, _QUBIT_KEYS, where)
        if ("chi_mhz" in q) == ("g_mhz" in q):
            raise ConfigError(f"{where} needs exactly one of chi_mhz or g_mhz", key=f"{where}.chi_mhz")
        chi = _number(q, "chi_mhz", where, required=False)
        g = _number(q, "g_mhz", where, required=False)
        t1 = _number(q, "t1_us", where, required=False, default=math.inf)
        t2s = _number(q, "t2star_us", where, required=False, default=math.inf)
        te = _number(q, "techo_us", where, required=False, default=math.inf)
        try:
            qubits.append(
                QubitParams(
                    omega=ghz(_number(q, "freq_ghz", where)),
                    delta=mhz(_number(q, "anharm_mhz", where)),
                    g=None if g is None else mhz(g),
                    chi_override=None if chi is None else mhz(chi),
                    t1=us(t1),
                    t2_star=us(t2s),
                    t_echo=us(te),
                    label=str(q.get("label", f"Q{i + 1}")),
                )
            )
        except ConfigError as exc:
            if exc.key and exc.key.startswith(where):
                raise
            raise _reraise(exc, where, _QUBIT_FIELD_KEYS) from None
    kw = {}
    for key in ("dispersive_ratio", "degeneracy_ratio"):
        if key in data:
            value = _number(data, key, "device")
            if value <= 0:
                raise ConfigError(f"{key} must be positive", key=key)
            kw[key] = value
    try:
        return DeviceConfig(tuple(qubits), cavity, name=str(data.get("name", name)), **kw)
    except ConfigError as exc:
        raise _reraise(exc, "device", {}) from None


def parse_pulse(data: dict) -> DriveSpec | None:
    p = data.get("pulse")
    if p is None:
        return None
    if not isinstance(p, dict):
        raise ConfigError("[pulse] must be a table", key="pulse")
    _unknown(p, _PULSE_KEYS, "pulse")
    kind = p.get("kind", "adiabatic_cosine")
    if kind not in ("adiabatic_cosine", "constant"):
        raise ConfigError(f"unsupported pulse kind {kind!r}", key="pulse.kind")
    env = PulseEnvelope(
        kind,
        complex(mhz(_number(p, "amp_mhz", "pulse"))),
        _number(p, "width_ns", "pulse") * 1e-9,
    )
    return DriveSpec(mhz(_number(p, "detuning_mhz", "pulse")), env)


def read_toml(path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"device file {path} not found", key="device") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}", key="device") from None


def load_device(path) -> DeviceConfig:
    """Device config from a TOML path or a shipped fixture name."""
    if str(path) in FIXTURES:
        path = fixture_path(str(path))
    return parse_device(read_toml(path), name=Path(path).stem)


def load_pulse(path) -> DriveSpec | None:
    if str(path) in FIXTURES:
        path = fixture_path(str(path))
    return parse_pulse(read_toml(path))
