"""Drive envelopes for the bus-cavity tone."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfRange

KINDS = ("adiabatic_cosine", "constant", "piecewise_samples")


@dataclass(frozen=True, eq=False)
class PulseEnvelope:
    """Complex envelope eps(t) = eps_I(t) + i eps_Q(t) in rad/s.

    ``adiabatic_cosine`` is A * (1 + cos(pi * cos(pi t / width))), which
    vanishes at both ends and peaks at 2A in the middle. ``samples`` is a
    sequence of (t, value) pairs for ``piecewise_samples``; values are
    linearly interpolated and clamped at the ends.
    """

    kind: str
    amplitude: complex = 0.0
    width: float = 0.0
    samples: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown pulse kind {self.kind!r}", key="kind")
        if self.kind == "piecewise_samples":
            if not self.samples or len(self.samples) < 2:
                raise ConfigError("piecewise_samples needs at least two samples", key="samples")
            t = np.array([s[0] for s in self.samples], dtype=float)
            if np.any(np.diff(t) <= 0) or t[0] != 0.0:
                raise ConfigError("sample times must start at 0 and increase", key="samples")
            object.__setattr__(self, "width", float(t[-1]))
        if not self.width > 0:
            raise ConfigError("pulse width must be positive", key="width_ns")

    @classmethod
    def adiabatic(cls, amplitude, width):
        return cls("adiabatic_cosine", complex(amplitude), float(width))

    @classmethod
    def constant(cls, amplitude, width):
        return cls("constant", complex(amplitude), float(width))

    @classmethod
    def from_samples(cls, times, values):
        return cls("piecewise_samples", samples=tuple(zip(map(float, times), map(complex, values))))

    @property
    def duration(self) -> float:
        return self.width

    def scaled(self, factor) -> PulseEnvelope:
        if self.kind == "piecewise_samples":
            return PulseEnvelope.from_samples(
                [t for t, _ in self.samples], [v * factor for _, v in self.samples]
            )
        return PulseEnvelope(self.kind, self.amplitude * factor, self.width)

    def evaluate(self, t):
        """Vectorized envelope; zero outside [0, width] except for sampled pulses."""
        t = np.asarray(t, dtype=float)
        if self.kind == "adiabatic_cosine":
            inside = (t >= 0) & (t <= self.width)
            shape = 1.0 + np.cos(np.pi * np.cos(np.pi * t / self.width))
            return np.where(inside, self.amplitude * shape, 0.0).astype(complex)
        if self.kind == "constant":
            inside = (t >= 0) & (t <= self.width)
            return np.where(inside, self.amplitude, 0.0).astype(complex)
        ts = np.array([s[0] for s in self.samples])
        vs = np.array([s[1] for s in self.samples], dtype=complex)
        return np.interp(t, ts, vs.real) + 1j * np.interp(t, ts, vs.imag)


def sample(envelope: PulseEnvelope, t):
    """Envelope value(s) at ``t``; raises OutOfRange outside [0, duration]."""
    ta = np.asarray(t, dtype=float)
    slack = 1e-12 * envelope.duration
    if np.any(ta < -slack) or np.any(ta > envelope.duration + slack):
        raise OutOfRange(f"t outside [0, {envelope.duration}]")
    out = envelope.evaluate(np.clip(ta, 0.0, envelope.duration))
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class DriveSpec:
    """Cavity drive: detuning from the dressed (all-ground) cavity plus envelope.

    ``omega_d`` is the absolute carrier when known; the dynamics only need
    the detuning.
    """

    detuning: float
    envelope: PulseEnvelope
    omega_d: float | None = None

    def __post_init__(self):
        env = self.envelope
        if env.kind == "piecewise_samples":
            active = any(v != 0 for _, v in env.samples)
        else:
            active = env.amplitude != 0
        if active and self.detuning == 0:
            raise ConfigError("a resonant drive cannot realize the gate", key="detuning_mhz")

    @classmethod
    def from_carrier(cls, omega_d, dressed_cavity, envelope):
        return cls(detuning=omega_d - dressed_cavity, envelope=envelope, omega_d=omega_d)

    @property
    def duration(self) -> float:
        return self.envelope.duration

    def with_envelope(self, envelope) -> DriveSpec:
        return DriveSpec(self.detuning, envelope, self.omega_d)


def adiabatic_drive(amplitude, width, detuning) -> DriveSpec:
    return DriveSpec(detuning, PulseEnvelope.adiabatic(amplitude, width))


def idle(width, detuning=0.0) -> DriveSpec:
    """Zero-amplitude segment (free evolution)."""
    return DriveSpec(detuning, PulseEnvelope.constant(0.0, width))
