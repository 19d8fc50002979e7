"""Unit helpers. Everything internal is rad/s and seconds."""

import math

TWO_PI = 2.0 * math.pi


def ghz(x):
    return TWO_PI * 1e9 * x


def mhz(x):
    return TWO_PI * 1e6 * x


def khz(x):
    return TWO_PI * 1e3 * x


def to_mhz(w):
    return w / (TWO_PI * 1e6)


def to_khz(w):
    return w / (TWO_PI * 1e3)


def ns(x):
    return 1e-9 * x


def us(x):
    return 1e-6 * x
