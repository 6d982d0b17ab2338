"""Uniformly sampled 2*pi-periodic fields and their spectral calculus."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def angle_grid(n):
    """Angles ``2*pi*i/n`` for ``i = 0..n-1``."""
    return 2.0 * np.pi * np.arange(n) / n


def spectral_diff(values, order=1):
    """Differentiate periodic samples on the uniform grid via the FFT.

    The Nyquist mode is dropped for odd orders (its derivative is not
    representable by real samples) and kept for even orders.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if order == 0:
        return values.copy()
    k = np.fft.rfftfreq(n, 1.0 / n)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(values, axis=-1) * mult, n=n, axis=-1)


def fourier_modes(values):
    """Real trigonometric coefficients of the interpolant of ``values``.

    Returns ``(m, a, b)`` with ``values(theta) = sum a cos(m theta) + b sin(m theta)``.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    c = np.fft.rfft(values) / n
    m = np.arange(c.size)
    a = 2.0 * c.real
    b = -2.0 * c.imag
    a[0] = c[0].real
    if n % 2 == 0:
        a[-1] = c[-1].real
        b[-1] = 0.0
    return m.astype(float), a, b


def trig_eval(m, a, b, theta, deriv=0):
    """Evaluate ``sum a cos(m t) + b sin(m t)`` (or a derivative) at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    mt = np.multiply.outer(theta, m)
    c, s = np.cos(mt), np.sin(mt)
    # d/dt of (cos, sin) cycles through (-sin, cos), (-cos, -sin), (sin, -cos)
    r = deriv % 4
    if r == 0:
        basis_a, basis_b = c, s
    elif r == 1:
        basis_a, basis_b = -s, c
    elif r == 2:
        basis_a, basis_b = -c, -s
    else:
        basis_a, basis_b = s, -c
    scale = m ** deriv if deriv else 1.0
    return (basis_a * (a * scale)).sum(axis=-1) + (basis_b * (b * scale)).sum(axis=-1)


def trapezoid_periodic(values):
    """Integral over one period of uniformly sampled values."""
    values = np.asarray(values, dtype=float)
    return 2.0 * np.pi * values.mean(axis=-1)


@dataclass(frozen=True)
class PeriodicField:
    """Samples of a periodic function on ``angle_grid(len(values))``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 4:
            raise ValueError("PeriodicField needs a 1-d array of at least 4 samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self):
        return self.values.size

    @property
    def theta(self):
        return angle_grid(self.size)

    def derivative(self, order=1):
        return spectral_diff(self.values, order)

    def integral(self):
        return trapezoid_periodic(self.values)
