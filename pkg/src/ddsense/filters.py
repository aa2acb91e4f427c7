r"""
Filter functions of pi-pulse sequences.

The numeric filter of an arbitrary sequence with pulse fractions
:math:`s_1 < \dots < s_n` (and :math:`s_0 = 0`, :math:`s_{n+1} = 1`) is

.. math::

    F(\omega t) = \frac{1}{2}\Big|\sum_{j=0}^{n} (-1)^j
        \big(e^{i\omega t s_{j+1}} - e^{i\omega t s_j}\big)\Big|^2,

normalised so that free evolution gives :math:`2\sin^2(\omega t/2)`. With
this convention the closed forms for the three- and five-pulse-unit families
agree with the numeric filter to machine precision.

The closed forms contain a ratio :math:`\sin^2(\omega t/2)/\cos^2(y)` with
:math:`\omega t/2 = m y` and ``m`` even. It is evaluated through

.. math::

    \frac{\sin(m y)}{\cos y} = 2\sum_{j=0}^{m/2-1} (-1)^j \sin\big((m-1-2j)y\big),

which is finite everywhere, including at the dominant-peak centres where
both sine and cosine vanish.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidParameterError, NoPeakError
from .sequences import PulseSequence, check_designed3, check_designed5

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FilterPoint:
    omega_t: float
    value: float


@dataclass(frozen=True)
class PeakReport:
    """A located filter-function peak (positions in units of ``omega t / 2 pi``)."""

    center_omega_t_over_2pi: float
    height: float
    width_at_half_max: float
    k: int = 1


def _check_omega_t(omega_t) -> np.ndarray:
    x = np.asarray(omega_t, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise InvalidParameterError("omega_t must be finite and >= 0")
    return x


def filter_numeric(seq: PulseSequence, omega_t):
    """Filter function of ``seq`` at dimensionless phase(s) ``omega_t``."""
    x = _check_omega_t(omega_t)
    s = np.concatenate(([0.0], seq.fractions, [1.0]))
    sign = np.where(np.arange(s.size - 1) % 2, -1.0, 1.0)
    phases = np.exp(1j * np.multiply.outer(x, s))
    amp = ((phases[..., 1:] - phases[..., :-1]) * sign).sum(axis=-1)
    val = 0.5 * np.abs(amp) ** 2
    return float(val) if val.ndim == 0 else val


def _sin_ratio(m: int, y: np.ndarray) -> np.ndarray:
    """``sin(m y) / cos(y)`` for even ``m`` without the removable singularity."""
    j = np.arange(m // 2)
    terms = np.sin(np.multiply.outer(y, m - 1 - 2 * j)) * np.where(j % 2, -1.0, 1.0)
    return 2.0 * terms.sum(axis=-1)


def filter_designed3(n: int, r, omega_t):
    """Closed-form filter of the three-pulse-unit family."""
    n, r = check_designed3(n, r)
    x = _check_omega_t(omega_t)
    y = 3.0 * x / (2.0 * n)
    bracket = np.cos(y / 2) ** 2 - np.cos(2.0 * float(r) * y)
    val = 8.0 * _sin_ratio(n // 3, y) ** 2 * bracket**2
    return float(val) if val.ndim == 0 else val


def filter_designed5(n: int, p, q, omega_t):
    """Closed-form filter of the five-pulse-unit family."""
    n, p, q = check_designed5(n, p, q)
    x = _check_omega_t(omega_t)
    y = 5.0 * x / (2.0 * n)
    bracket = np.sin(y / 2) ** 2 - np.cos(2.0 * float(p) * y) + np.cos(2.0 * float(q) * y)
    val = 8.0 * _sin_ratio(n // 5, y) ** 2 * bracket**2
    return float(val) if val.ndim == 0 else val


def filter_analytic(seq: PulseSequence, omega_t):
    """Closed-form filter for a built-in family (CPMG uses the ``r = 1/3`` form)."""
    if seq.family == "designed3":
        return filter_designed3(seq.n, seq.param("r"), omega_t)
    if seq.family == "designed5":
        return filter_designed5(seq.n, seq.param("p"), seq.param("q"), omega_t)
    if seq.family == "cpmg" and seq.n % 6 == 0:
        return filter_designed3(seq.n, "1/3", omega_t)
    raise InvalidParameterError(f"no closed form for {seq.describe()}")


def _check_k(k) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidParameterError(f"peak index k must be a positive integer, got {k!r}")
    return int(k)


def peak_height3(n: int, r, k: int = 1) -> float:
    """Height of the k-th dominant peak of the three-pulse-unit filter."""
    n, r = check_designed3(n, r)
    k = _check_k(k)
    return 2.0 / 9.0 * n**2 * (1.0 - 2.0 * math.cos((2 * k - 1) * math.pi * float(r))) ** 2


def peak_height5(n: int, p, q, k: int = 1) -> float:
    """Height of the k-th dominant peak of the five-pulse-unit filter."""
    n, p, q = check_designed5(n, p, q)
    k = _check_k(k)
    a = (2 * k - 1) * math.pi
    return 2.0 / 25.0 * n**2 * (1.0 - 2.0 * math.cos(a * float(p)) + 2.0 * math.cos(a * float(q))) ** 2


_PEAK_DIVISOR = {"cpmg": 2, "designed3": 6, "designed5": 10}


def dominant_peak_position(family: str, n: int, k: int = 1) -> float:
    """Centre of the k-th dominant peak, in units of ``omega t / 2 pi``."""
    if family not in _PEAK_DIVISOR:
        raise InvalidParameterError(f"unknown family {family!r}")
    k = _check_k(k)
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameterError(f"invalid pulse count {n!r}")
    return (2 * k - 1) * n / _PEAK_DIVISOR[family]


def _half_max_crossing(u, v, i, half, step):
    """Walk from index ``i`` in direction ``step`` to the half-maximum crossing."""
    j = i
    while 0 <= j + step < len(v) and v[j + step] > half:
        j += step
    if not 0 <= j + step < len(v):
        return u[j]
    a, b = v[j], v[j + step]
    return u[j] + (u[j + step] - u[j]) * (a - half) / (a - b)


def locate_peak_numeric(seq: PulseSequence, window_lo: float, window_hi: float,
                        k: int = 1, samples_per_unit: int = 2000) -> PeakReport:
    """Find the filter maximum of ``seq`` inside ``[window_lo, window_hi]``.

    The window is given in units of ``omega t / 2 pi``. A dense scan locates
    the best sample, golden-section search refines it, and the full width at
    half maximum is read off the scan by linear interpolation.
    """
    if not (0 <= window_lo < window_hi):
        raise InvalidParameterError("window must satisfy 0 <= lo < hi")
    count = max(2000, int(math.ceil(samples_per_unit * (window_hi - window_lo))) + 1)
    u = np.linspace(window_lo, window_hi, count)
    v = filter_numeric(seq, TWO_PI * u)
    i = int(np.argmax(v))
    if v[i] <= 1e-12:
        raise NoPeakError(f"no filter peak above 1e-12 in [{window_lo}, {window_hi}]")

    def neg(w):
        return -filter_numeric(seq, TWO_PI * w)

    if 0 < i < count - 1:
        res = minimize_scalar(neg, bracket=(u[i - 1], u[i], u[i + 1]), method="golden", tol=1e-8)
        center, height = float(res.x), float(-res.fun)
        if not (u[i - 1] <= center <= u[i + 1]) or height < v[i]:
            center, height = float(u[i]), float(v[i])
    else:
        center, height = float(u[i]), float(v[i])

    half = 0.5 * height
    left = _half_max_crossing(u, v, i, half, -1)
    right = _half_max_crossing(u, v, i, half, +1)
    width = float(right - left)
    if width <= 0:
        width = float(u[1] - u[0])
    return PeakReport(center, height, width, _check_k(k))
