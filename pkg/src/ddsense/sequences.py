"""
Dynamical-decoupling pulse sequences.

A sequence is stored as the ordered times of ideal (zero-width) pi pulses,
expressed as fractions of the total free-evolution time ``t``. Three families
are built in:

``cpmg``
    ``n`` repetitions of ``tau/2 - pi - tau/2``.
``designed3``
    ``n/3`` repetitions of a three-pulse unit of length ``3 tau``; the middle
    pulse sits at the unit centre and the outer pulses at ``-/+ 3 r tau``.
``designed5``
    ``n/5`` repetitions of a five-pulse unit of length ``5 tau`` with pulses
    at ``0, -/+ 5 p tau, -/+ 5 q tau`` from the unit centre.

Positions are built from exact rationals and converted to ``float`` once, so
``designed3(n, 1/3)`` and ``designed5(n, 1/5, 2/5)`` are bit-identical to
``cpmg(n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real
from typing import Iterable

import numpy as np

from .errors import InvalidParameterError

FAMILIES = ("cpmg", "designed3", "designed5", "custom")


def as_fraction(value) -> Fraction:
    """Convert ``value`` to an exact :class:`Fraction`.

    Strings such as ``"3/10"`` or ``"0.3"`` are parsed exactly; floats are
    converted by their exact binary value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidParameterError(f"cannot parse {value!r} as a rational") from exc
    if isinstance(value, (Rational, Real, np.floating, np.integer)):
        if not np.isfinite(float(value)):
            raise InvalidParameterError(f"non-finite parameter {value!r}")
        return Fraction(value) if isinstance(value, Rational) else Fraction(float(value))
    raise InvalidParameterError(f"unsupported parameter type {type(value).__name__}")


@dataclass(frozen=True)
class PulseSequence:
    """Ordered pi-pulse positions as fractions of the total evolution time.

    Attributes
    ----------
    pulse_fractions : tuple of float
        Strictly increasing values in the open interval (0, 1).
    family : str
        One of ``cpmg``, ``designed3``, ``designed5`` or ``custom``.
    params : tuple of (str, Fraction)
        Family parameters (``r`` or ``p``/``q``), kept exact.
    """

    pulse_fractions: tuple[float, ...]
    family: str = "custom"
    params: tuple[tuple[str, Fraction], ...] = field(default=())

    def __post_init__(self):
        fr = tuple(float(f) for f in self.pulse_fractions)
        object.__setattr__(self, "pulse_fractions", fr)
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown sequence family {self.family!r}")
        if any(not (0.0 < f < 1.0) for f in fr):
            raise InvalidParameterError("pulse fractions must lie in the open interval (0, 1)")
        if any(b <= a for a, b in zip(fr, fr[1:])):
            raise InvalidParameterError("pulse fractions must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.pulse_fractions)

    @property
    def fractions(self) -> np.ndarray:
        return np.asarray(self.pulse_fractions, dtype=float)

    def param(self, name: str) -> Fraction:
        return dict(self.params)[name]

    @property
    def param_dict(self) -> dict[str, Fraction]:
        return dict(self.params)

    def describe(self) -> str:
        """Short human-readable tag, e.g. ``designed3(n=30, r=3/10)``."""
        extra = "".join(f", {k}={v}" for k, v in self.params)
        return f"{self.family}(n={self.n}{extra})"

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        fr = self.fractions
        return bool(np.all(np.abs(fr + fr[::-1] - 1.0) <= tol))


def _check_n(n, divisor: int = 1) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidParameterError(f"pulse count must be an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise InvalidParameterError(f"pulse count must be >= 1, got {n}")
    if n % divisor:
        raise InvalidParameterError(f"pulse count must be divisible by {divisor}, got {n}")
    return n


def build_cpmg(n: int) -> PulseSequence:
    """CPMG-n: pulses at ``(2j + 1) / (2n)``."""
    n = _check_n(n)
    return PulseSequence(tuple(float(Fraction(2 * j + 1, 2 * n)) for j in range(n)), "cpmg")


def check_designed3(n, r) -> tuple[int, Fraction]:
    n = _check_n(n, 6)
    r = as_fraction(r)
    if not (0 < r < Fraction(1, 2)):
        raise InvalidParameterError(f"r must satisfy 0 < r < 0.5, got {r}")
    return n, r


def check_designed5(n, p, q) -> tuple[int, Fraction, Fraction]:
    n = _check_n(n, 10)
    p, q = as_fraction(p), as_fraction(q)
    if not (0 < p < q < Fraction(1, 2)):
        raise InvalidParameterError(f"p, q must satisfy 0 < p < q < 0.5, got p={p}, q={q}")
    return n, p, q


def build_designed3(n: int, r) -> PulseSequence:
    """Three-pulse-unit sequence; ``n`` divisible by 6, ``0 < r < 1/2``."""
    n, r = check_designed3(n, r)
    offsets = (-3 * r / n, Fraction(0), 3 * r / n)
    fr = []
    for u in range(n // 3):
        centre = Fraction(3 * (2 * u + 1), 2 * n)
        fr.extend(float(centre + o) for o in offsets)
    return PulseSequence(tuple(fr), "designed3", (("r", r),))


def build_designed5(n: int, p, q) -> PulseSequence:
    """Five-pulse-unit sequence; ``n`` divisible by 10, ``0 < p < q < 1/2``."""
    n, p, q = check_designed5(n, p, q)
    offsets = (-5 * q / n, -5 * p / n, Fraction(0), 5 * p / n, 5 * q / n)
    fr = []
    for u in range(n // 5):
        centre = Fraction(5 * (2 * u + 1), 2 * n)
        fr.extend(float(centre + o) for o in offsets)
    return PulseSequence(tuple(fr), "designed5", (("p", p), ("q", q)))


def custom_sequence(fractions: Iterable[float]) -> PulseSequence:
    return PulseSequence(tuple(fractions), "custom")


def build_sequence(family: str, n: int, r=None, p=None, q=None) -> PulseSequence:
    """Dispatch to the builder for ``family``."""
    if family == "cpmg":
        return build_cpmg(n)
    if family == "designed3":
        if r is None:
            raise InvalidParameterError("designed3 requires r")
        return build_designed3(n, r)
    if family == "designed5":
        if p is None or q is None:
            raise InvalidParameterError("designed5 requires p and q")
        return build_designed5(n, p, q)
    raise InvalidParameterError(f"unknown sequence family {family!r}")


def switching_value(seq: PulseSequence, s: float) -> int:
    """Sign of the modulation function at fraction ``s`` of the evolution.

    Returns ``(-1)**k`` where ``k`` counts pulses strictly before ``s``.
    """
    if not (0.0 <= s <= 1.0):
        raise InvalidParameterError(f"s must lie in [0, 1], got {s}")
    k = int(np.searchsorted(seq.fractions, s, side="left"))
    return -1 if k % 2 else 1


def switching_function(seq: PulseSequence, s) -> np.ndarray:
    """Vectorised :func:`switching_value` over an array of fractions."""
    s = np.asarray(s, dtype=float)
    if np.any((s < 0) | (s > 1)):
        raise InvalidParameterError("s must lie in [0, 1]")
    k = np.searchsorted(seq.fractions, s, side="left")
    return np.where(k % 2, -1, 1)
