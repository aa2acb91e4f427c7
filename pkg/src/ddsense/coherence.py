"""
Sensor coherence under a pulse sequence.

Quantum engine
--------------
Each nuclear spin precesses about ``z`` at the Larmor frequency while the
sensor is in ``m_s = 0`` and about the tilted axis
``(a_perp, 0, omega_L + a_par)`` while it is in ``m_s = 1``. A pi pulse swaps
the two branches, so the two conditional propagators are ordered products of
alternating rotations. For a maximally mixed nuclear spin the coherence
contribution is ``Re Tr(U0 U1^dagger) / 2``.

Propagators are held as unit quaternions ``(w, x, y, z)`` representing
``exp(-i phi n.sigma / 2)``; the trace formula then reduces to the 4-vector
dot product ``w0 w1 + v0 . v1``. Everything broadcasts over arrays of spins
and evolution times.

Semiclassical engine
--------------------
A discrete noise spectrum turns the overlap integral into a sum over lines,
``L = exp(-sum_j weight_j / pi * F(omega_j t) / omega_j**2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bath import (DEFAULT_CONSTANTS, NuclearSpin, PhysicalConstants, SpectrumPeak,
                   larmor_frequency, noise_spectrum)
from .errors import InvalidParameterError
from .filters import filter_numeric
from .sequences import PulseSequence

ENGINES = ("quantum", "semiclassical")


# -- quaternions -----------------------------------------------------------

def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternion arrays with trailing axis of length 4."""
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def quat_from_angle_axis(angle, axis) -> np.ndarray:
    angle = np.asarray(angle, dtype=float)
    axis = np.asarray(axis, dtype=float)
    half = 0.5 * angle
    return np.concatenate([np.cos(half)[..., None], np.sin(half)[..., None] * axis], axis=-1)


@dataclass(frozen=True)
class Rotation:
    """A rotation by ``angle`` (radians, in [0, 2 pi)) about a unit ``axis``."""

    angle: float
    axis: tuple[float, float, float]

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=float)
        norm = float(np.linalg.norm(ax))
        if norm == 0 or not math.isfinite(norm):
            raise InvalidParameterError("rotation axis must be a non-zero finite vector")
        ax = ax / norm
        object.__setattr__(self, "axis", tuple(float(c) for c in ax))
        object.__setattr__(self, "angle", float(self.angle) % (2.0 * math.pi))

    @classmethod
    def from_quaternion(cls, q) -> Rotation:
        q = np.asarray(q, dtype=float)
        v = q[1:]
        s = float(np.linalg.norm(v))
        angle = 2.0 * math.atan2(s, float(q[0]))
        if s < 1e-15:
            return cls(0.0, (0.0, 0.0, 1.0))
        return cls(angle, tuple(v / s))

    def quaternion(self) -> np.ndarray:
        return quat_from_angle_axis(self.angle, self.axis)

    def compose(self, other: Rotation) -> Rotation:
        """Rotation equivalent to applying ``other`` first, then ``self``."""
        return Rotation.from_quaternion(quat_multiply(self.quaternion(), other.quaternion()))


def conditioned_rotation(spin: NuclearSpin, B: float, duration: float, electron_state: int,
                         constants: PhysicalConstants = DEFAULT_CONSTANTS) -> Rotation:
    """Nuclear rotation accumulated over ``duration`` with the sensor in ``electron_state``."""
    if duration < 0:
        raise InvalidParameterError("duration must be >= 0")
    wl = larmor_frequency(B, constants)
    if electron_state == 0:
        return Rotation(wl * duration, (0.0, 0.0, 1.0))
    if electron_state == 1:
        w1 = math.hypot(wl + spin.a_par, spin.a_perp)
        if w1 == 0:
            return Rotation(0.0, (0.0, 0.0, 1.0))
        return Rotation(w1 * duration, (spin.a_perp / w1, 0.0, (wl + spin.a_par) / w1))
    raise InvalidParameterError("electron_state must be 0 or 1")


# -- quantum engine --------------------------------------------------------

def branch_propagators(a_par, a_perp, omega_l: float, fractions, total_time):
    """Conditional propagators ``(U0, U1)`` as quaternion arrays.

    ``a_par``, ``a_perp`` and ``total_time`` broadcast together; the result
    has that broadcast shape plus a trailing axis of length 4. ``U0`` starts
    in the ``m_s = 0`` branch.
    """
    a_par, a_perp, t = np.broadcast_arrays(np.asarray(a_par, float), np.asarray(a_perp, float),
                                           np.asarray(total_time, float))
    s = np.concatenate(([0.0], np.asarray(fractions, dtype=float), [1.0]))
    gaps = np.diff(s)
    w1 = np.hypot(omega_l + a_par, a_perp)
    safe = np.where(w1 > 0, w1, 1.0)
    ax1 = np.stack([a_perp / safe, np.zeros_like(a_perp), (omega_l + a_par) / safe], axis=-1)
    ident = np.zeros(t.shape + (4,))
    ident[..., 0] = 1.0
    u0, u1 = ident, ident.copy()
    for k, g in enumerate(gaps):
        dt = g * t
        h0 = 0.5 * omega_l * dt
        r0 = np.zeros(t.shape + (4,))
        r0[..., 0], r0[..., 3] = np.cos(h0), np.sin(h0)
        h1 = 0.5 * w1 * dt
        r1 = np.concatenate([np.cos(h1)[..., None], np.sin(h1)[..., None] * ax1], axis=-1)
        if k % 2 == 0:
            u0, u1 = quat_multiply(r0, u0), quat_multiply(r1, u1)
        else:
            u0, u1 = quat_multiply(r1, u0), quat_multiply(r0, u1)
    return u0, u1


def pair_coherence(a_par, a_perp, omega_l: float, fractions, total_time):
    """Vectorised single-spin coherence ``Re Tr(U0 U1^dagger) / 2``."""
    u0, u1 = branch_propagators(a_par, a_perp, omega_l, fractions, total_time)
    return np.clip((u0 * u1).sum(axis=-1), -1.0, 1.0)


def spin_coherence(spin: NuclearSpin, B: float, seq: PulseSequence, total_time,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Coherence factor of one nuclear spin after ``total_time`` seconds."""
    t = np.asarray(total_time, dtype=float)
    if np.any(t < 0):
        raise InvalidParameterError("total_time must be >= 0")
    m = pair_coherence(spin.a_par, spin.a_perp, larmor_frequency(B, constants),
                       seq.fractions, t)
    return float(m) if m.ndim == 0 else m


@dataclass(frozen=True)
class DecayEnvelope:
    """Stretched-exponential decay ``exp(-(t / t2)**stretch)``; ``t2`` may be infinite."""

    t2: float
    stretch: float = 3.0

    def __post_init__(self):
        if not self.t2 > 0 or not self.stretch > 0 or math.isnan(self.t2):
            raise InvalidParameterError("envelope needs t2 > 0 and stretch > 0")

    def factor(self, t):
        t = np.asarray(t, dtype=float)
        val = np.exp(-((t / self.t2) ** self.stretch))
        return float(val) if val.ndim == 0 else val


NO_DECAY = DecayEnvelope(math.inf)


def total_coherence(bath: Iterable[NuclearSpin], B: float, seq: PulseSequence, total_time,
                    envelope: DecayEnvelope | None = None,
                    constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Product of single-spin factors times the decay envelope."""
    t = np.asarray(total_time, dtype=float)
    result = np.ones_like(t)
    for spin in bath:
        result = result * spin_coherence(spin, B, seq, t, constants)
    if envelope is not None:
        result = result * envelope.factor(t)
    return float(result) if np.ndim(result) == 0 else result


# -- semiclassical engine --------------------------------------------------

def semiclassical_coherence(spectrum: Sequence[SpectrumPeak], seq: PulseSequence, total_time):
    """Coherence from a discrete noise spectrum and the filter of ``seq``."""
    t = np.asarray(total_time, dtype=float)
    if np.any(t < 0):
        raise InvalidParameterError("total_time must be >= 0")
    exponent = np.zeros_like(t)
    for pk in spectrum:
        if not pk.omega > 0:
            raise InvalidParameterError("spectrum lines need omega > 0")
        exponent = exponent + pk.weight / math.pi * filter_numeric(seq, pk.omega * t) / pk.omega**2
    val = np.exp(-exponent)
    return float(val) if val.ndim == 0 else val


# -- curves ----------------------------------------------------------------

@dataclass
class CoherenceCurve:
    """Coherence sampled on a grid of inter-pulse times ``tau = t / n`` (seconds)."""

    tau_values: np.ndarray
    l_values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tau_values = np.asarray(self.tau_values, dtype=float)
        self.l_values = np.asarray(self.l_values, dtype=float)
        if self.tau_values.shape != self.l_values.shape or self.tau_values.ndim != 1:
            raise InvalidParameterError("tau and L must be 1-D arrays of equal length")
        if np.any(np.diff(self.tau_values) <= 0):
            raise InvalidParameterError("tau values must be strictly increasing")

    @property
    def envelope(self) -> DecayEnvelope | None:
        t2 = self.metadata.get("t2")
        if t2 is None:
            return None
        return DecayEnvelope(float(t2), float(self.metadata.get("stretch", 3.0)))

    @property
    def n(self) -> int:
        return int(self.metadata["n"])


def coherence_curve(bath: Sequence[NuclearSpin], B: float, seq: PulseSequence,
                    tau_min: float, tau_max: float, steps: int,
                    envelope: DecayEnvelope | None = None, engine: str = "quantum",
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> CoherenceCurve:
    """Sample ``L(tau)`` on a uniform grid with ``total_time = n * tau``."""
    if not (0 <= tau_min < tau_max):
        raise InvalidParameterError("need 0 <= tau_min < tau_max")
    if steps < 2:
        raise InvalidParameterError("need at least 2 steps")
    if seq.n < 1:
        raise InvalidParameterError("sequence must contain at least one pulse")
    if engine not in ENGINES:
        raise InvalidParameterError(f"unknown engine {engine!r}")
    tau = np.linspace(tau_min, tau_max, steps)
    t = seq.n * tau
    if engine == "quantum":
        values = total_coherence(bath, B, seq, t, None, constants)
    else:
        values = semiclassical_coherence(noise_spectrum(bath, B, constants), seq, t)
    values = np.asarray(values, dtype=float)
    if envelope is not None:
        values = values * envelope.factor(t)
    meta = {"family": seq.family, "n": seq.n, **{k: str(v) for k, v in seq.params},
            "B": B, "engine": engine, "spins": len(bath)}
    if envelope is not None:
        meta.update(t2=envelope.t2, stretch=envelope.stretch)
    return CoherenceCurve(tau, values, meta)
