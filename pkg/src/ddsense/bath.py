"""
Nuclear spins around the sensor and the discrete noise spectrum they produce.

Hyperfine couplings follow the point-dipole model with the NV axis (and the
static field) along ``z``. Random baths are drawn from a diamond lattice with
the NV axis along [111]. All frequencies are angular (rad/s) unless a name
says ``_hz``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.constants as sc

from .errors import InvalidParameterError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    gamma_e: float = sc.physical_constants["electron gyromag. ratio"][0]
    gamma_c13: float = 6.728284e7
    mu0_over_4pi: float = sc.mu_0 / (4.0 * math.pi)
    hbar: float = sc.hbar
    lattice_constant: float = 3.567e-10

    def __post_init__(self):
        for name in ("gamma_e", "gamma_c13", "mu0_over_4pi", "hbar", "lattice_constant"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")

    @property
    def dipolar_prefactor(self) -> float:
        """``mu0/4pi * hbar * gamma_e * gamma_c13`` in rad/s * m^3."""
        return self.mu0_over_4pi * self.hbar * self.gamma_e * self.gamma_c13


DEFAULT_CONSTANTS = PhysicalConstants()

#: Spectral weight per unit ``a_perp**2``. Chosen so that the semiclassical
#: exponent equals the weak-coupling expansion of the quantum coherence.
SPECTRAL_WEIGHT_SCALE = math.pi / 4.0

DEFAULT_COUPLING_CUTOFF = TWO_PI * 200e3


@dataclass(frozen=True)
class NuclearSpin:
    """A nuclear spin-1/2 coupled to the sensor.

    Attributes
    ----------
    a_par, a_perp : float
        Hyperfine components parallel and transverse to the NV axis (rad/s).
    d, theta : float, optional
        Distance (m) and inclination (rad) when built from geometry.
    """

    a_par: float
    a_perp: float
    d: float | None = None
    theta: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.a_par) and math.isfinite(self.a_perp)):
            raise InvalidParameterError("hyperfine components must be finite")
        if self.a_perp < 0:
            raise InvalidParameterError("a_perp must be >= 0")
        if self.d is not None and not self.d > 0:
            raise InvalidParameterError("distance must be positive")
        if self.theta is not None and not (0.0 <= self.theta <= math.pi):
            raise InvalidParameterError("theta must lie in [0, pi]")

    @classmethod
    def from_geometry(cls, d: float, theta: float,
                      constants: PhysicalConstants = DEFAULT_CONSTANTS) -> NuclearSpin:
        a_par, a_perp = hyperfine_from_geometry(d, theta, constants)
        return cls(a_par, a_perp, d, theta)

    @classmethod
    def from_hz(cls, a_par_hz: float, a_perp_hz: float, d=None, theta=None) -> NuclearSpin:
        return cls(TWO_PI * a_par_hz, TWO_PI * a_perp_hz, d, theta)

    @property
    def a_par_hz(self) -> float:
        return self.a_par / TWO_PI

    @property
    def a_perp_hz(self) -> float:
        return self.a_perp / TWO_PI


@dataclass(frozen=True)
class SpectrumPeak:
    omega: float
    weight: float


def hyperfine_from_geometry(d: float, theta: float,
                            constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Point-dipole hyperfine pair ``(a_par, a_perp)`` in rad/s.

    ``d`` is the sensor-nucleus distance in metres and ``theta`` the angle of
    the separation vector to the NV axis.
    """
    if not d > 0:
        raise InvalidParameterError(f"distance must be positive, got {d}")
    if not (0.0 <= theta <= math.pi):
        raise InvalidParameterError(f"theta must lie in [0, pi], got {theta}")
    b = constants.dipolar_prefactor / d**3
    c, s = math.cos(theta), math.sin(theta)
    return b * (3.0 * c * c - 1.0), abs(3.0 * b * s * c)


def hyperfine_arrays(d, theta, constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Vectorised :func:`hyperfine_from_geometry` without validation."""
    d = np.asarray(d, dtype=float)
    theta = np.asarray(theta, dtype=float)
    b = constants.dipolar_prefactor / d**3
    c, s = np.cos(theta), np.sin(theta)
    return b * (3.0 * c * c - 1.0), np.abs(3.0 * b * s * c)


def larmor_frequency(B: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Bare 13C precession frequency (rad/s) in a field ``B`` (tesla)."""
    if B < 0:
        raise InvalidParameterError("field must be >= 0")
    return constants.gamma_c13 * B


def effective_frequencies(spin: NuclearSpin, B: float,
                          constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Nuclear precession frequencies with the sensor in ``m_s = 0`` and ``m_s = 1``."""
    wl = larmor_frequency(B, constants)
    return wl, math.hypot(wl + spin.a_par, spin.a_perp)


def mean_frequency(spin: NuclearSpin, B: float,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    w0, w1 = effective_frequencies(spin, B, constants)
    return 0.5 * (w0 + w1)


@lru_cache(maxsize=16)
def _lattice_sites(shell_min: float, shell_max: float, a: float):
    # integer coordinates in units of a/4; FCC + (1,1,1) basis
    m = int(math.ceil(shell_max / a)) + 1
    cells = np.arange(-m, m + 1)
    base = np.array([[0, 0, 0], [0, 2, 2], [2, 0, 2], [2, 2, 0]])
    base = np.concatenate([base, base + 1])
    grid = np.stack(np.meshgrid(cells, cells, cells, indexing="ij"), axis=-1).reshape(-1, 3) * 4
    pts = (grid[:, None, :] + base[None, :, :]).reshape(-1, 3)
    r2 = (pts**2).sum(axis=1)
    lo2, hi2 = (shell_min / (a / 4)) ** 2, (shell_max / (a / 4)) ** 2
    keep = (r2 >= lo2) & (r2 <= hi2)
    pts, r2 = pts[keep], r2[keep]
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0], r2))
    pts = pts[order]
    pts.setflags(write=False)
    return pts


def diamond_sites(shell_min: float, shell_max: float,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Carbon sites (m) with distance from the origin in ``[shell_min, shell_max]``.

    Sites are ordered by distance, then lexicographically by lattice index.
    """
    if not (0 < shell_min < shell_max):
        raise InvalidParameterError("shell bounds must satisfy 0 < min < max")
    a = constants.lattice_constant
    return _lattice_sites(float(shell_min), float(shell_max), float(a)) * (a / 4.0)


def sample_bath(seed: int, abundance: float = 0.011, shell_min: float = 0.3e-9,
                shell_max: float = 3e-9, coupling_cutoff: float = DEFAULT_COUPLING_CUTOFF,
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> list[NuclearSpin]:
    """Randomly occupy diamond lattice sites with 13C and convert to spins.

    Spins with ``|a_par|`` or ``a_perp`` above ``coupling_cutoff`` are dropped.
    """
    if not (0 < abundance < 1):
        raise InvalidParameterError("abundance must lie in (0, 1)")
    sites = diamond_sites(shell_min, shell_max, constants)
    rng = np.random.default_rng(seed)
    occupied = sites[rng.random(len(sites)) < abundance]
    d = np.linalg.norm(occupied, axis=1)
    cos_t = np.clip(occupied.sum(axis=1) / (math.sqrt(3.0) * d), -1.0, 1.0)
    theta = np.arccos(cos_t)
    a_par, a_perp = hyperfine_arrays(d, theta, constants)
    keep = (np.abs(a_par) <= coupling_cutoff) & (a_perp <= coupling_cutoff)
    return [NuclearSpin(float(ap), float(at), float(dd), float(th))
            for ap, at, dd, th in zip(a_par[keep], a_perp[keep], d[keep], theta[keep])]


def noise_spectrum(bath: Iterable[NuclearSpin], B: float,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS) -> list[SpectrumPeak]:
    """One spectral line per spin, at the mean conditional precession frequency."""
    peaks = [SpectrumPeak(mean_frequency(s, B, constants), SPECTRAL_WEIGHT_SCALE * s.a_perp**2)
             for s in bath]
    return sorted(peaks, key=lambda pk: (pk.omega, pk.weight))


# -- bath files ------------------------------------------------------------

def read_bath(path) -> list[NuclearSpin]:
    """Read ``a_par_hz a_perp_hz [d_nm theta_deg]`` lines; ``#`` starts a comment."""
    spins = []
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (2, 4):
            raise InvalidParameterError(f"{path}:{lineno}: expected 2 or 4 columns")
        try:
            vals = [float(f) for f in fields]
        except ValueError as exc:
            raise InvalidParameterError(f"{path}:{lineno}: {exc}") from exc
        d = theta = None
        if len(vals) == 4:
            d, theta = vals[2] * 1e-9, math.radians(vals[3])
        spins.append(NuclearSpin.from_hz(vals[0], vals[1], d, theta))
    return spins


def format_bath(bath: Sequence[NuclearSpin], header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.append("# a_par_hz a_perp_hz [d_nm theta_deg]")
    for s in bath:
        row = f"{s.a_par_hz:.6f} {s.a_perp_hz:.6f}"
        if s.d is not None and s.theta is not None:
            row += f" {s.d * 1e9:.6f} {math.degrees(s.theta):.6f}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def write_bath(path, bath: Sequence[NuclearSpin], header: Sequence[str] = ()) -> None:
    Path(path).write_text(format_bath(bath, header))


def example_bath_path() -> Path:
    """Path of the illustrative five-spin bath shipped with the package."""
    return Path(__file__).with_name("data") / "example_bath.txt"


def example_bath() -> list[NuclearSpin]:
    return read_bath(example_bath_path())
