"""
Dip detection, signal magnitudes, parameter sweeps, magnitude maps and the
grid-search optimiser.

The signal magnitude of a spin is the depth of its coherence dip at the
first dominant-peak resonance: the largest value of ``envelope * (1 - M)``
over a window of +/-50 % around the predicted resonance time. Without an
envelope this is the bare quantum dip depth.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bath import (DEFAULT_CONSTANTS, NuclearSpin, PhysicalConstants, hyperfine_arrays,
                   larmor_frequency)
from .coherence import CoherenceCurve, DecayEnvelope, pair_coherence
from .errors import InvalidParameterError
from .filters import dominant_peak_position
from .sequences import PulseSequence, build_designed3, build_designed5, build_sequence

WINDOW_HALF_WIDTH = 0.5
WINDOW_SAMPLES = 801
_REFINE_SAMPLES = 41
_CHUNK = 256
# scores closer than this count as ties, so rounding noise cannot pick the winner
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Dip:
    tau_center: float
    depth: float
    width: float
    zone_label: str | None = None


@dataclass
class MagnitudeMap:
    """Dip depths on a grid of nuclear positions.

    ``values[i, j]`` belongs to ``d_par_axis[i]`` and ``d_perp_axis[j]``
    (metres). Difference maps carry ``signed=True``.
    """

    d_par_axis: np.ndarray
    d_perp_axis: np.ndarray
    values: np.ndarray
    params: dict = field(default_factory=dict)
    signed: bool = False

    def __post_init__(self):
        self.d_par_axis = np.asarray(self.d_par_axis, dtype=float)
        self.d_perp_axis = np.asarray(self.d_perp_axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.d_par_axis.size, self.d_perp_axis.size):
            raise InvalidParameterError("map values do not match the axes")
        if not self.signed and np.any((self.values < 0) | (self.values > 2)):
            raise InvalidParameterError("magnitudes must lie in [0, 2]")

    def area_above(self, level: float) -> int:
        """Number of cells with magnitude at or above ``level``."""
        return int(np.count_nonzero(self.values >= level))


@dataclass(frozen=True)
class OptimizationResult:
    params: dict
    score: float
    target_magnitude: float
    interferer_magnitude: float


# -- dip detection ---------------------------------------------------------

_ROMAN = [(10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I")]


def roman(k: int) -> str:
    out = ""
    for value, sym in _ROMAN:
        while k >= value:
            out += sym
            k -= value
    return out


def _upper_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Piecewise-linear upper convex hull of the points, evaluated on ``x``."""
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.interp(x, x[hull], y[hull])


def _baseline(curve: CoherenceCurve) -> np.ndarray:
    env = curve.envelope
    if env is not None and "n" in curve.metadata:
        return env.factor(curve.n * curve.tau_values)
    tau, L = curve.tau_values, curve.l_values
    inner = np.flatnonzero((L[1:-1] >= L[:-2]) & (L[1:-1] >= L[2:])) + 1
    idx = np.unique(np.concatenate(([0], inner, [len(L) - 1])))
    return np.interp(tau, tau[idx], _upper_hull(tau[idx], L[idx]))


def _half_width_edges(x, deficit, i):
    half = 0.5 * deficit[i]
    edges = []
    for step in (-1, 1):
        j = i
        while 0 <= j + step < len(x) and deficit[j + step] > half:
            j += step
        if 0 <= j + step < len(x):
            a, b = deficit[j], deficit[j + step]
            edges.append(x[j] + (x[j + step] - x[j]) * (a - half) / (a - b))
        else:
            edges.append(x[j])
    return edges


def detect_dips(curve: CoherenceCurve, min_depth: float = 0.1) -> list[Dip]:
    """Find coherence dips deeper than ``min_depth`` below the baseline.

    The baseline is the decay envelope recorded in the curve metadata when
    present, otherwise the upper hull of the local maxima. Minima closer than
    one dip width are merged and reported at the deepest point. Dips are
    labelled I, II, ... in order of increasing ``tau``.
    """
    tau, L = curve.tau_values, curve.l_values
    if tau.size < 3:
        raise InvalidParameterError("dip detection needs at least 3 points")
    deficit = _baseline(curve) - L
    cand = np.flatnonzero((L[1:-1] <= L[:-2]) & (L[1:-1] < L[2:])) + 1
    cand = [i for i in cand if deficit[i] > min_depth]
    if not cand:
        return []
    found = []
    for i in cand:
        lo, hi = _half_width_edges(tau, deficit, i)
        found.append([i, lo, hi])
    merged = [found[0]]
    for i, lo, hi in found[1:]:
        cur = merged[-1]
        width = max(cur[2] - cur[1], hi - lo)
        if tau[i] - tau[cur[0]] <= width:
            if deficit[i] > deficit[cur[0]]:
                cur[0] = i
            cur[1], cur[2] = min(cur[1], lo), max(cur[2], hi)
        else:
            merged.append([i, lo, hi])
    step = float(tau[1] - tau[0])
    return [Dip(float(tau[i]), float(deficit[i]), float(max(hi - lo, step)), roman(k + 1))
            for k, (i, lo, hi) in enumerate(merged)]


# -- signal magnitudes -----------------------------------------------------

def _window_depths(a_par, a_perp, omega_l, seq: PulseSequence, position: float,
                   envelope: DecayEnvelope | None, samples: int):
    """Deepest point of ``envelope * (1 - M)`` in the resonance window, per spin.

    Returns ``(depth, tau, width)`` arrays.
    """
    a_par = np.atleast_1d(np.asarray(a_par, dtype=float))
    a_perp = np.atleast_1d(np.asarray(a_perp, dtype=float))
    n = seq.n
    fr = seq.fractions
    w1 = np.hypot(omega_l + a_par, a_perp)
    w_mean = 0.5 * (omega_l + w1)
    live = w_mean > 0
    tau_res = np.where(live, 2.0 * math.pi * position / (np.where(live, w_mean, 1.0) * n), 1.0)
    u = np.linspace(1.0 - WINDOW_HALF_WIDTH, 1.0 + WINDOW_HALF_WIDTH, samples)
    du = u[1] - u[0]

    def depth_at(tau):
        t = n * tau
        d = 1.0 - pair_coherence(a_par[:, None], a_perp[:, None], omega_l, fr, t)
        if envelope is not None:
            d = d * envelope.factor(t)
        return d

    tau = tau_res[:, None] * u[None, :]
    d = depth_at(tau)
    i = np.argmax(d, axis=1)
    rows = np.arange(len(a_par))
    best = d[rows, i]
    best_u = u[i]

    # local refinement around the best coarse sample
    fine = np.linspace(-1.0, 1.0, _REFINE_SAMPLES) * du
    uf = np.clip(best_u[:, None] + fine[None, :], u[0], u[-1])
    df = depth_at(tau_res[:, None] * uf)
    j = np.argmax(df, axis=1)
    better = df[rows, j] > best
    best = np.where(better, df[rows, j], best)
    best_u = np.where(better, uf[rows, j], best_u)

    widths = np.empty(len(a_par))
    for r in range(len(a_par)):
        lo, hi = _half_width_edges(u, d[r], int(i[r]))
        widths[r] = max(hi - lo, du) * tau_res[r]
    best = np.where(live, np.clip(best, 0.0, 2.0), 0.0)
    return best, best_u * tau_res, widths


def _position(seq: PulseSequence, k: int, position: float | None) -> float:
    if position is not None:
        if not position > 0:
            raise InvalidParameterError("resonance position must be positive")
        return float(position)
    if seq.family == "custom":
        raise InvalidParameterError("custom sequences need an explicit resonance position")
    return dominant_peak_position(seq.family, seq.n, k)


def resonance_dip(spin: NuclearSpin, B: float, seq: PulseSequence, k: int = 1,
                  position: float | None = None, envelope: DecayEnvelope | None = None,
                  samples: int = WINDOW_SAMPLES,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> Dip:
    """The coherence dip of ``spin`` at the k-th dominant-peak resonance of ``seq``.

    The predicted resonance time solves ``omega_mean * n * tau = 2 pi * position``
    with ``position`` the dominant-peak centre in units of ``omega t / 2 pi``.
    """
    pos = _position(seq, k, position)
    depth, tau, width = _window_depths(spin.a_par, spin.a_perp, larmor_frequency(B, constants),
                                       seq, pos, envelope, samples)
    return Dip(float(tau[0]), float(depth[0]), float(width[0]))


def signal_magnitude(spin: NuclearSpin, B: float, seq: PulseSequence, k: int = 1,
                     position: float | None = None, envelope: DecayEnvelope | None = None,
                     samples: int = WINDOW_SAMPLES,
                     constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Depth of the resonance dip of ``spin`` (see :func:`resonance_dip`)."""
    return resonance_dip(spin, B, seq, k, position, envelope, samples, constants).depth


def magnitude_vs_r(spin: NuclearSpin, B: float, n: int, r_grid: Sequence,
                   envelope: DecayEnvelope | None = None,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Signal magnitude under ``designed3(n, r)`` for each ``r``; rows are ``(r, magnitude)``."""
    seqs = [build_designed3(n, r) for r in r_grid]
    out = np.empty((len(seqs), 2))
    for row, seq in enumerate(seqs):
        out[row] = float(seq.param("r")), signal_magnitude(spin, B, seq, envelope=envelope,
                                                           constants=constants)
    return out


def _map_chunk(args):
    a_par, a_perp, omega_l, seq, pos, envelope, samples = args
    return _window_depths(a_par, a_perp, omega_l, seq, pos, envelope, samples)[0]


def _check_axis(axis, name) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty 1-D axis")
    if np.any(axis <= 0) or np.any(np.diff(axis) <= 0):
        raise InvalidParameterError(f"{name} must be positive and strictly increasing")
    return axis


def magnitude_map(B: float, seq: PulseSequence, d_par_axis, d_perp_axis,
                  envelope: DecayEnvelope | None = None, k: int = 1,
                  position: float | None = None, workers: int = 1,
                  samples: int = WINDOW_SAMPLES,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> MagnitudeMap:
    """Signal magnitude of a 13C spin at every ``(d_par, d_perp)`` grid position."""
    d_par_axis = _check_axis(d_par_axis, "d_par_axis")
    d_perp_axis = _check_axis(d_perp_axis, "d_perp_axis")
    pos = _position(seq, k, position)
    par, perp = np.meshgrid(d_par_axis, d_perp_axis, indexing="ij")
    a_par, a_perp = hyperfine_arrays(np.hypot(par, perp), np.arctan2(perp, par), constants)
    a_par, a_perp = a_par.ravel(), a_perp.ravel()
    wl = larmor_frequency(B, constants)
    jobs = [(a_par[s:s + _CHUNK], a_perp[s:s + _CHUNK], wl, seq, pos, envelope, samples)
            for s in range(0, a_par.size, _CHUNK)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_map_chunk, jobs))
    else:
        parts = [_map_chunk(job) for job in jobs]
    values = np.concatenate(parts).reshape(par.shape)
    params = {"family": seq.family, "n": seq.n, **{k_: str(v) for k_, v in seq.params},
              "B": B}
    if envelope is not None:
        params.update(t2=envelope.t2, stretch=envelope.stretch)
    return MagnitudeMap(d_par_axis, d_perp_axis, values, params)


def map_difference(map_a: MagnitudeMap, map_b: MagnitudeMap) -> MagnitudeMap:
    """Signed element-wise difference ``map_a - map_b``."""
    if not (np.array_equal(map_a.d_par_axis, map_b.d_par_axis)
            and np.array_equal(map_a.d_perp_axis, map_b.d_perp_axis)):
        raise InvalidParameterError("maps have different axes")
    params = {**{f"a.{k}": v for k, v in map_a.params.items()},
              **{f"b.{k}": v for k, v in map_b.params.items()}}
    return MagnitudeMap(map_a.d_par_axis, map_a.d_perp_axis, map_a.values - map_b.values,
                        params, signed=True)


# -- optimiser -------------------------------------------------------------

def selectivity_score(target: NuclearSpin, interferers: Sequence[NuclearSpin], B: float,
                      seq: PulseSequence, suppression_weight: float = 1.0,
                      envelope: DecayEnvelope | None = None,
                      constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """``magnitude(target) - weight * max magnitude(interferers)`` and both terms."""
    spins = [target, *interferers]
    depth, _, _ = _window_depths([s.a_par for s in spins], [s.a_perp for s in spins],
                                 larmor_frequency(B, constants), seq,
                                 _position(seq, 1, None), envelope, WINDOW_SAMPLES)
    worst = float(depth[1:].max()) if len(spins) > 1 else 0.0
    return float(depth[0]) - suppression_weight * worst, float(depth[0]), worst


def parameter_grid(family: str, grid_resolution: int) -> list[dict]:
    """Candidate parameters on the open interval (0, 1/2), in tie-break order."""
    if grid_resolution < 10:
        raise InvalidParameterError("grid_resolution must be >= 10")
    values = [Fraction(i, 2 * (grid_resolution + 1)) for i in range(1, grid_resolution + 1)]
    if family == "designed3":
        return [{"r": r} for r in values]
    if family == "designed5":
        return [{"p": p, "q": q} for p, q in itertools.combinations(values, 2)]
    raise InvalidParameterError(f"cannot optimise family {family!r}")


def optimize_params(target: NuclearSpin, interferers: Sequence[NuclearSpin], B: float,
                    family: str, n: int, grid_resolution: int = 50,
                    suppression_weight: float = 1.0, envelope: DecayEnvelope | None = None,
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> OptimizationResult:
    """Exhaustive grid search for the most selective sequence parameters.

    Ties (within ``TIE_TOLERANCE``) keep the earliest candidate, i.e. the
    smallest ``r``, then ``p``, then ``q``.
    """
    if suppression_weight < 0:
        raise InvalidParameterError("suppression_weight must be >= 0")
    grid = parameter_grid(family, grid_resolution)
    if not grid:
        raise InvalidParameterError("empty parameter grid")
    build_sequence(family, n, **grid[0])  # validates n before the sweep
    best = None
    for params in grid:
        seq = build_sequence(family, n, **params)
        score, tmag, imag = selectivity_score(target, interferers, B, seq, suppression_weight,
                                              envelope, constants)
        if best is None or score > best.score + TIE_TOLERANCE:
            best = OptimizationResult(dict(params), score, tmag, imag)
    return best
