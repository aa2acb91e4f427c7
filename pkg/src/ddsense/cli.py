"""
Command-line interface.

Every subcommand resolves its parameters from built-in defaults, then an
optional ``--config`` file, then explicit flags, validates all of them, and
only then computes. Outputs start with a ``# ddsense <command>`` header that
echoes the resolved configuration; passing such a file back as ``--config``
reproduces it byte for byte.

Exit codes: 0 ok, 2 invalid configuration, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import io
from .analysis import (detect_dips, magnitude_map, magnitude_vs_r, map_difference,
                       optimize_params, parameter_grid)
from .bath import NuclearSpin, format_bath, read_bath, sample_bath
from .coherence import DecayEnvelope, coherence_curve
from .errors import InvalidParameterError
from .filters import filter_analytic, filter_numeric
from .sequences import as_fraction, build_sequence

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

GAUSS = 1e-4

SEQUENCE_DEFAULTS = {"family": "cpmg", "n": "30", "r": None, "p": None, "q": None}
ENVELOPE_DEFAULTS = {"t2_us": "inf", "stretch": "3"}
SPIN_DEFAULTS = {"d_nm": "1", "theta_deg": "60", "a_par_khz": None, "a_perp_khz": None}
SAMPLER_DEFAULTS = {"abundance": "0.011", "shell_min_nm": "0.3", "shell_max_nm": "3",
                    "cutoff_khz": "200"}

DEFAULTS = {
    "filter": {**SEQUENCE_DEFAULTS, "range": "0:20", "points": "2000", "analytic": "false"},
    "coherence": {**SEQUENCE_DEFAULTS, **ENVELOPE_DEFAULTS, **SAMPLER_DEFAULTS,
                  "field_gauss": "27", "bath": None, "tau_min_us": "1", "tau_max_us": "20",
                  "steps": "1000", "engine": "quantum", "dips": None, "min_depth": "0.1"},
    "sweep-r": {**SPIN_DEFAULTS, **ENVELOPE_DEFAULTS, "field_gauss": "27", "n": "30",
                "r_min": "0.005", "r_max": "0.495", "r_steps": "100"},
    "map": {**SEQUENCE_DEFAULTS, **ENVELOPE_DEFAULTS, "field_gauss": "27",
            "d_par_nm": "0.075:3", "d_perp_nm": "0.075:3", "cells": "40", "format": "csv"},
    "map-diff": {"a": None, "b": None, "format": "csv"},
    "optimize": {**SPIN_DEFAULTS, **ENVELOPE_DEFAULTS, "field_gauss": "27",
                 "family": "designed3", "n": "30", "interferers": None, "grid": "50",
                 "weight": "1"},
    "bath-gen": {**SAMPLER_DEFAULTS},
}

# keys that point at input files rather than describing the computation
_INPUT_KEYS = {"bath", "a", "b", "interferers"}


# -- typed accessors -------------------------------------------------------

def _get(cfg, key):
    value = cfg.get(key)
    if value is None or value == "":
        raise InvalidParameterError(f"missing required parameter '{key}'")
    return value


def _float(cfg, key, positive=False, nonneg=False, allow_inf=False) -> float:
    raw = _get(cfg, key)
    try:
        value = float(Fraction(raw)) if "/" in raw else float(raw)
    except (ValueError, ZeroDivisionError):
        raise InvalidParameterError(f"{key}: cannot parse {raw!r} as a number") from None
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise InvalidParameterError(f"{key}: must be finite")
    if positive and not value > 0:
        raise InvalidParameterError(f"{key}: must be > 0")
    if nonneg and value < 0:
        raise InvalidParameterError(f"{key}: must be >= 0")
    return value


def _int(cfg, key, minimum=None) -> int:
    raw = _get(cfg, key)
    try:
        value = int(raw)
    except ValueError:
        raise InvalidParameterError(f"{key}: cannot parse {raw!r} as an integer") from None
    if minimum is not None and value < minimum:
        raise InvalidParameterError(f"{key}: must be >= {minimum}")
    return value


def _bool(cfg, key) -> bool:
    raw = str(cfg.get(key, "false")).lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off"):
        return False
    raise InvalidParameterError(f"{key}: expected a boolean, got {raw!r}")


def _range(cfg, key, positive=False) -> tuple[float, float]:
    raw = _get(cfg, key)
    parts = raw.split(":")
    if len(parts) != 2:
        raise InvalidParameterError(f"{key}: expected lo:hi, got {raw!r}")
    lo, hi = (_float({key: p}, key, nonneg=True) for p in parts)
    if not lo < hi or (positive and lo <= 0):
        raise InvalidParameterError(f"{key}: need {'0 < ' if positive else '0 <= '}lo < hi")
    return lo, hi


def _sequence(cfg):
    family = _get(cfg, "family")
    params = {k: as_fraction(cfg[k]) for k in ("r", "p", "q") if cfg.get(k) not in (None, "")}
    return build_sequence(family, _int(cfg, "n", 1), **params)


def _envelope(cfg):
    t2 = _float(cfg, "t2_us", positive=True, allow_inf=True)
    stretch = _float(cfg, "stretch", positive=True)
    return None if math.isinf(t2) else DecayEnvelope(t2 * 1e-6, stretch)


def _spin(cfg) -> NuclearSpin:
    if cfg.get("a_par_khz") not in (None, "") or cfg.get("a_perp_khz") not in (None, ""):
        return NuclearSpin.from_hz(_float(cfg, "a_par_khz") * 1e3,
                                   _float(cfg, "a_perp_khz", nonneg=True) * 1e3)
    theta = _float(cfg, "theta_deg")
    if not 0 <= theta <= 180:
        raise InvalidParameterError("theta_deg: must lie in [0, 180]")
    return NuclearSpin.from_geometry(_float(cfg, "d_nm", positive=True) * 1e-9,
                                     math.radians(theta))


def _field(cfg) -> float:
    return _float(cfg, "field_gauss", nonneg=True) * GAUSS


def _sampler(cfg):
    abundance = _float(cfg, "abundance")
    if not 0 < abundance < 1:
        raise InvalidParameterError("abundance: must lie in (0, 1)")
    lo = _float(cfg, "shell_min_nm", positive=True)
    hi = _float(cfg, "shell_max_nm", positive=True)
    if not lo < hi:
        raise InvalidParameterError("shell_min_nm must be below shell_max_nm")
    return dict(abundance=abundance, shell_min=lo * 1e-9, shell_max=hi * 1e-9,
                coupling_cutoff=2 * math.pi * _float(cfg, "cutoff_khz", positive=True) * 1e3)


def _seed(cfg) -> int:
    return _int(cfg, "seed") if cfg.get("seed") not in (None, "") else 0


def _read_input(loader, path):
    try:
        return loader(path)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


# -- commands --------------------------------------------------------------
# each returns a function computing the output text, so validation happens first

def cmd_filter(cfg, header, threads):
    seq = _sequence(cfg)
    lo, hi = _range(cfg, "range")
    points = _int(cfg, "points", 2)
    analytic = _bool(cfg, "analytic")
    if analytic:
        filter_analytic(seq, 0.0)

    def run():
        u = np.linspace(lo, hi, points)
        fn = filter_analytic if analytic else filter_numeric
        vals = fn(seq, 2 * math.pi * u)
        return io.format_rows(header, ("omega_t_over_2pi", "value"), zip(u, vals))
    return run


def cmd_coherence(cfg, header, threads):
    seq = _sequence(cfg)
    B = _field(cfg)
    env = _envelope(cfg)
    tau_min = _float(cfg, "tau_min_us", nonneg=True) * 1e-6
    tau_max = _float(cfg, "tau_max_us", positive=True) * 1e-6
    if not tau_min < tau_max:
        raise InvalidParameterError("tau_min_us must be below tau_max_us")
    steps = _int(cfg, "steps", 2)
    engine = _get(cfg, "engine")
    if engine not in ("quantum", "semiclassical"):
        raise InvalidParameterError(f"engine: unknown engine {engine!r}")
    min_depth = _float(cfg, "min_depth", nonneg=True)
    if cfg.get("bath"):
        bath = _read_input(read_bath, cfg["bath"])
    else:
        bath = sample_bath(_seed(cfg), **_sampler(cfg))
    dips_path = cfg.get("dips")

    def run():
        curve = coherence_curve(bath, B, seq, tau_min, tau_max, steps, env, engine)
        if dips_path and steps >= 3:
            io.atomic_write(dips_path, io.format_dips(header, detect_dips(curve, min_depth)))
        return io.format_curve(header, curve)
    return run


def cmd_sweep(cfg, header, threads):
    spin = _spin(cfg)
    B = _field(cfg)
    env = _envelope(cfg)
    n = _int(cfg, "n", 1)
    r_min, r_max = _float(cfg, "r_min"), _float(cfg, "r_max")
    steps = _int(cfg, "r_steps", 1)
    if not 0 < r_min <= r_max < 0.5:
        raise InvalidParameterError("need 0 < r_min <= r_max < 0.5")
    grid = np.linspace(r_min, r_max, steps)
    build_sequence("designed3", n, r=grid[0])

    def run():
        series = magnitude_vs_r(spin, B, n, grid, env)
        return io.format_rows(header, ("r", "magnitude"), series)
    return run


def cmd_map(cfg, header, threads):
    seq = _sequence(cfg)
    B = _field(cfg)
    env = _envelope(cfg)
    cells = _int(cfg, "cells", 1)
    par = np.linspace(*_range(cfg, "d_par_nm", positive=True), cells) * 1e-9
    perp = np.linspace(*_range(cfg, "d_perp_nm", positive=True), cells) * 1e-9
    kind = _get(cfg, "format")
    if kind not in ("csv", "json"):
        raise InvalidParameterError(f"format: unknown format {kind!r}")
    if seq.family == "custom":
        raise InvalidParameterError("family: maps need a built-in family")

    def run():
        mmap = magnitude_map(B, seq, par, perp, env, workers=threads)
        return io.format_map(header, mmap, kind, cfg)
    return run


def cmd_map_diff(cfg, header, threads):
    kind = _get(cfg, "format")
    if kind not in ("csv", "json"):
        raise InvalidParameterError(f"format: unknown format {kind!r}")
    a = _read_input(io.read_map, _get(cfg, "a"))
    b = _read_input(io.read_map, _get(cfg, "b"))
    diff = map_difference(a, b)

    def run():
        return io.format_map(header, diff, kind, cfg)
    return run


def cmd_optimize(cfg, header, threads):
    target = _spin(cfg)
    B = _field(cfg)
    env = _envelope(cfg)
    family = _get(cfg, "family")
    n = _int(cfg, "n", 1)
    grid = _int(cfg, "grid", 10)
    weight = _float(cfg, "weight", nonneg=True)
    interferers = _read_input(read_bath, cfg["interferers"]) if cfg.get("interferers") else []
    if family not in ("designed3", "designed5"):
        raise InvalidParameterError("family: optimize supports designed3 and designed5")
    build_sequence(family, n, **parameter_grid(family, grid)[0])

    def run():
        best = optimize_params(target, interferers, B, family, n, grid, weight, env)
        row = [str(best.params.get(k, "")) for k in ("r", "p", "q")]
        row += [best.score, best.target_magnitude, best.interferer_magnitude]
        return io.format_rows(header, ("r", "p", "q", "score", "target_magnitude",
                                       "interferer_magnitude"), [row])
    return run


def cmd_bathgen(cfg, header, threads):
    sampler = _sampler(cfg)
    seed = _seed(cfg)

    def run():
        bath = sample_bath(seed, **sampler)
        return format_bath(bath, [ln[2:] for ln in header])
    return run


COMMANDS = {
    "filter": cmd_filter,
    "coherence": cmd_coherence,
    "sweep-r": cmd_sweep,
    "map": cmd_map,
    "map-diff": cmd_map_diff,
    "optimize": cmd_optimize,
    "bath-gen": cmd_bathgen,
}


# -- argument parsing ------------------------------------------------------

def _add_sequence(p, families=("cpmg", "designed3", "designed5")):
    p.add_argument("--family", choices=families)
    p.add_argument("--n", help="pulse count")
    p.add_argument("--r", help="designed3 parameter, e.g. 3/10")
    p.add_argument("--p", help="designed5 parameter, e.g. 3/20")
    p.add_argument("--q", help="designed5 parameter, e.g. 17/40")


def _add_envelope(p):
    p.add_argument("--t2-us", help="decay time in microseconds ('inf' disables)")
    p.add_argument("--stretch", help="decay stretch exponent")


def _add_spin(p):
    p.add_argument("--d-nm", help="sensor-nucleus distance (nm)")
    p.add_argument("--theta-deg", help="inclination to the NV axis (degrees)")
    p.add_argument("--a-par-khz", help="parallel hyperfine coupling (kHz), overrides geometry")
    p.add_argument("--a-perp-khz", help="transverse hyperfine coupling (kHz)")


def _add_sampler(p):
    p.add_argument("--abundance", help="13C abundance")
    p.add_argument("--shell-min-nm")
    p.add_argument("--shell-max-nm")
    p.add_argument("--cutoff-khz", help="drop spins with couplings above this")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file, or a previous output file")
    common.add_argument("--seed", help="random seed for bath sampling")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--threads", help="worker processes for maps (0 = auto)")

    parser = argparse.ArgumentParser(prog="ddsense", parents=[common],
                                     description="Design DD sequences and simulate NV coherence.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", parents=[common], help="filter function as CSV")
    _add_sequence(p)
    p.add_argument("--range", help="lo:hi in units of omega t / 2 pi")
    p.add_argument("--points")
    p.add_argument("--analytic", action="store_const", const="true",
                   help="use the closed form instead of the numeric filter")

    p = sub.add_parser("coherence", parents=[common], help="coherence curve")
    _add_sequence(p)
    _add_envelope(p)
    _add_sampler(p)
    p.add_argument("--field-gauss")
    p.add_argument("--bath", help="bath file; a random bath is sampled when omitted")
    p.add_argument("--tau-min-us")
    p.add_argument("--tau-max-us")
    p.add_argument("--steps")
    p.add_argument("--engine", choices=("quantum", "semiclassical"))
    p.add_argument("--dips", help="also write a dip report to this path")
    p.add_argument("--min-depth")

    p = sub.add_parser("sweep-r", parents=[common], help="signal magnitude versus r")
    _add_spin(p)
    _add_envelope(p)
    p.add_argument("--field-gauss")
    p.add_argument("--n")
    p.add_argument("--r-min")
    p.add_argument("--r-max")
    p.add_argument("--r-steps")

    p = sub.add_parser("map", parents=[common], help="signal magnitude map")
    _add_sequence(p)
    _add_envelope(p)
    p.add_argument("--field-gauss")
    p.add_argument("--d-par-nm", help="lo:hi")
    p.add_argument("--d-perp-nm", help="lo:hi")
    p.add_argument("--cells", help="grid points per axis")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("map-diff", parents=[common], help="difference of two maps (a - b)")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("optimize", parents=[common], help="grid-search sequence parameters")
    _add_spin(p)
    _add_envelope(p)
    p.add_argument("--field-gauss")
    p.add_argument("--family", choices=("designed3", "designed5"))
    p.add_argument("--n")
    p.add_argument("--interferers", help="bath file of spins to suppress")
    p.add_argument("--grid", help="grid points per parameter")
    p.add_argument("--weight", help="suppression weight")

    p = sub.add_parser("bath-gen", parents=[common], help="sample a random 13C bath")
    _add_sampler(p)
    return parser


_GLOBAL = ("config", "out", "threads", "command")


def resolve_config(args: argparse.Namespace) -> dict[str, str]:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS[args.command])
    if args.config:
        command, from_file = io.load_config(args.config)
        if command is not None and command != args.command:
            raise InvalidParameterError(
                f"{args.config} was produced by '{command}', not '{args.command}'")
        unknown = set(from_file) - set(cfg) - {"seed"}
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(from_file)
    for key, value in vars(args).items():
        if key not in _GLOBAL and value is not None:
            cfg[key] = str(value)
    if cfg.get("seed") in (None, ""):
        cfg["seed"] = "0"
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        threads = _int({"threads": args.threads}, "threads", 0) if args.threads else 1
        if threads == 0:
            threads = os.cpu_count() or 1
        header = io.header_lines(args.command, cfg)
        run = COMMANDS[args.command](cfg, header, threads)
    except InvalidParameterError as exc:
        print(f"ddsense {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ddsense {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        text = run()
        if args.out:
            io.atomic_write(args.out, text)
        else:
            sys.stdout.write(text)
    except InvalidParameterError as exc:
        print(f"ddsense {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ddsense {args.command}: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
