"""
Acceptance suite. Each test name starts with ``test_c<N>_`` so that the
terminal summary (see ``conftest.py``) can print one PASS/FAIL line per
criterion. Run with ``pytest tests/test_acceptance.py`` or directly with
``python3 tests/test_acceptance.py``.
"""
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from ddsense import (DecayEnvelope, NuclearSpin, build_cpmg, build_designed3, build_designed5,
                     coherence_curve, detect_dips, example_bath, filter_designed3,
                     filter_designed5, filter_numeric, larmor_frequency, locate_peak_numeric,
                     magnitude_map, map_difference, peak_height3, peak_height5, resonance_dip,
                     spin_coherence)

B = 27e-4  # 27 G
TEST_SPIN = NuclearSpin.from_geometry(1e-9, math.radians(60))
N = 30

# envelope for criteria 5 and 7: CPMG resonance time 542 us > 2 t2, designed3 172 us < t2
T2_RESOLVE = 200e-6
# envelope paired with the illustrative five-spin bath
T2_BATH = 360e-6


def _near_zero(y, m, tol=1e-4):
    """True where ``cos(y)`` is within ``tol`` (in omega t) of a zero."""
    # y = c * omega_t; zeros of cos at y = pi/2 + k pi
    return np.abs(((y - math.pi / 2) / math.pi + 0.5) % 1.0 - 0.5) * math.pi < tol * m


def _rel_error(a, b):
    """Relative error, with an absolute floor where the filter nearly vanishes.

    Below ``FLOOR`` the double-precision phasor sum itself carries relative
    rounding of order 1e-8, so a relative test there would measure float
    cancellation rather than the closed form.
    """
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), FLOOR)))


FLOOR = 1e-3


# -- 1 -----------------------------------------------------------------------

@pytest.mark.criterion(1, "analytic filters equal the numeric filter to 1e-9")
def test_c1_designed3_analytic_equals_numeric():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n = int(rng.choice([6, 12, 30, 60]))
        r = Fraction(int(rng.integers(1, 10_000)), 20_000)
        seq = build_designed3(n, r)
        x = rng.uniform(0.0, 2 * math.pi * n, 50)
        x = x[~_near_zero(3 * x / (2 * n), 3 / (2 * n))]
        a, b = filter_designed3(n, r, x), filter_numeric(seq, x)
        worst = max(worst, _rel_error(a, b))
    assert worst <= 1e-9, f"worst relative error {worst:.3g}"
    assert time.perf_counter() - start < 10


@pytest.mark.criterion(1, "analytic filters equal the numeric filter to 1e-9")
def test_c1_designed5_analytic_equals_numeric():
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n = int(rng.choice([10, 20, 30, 60]))
        p, q = sorted(Fraction(int(v), 20_000) for v in rng.choice(np.arange(1, 10_000), 2,
                                                                      replace=False))
        seq = build_designed5(n, p, q)
        x = rng.uniform(0.0, 2 * math.pi * n, 50)
        x = x[~_near_zero(5 * x / (2 * n), 5 / (2 * n))]
        a, b = filter_designed5(n, p, q, x), filter_numeric(seq, x)
        worst = max(worst, _rel_error(a, b))
    assert worst <= 1e-9, f"worst relative error {worst:.3g}"
    assert time.perf_counter() - start < 10


# -- 2 -----------------------------------------------------------------------

PEAK_CASES = [
    ("cpmg", build_cpmg(N), (14, 16), 15.0),
    ("designed3 r=5/18", build_designed3(N, "5/18"), (4, 6), 5.0),
    ("designed3 r=3/10", build_designed3(N, "3/10"), (4, 6), 5.0),
    ("designed3 r=7/38", build_designed3(N, "7/38"), (4, 6), 5.0),
    ("designed5 p=3/20 q=17/40", build_designed5(N, "3/20", "17/40"), (2, 4), 3.0),
]


@pytest.mark.criterion(2, "first dominant peak positions")
@pytest.mark.parametrize("label,seq,window,expected", PEAK_CASES,
                         ids=[c[0].replace(" ", "_") for c in PEAK_CASES])
def test_c2_peak_position(label, seq, window, expected):
    rep = locate_peak_numeric(seq, *window)
    assert rep.center_omega_t_over_2pi == pytest.approx(expected, abs=0.05), label


# -- 3 -----------------------------------------------------------------------

def _random_designed3(rng, count):
    out = []
    while len(out) < count:
        r = Fraction(int(rng.integers(1, 1000)), 2000)
        if abs(r - Fraction(1, 3)) > Fraction(1, 50):
            out.append(r)
    return out


def _random_designed5(rng, count):
    out = []
    while len(out) < count:
        p, q = sorted(Fraction(int(v), 2000) for v in rng.choice(np.arange(1, 1000), 2,
                                                                  replace=False))
        if peak_height5(N, p, q) > 0.5:
            out.append((p, q))
    return out


@pytest.mark.criterion(3, "peak heights match the closed-form heights within 1%")
def test_c3_designed3_heights_random():
    rng = np.random.default_rng(301)
    bad = []
    for r in _random_designed3(rng, 50):
        rep = locate_peak_numeric(build_designed3(N, r), 4, 6)
        err = rep.height / peak_height3(N, r) - 1
        if abs(err) > 0.01:
            bad.append(f"r={r}: {err:+.2%}")
    assert not bad, f"{len(bad)}/50 draws outside 1%: " + "; ".join(bad[:5])


@pytest.mark.criterion(3, "peak heights match the closed-form heights within 1%")
def test_c3_designed5_heights_random():
    rng = np.random.default_rng(302)
    bad = []
    for p, q in _random_designed5(rng, 50):
        rep = locate_peak_numeric(build_designed5(N, p, q), 2, 4)
        err = rep.height / peak_height5(N, p, q) - 1
        if abs(err) > 0.01:
            bad.append(f"p={p}, q={q}: {err:+.2%}")
    assert not bad, f"{len(bad)}/50 draws outside 1%: " + "; ".join(bad[:5])


@pytest.mark.criterion(3, "peak heights match the closed-form heights within 1%")
def test_c3_degenerate_zeros():
    assert peak_height3(N, Fraction(1, 3)) == pytest.approx(0, abs=1e-12)
    assert peak_height5(N, Fraction(1, 5), Fraction(2, 5)) == pytest.approx(0, abs=1e-12)
    u3 = 2 * math.pi * np.linspace(4, 6, 4001)
    u5 = 2 * math.pi * np.linspace(2, 4, 4001)
    assert filter_numeric(build_designed3(N, Fraction(1, 3)), u3).max() < 0.5
    assert filter_numeric(build_designed5(N, Fraction(1, 5), Fraction(2, 5)), u5).max() < 0.5


# -- 4 -----------------------------------------------------------------------

@pytest.mark.criterion(4, "dips move forward to 1/3 and 1/5 of the CPMG time")
def test_c4_dip_forward_shift():
    start = time.perf_counter()
    cpmg = resonance_dip(TEST_SPIN, B, build_cpmg(N)).tau_center
    d3 = resonance_dip(TEST_SPIN, B, build_designed3(N, "3/10")).tau_center
    d5 = resonance_dip(TEST_SPIN, B, build_designed5(N, "3/20", "17/40")).tau_center
    elapsed = time.perf_counter() - start
    assert d3 / cpmg == pytest.approx(1 / 3, rel=0.05), f"ratio {d3 / cpmg:.4f}"
    assert d5 / cpmg == pytest.approx(1 / 5, rel=0.05), f"ratio {d5 / cpmg:.4f}"
    assert elapsed < 5


# -- 5 -----------------------------------------------------------------------

@pytest.mark.criterion(5, "designed3 r=3/10 resolves a dip that CPMG cannot")
def test_c5_resolvability_contrast():
    env = DecayEnvelope(T2_RESOLVE, 3.0)
    cpmg = resonance_dip(TEST_SPIN, B, build_cpmg(N), envelope=env)
    d3 = resonance_dip(TEST_SPIN, B, build_designed3(N, "3/10"), envelope=env)
    # premise of the scenario, on the bare dip times
    t_cpmg = N * resonance_dip(TEST_SPIN, B, build_cpmg(N)).tau_center
    t_d3 = N * resonance_dip(TEST_SPIN, B, build_designed3(N, "3/10")).tau_center
    assert t_cpmg > 2 * T2_RESOLVE and t_d3 < T2_RESOLVE
    assert cpmg.depth < 0.02, f"CPMG depth {cpmg.depth:.4f}"
    assert d3.depth > 0.1, f"designed3 depth {d3.depth:.4f}"


# -- 6 -----------------------------------------------------------------------

_SIGMA = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def _su2(angle, axis):
    lam, vec = np.linalg.eigh(np.tensordot(np.asarray(axis, float), _SIGMA, axes=1) / 2)
    return vec @ np.diag(np.exp(-1j * angle * lam)) @ vec.conj().T


def _cpmg_eigen(spin, n, t):
    wl = larmor_frequency(B)
    w1 = math.hypot(wl + spin.a_par, spin.a_perp)
    ax1 = (spin.a_perp / w1, 0, (wl + spin.a_par) / w1)
    tau = t / n
    a_h, a_f = _su2(wl * tau / 2, (0, 0, 1)), _su2(wl * tau, (0, 0, 1))
    b_h, b_f = _su2(w1 * tau / 2, ax1), _su2(w1 * tau, ax1)
    powers = []
    for period in (a_h @ b_f @ a_h, b_h @ a_f @ b_h):
        lam, vec = np.linalg.eig(period)
        powers.append(vec @ np.diag(lam ** (n // 2)) @ np.linalg.inv(vec))
    return 0.5 * np.trace(powers[0] @ powers[1].conj().T).real


@pytest.mark.criterion(6, "quantum engine matches the per-period eigen-decomposition")
@pytest.mark.parametrize("n", [2, 8, 32])
def test_c6_cpmg_eigen_oracle(n):
    rng = np.random.default_rng(600 + n)
    seq = build_cpmg(n)
    worst = 0.0
    for _ in range(100):
        spin = NuclearSpin.from_hz(rng.uniform(-100e3, 100e3), rng.uniform(0, 100e3))
        t = n * rng.uniform(0.5e-6, 40e-6)
        worst = max(worst, abs(spin_coherence(spin, B, seq, t) - _cpmg_eigen(spin, n, t)))
    assert worst <= 1e-10, f"worst deviation {worst:.3g}"


# -- 7 -----------------------------------------------------------------------

MAP_AXIS = np.linspace(0.075e-9, 3e-9, 40)


@pytest.fixture(scope="module")
def maps():
    env = DecayEnvelope(T2_RESOLVE, 3.0)
    start = time.perf_counter()
    # r = 1/3 reproduces CPMG exactly, whose dominant peak sits at n/2
    out = {
        "1/3": magnitude_map(B, build_cpmg(N), MAP_AXIS, MAP_AXIS, env),
        "5/18": magnitude_map(B, build_designed3(N, "5/18"), MAP_AXIS, MAP_AXIS, env),
        "3/10": magnitude_map(B, build_designed3(N, "3/10"), MAP_AXIS, MAP_AXIS, env),
    }
    out["elapsed"] = time.perf_counter() - start
    return out


@pytest.mark.criterion(7, "designed maps cover more area; difference map has both signs")
def test_c7_contour_area(maps):
    areas = {k: maps[k].area_above(0.02) for k in ("1/3", "5/18", "3/10")}
    assert areas["5/18"] > areas["1/3"], areas
    assert areas["3/10"] > areas["1/3"], areas
    assert maps["elapsed"] < 300


@pytest.mark.criterion(7, "designed maps cover more area; difference map has both signs")
def test_c7_difference_has_both_signs(maps):
    diff = map_difference(maps["3/10"], maps["5/18"]).values
    assert np.any(diff > 1e-3) and np.any(diff < -1e-3)


# -- 8 -----------------------------------------------------------------------

@pytest.mark.criterion(8, "example bath: three CPMG zones and a new designed3 zone")
def test_c8_example_bath_zones():
    env = DecayEnvelope(T2_BATH, 3.0)
    bath = example_bath()
    cpmg = detect_dips(coherence_curve(bath, B, build_cpmg(N), 2e-6, 21e-6, 4001, env), 0.1)
    d3 = detect_dips(coherence_curve(bath, B, build_designed3(N, "3/10"), 2e-6, 21e-6, 4001,
                                     env), 0.1)
    assert len(cpmg) >= 3
    assert [d.zone_label for d in cpmg[:3]] == ["I", "II", "III"]
    new = [d for d in d3 if all(abs(d.tau_center - c.tau_center) > max(d.width, c.width)
                                for c in cpmg)]
    assert new, "no designed3 dip outside the CPMG zones"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
