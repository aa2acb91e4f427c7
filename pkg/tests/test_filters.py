import math

import numpy as np
import pytest
from scipy.integrate import quad
from hypothesis import given, settings, strategies as st

from ddsense import (InvalidParameterError, NoPeakError, build_cpmg, build_designed3,
                     build_designed5, custom_sequence, dominant_peak_position, filter_analytic,
                     filter_designed3, filter_numeric, locate_peak_numeric, peak_height3,
                     peak_height5)


def brute_filter(fractions, omega_t):
    """Filter from adaptive quadrature of the switching function (independent of the phasor sum)."""
    edges = np.concatenate(([0.0], fractions, [1.0]))

    def sign(s):
        return (-1.0) ** (np.searchsorted(edges, s, side="right") - 1)

    re = quad(lambda s: sign(s) * np.cos(omega_t * s), 0, 1, points=fractions, limit=500)[0]
    im = quad(lambda s: sign(s) * np.sin(omega_t * s), 0, 1, points=fractions, limit=500)[0]
    return 0.5 * omega_t**2 * (re**2 + im**2)


def test_free_evolution_normalisation():
    seq = custom_sequence([])
    x = np.linspace(0.1, 20, 7)
    np.testing.assert_allclose(filter_numeric(seq, x), 2 * np.sin(x / 2) ** 2, atol=1e-12)


@pytest.mark.parametrize("seq", [build_cpmg(4), build_designed3(6, "1/4"),
                                 build_designed5(10, "1/8", "3/10")])
def test_numeric_matches_switching_integral(seq):
    for x in (3.0, 17.5, 31.0):
        assert filter_numeric(seq, x) == pytest.approx(brute_filter(seq.fractions, x), rel=1e-7)


def test_spin_echo_closed_form():
    # one pulse at t/2: 8 sin^4(omega t / 4)
    x = np.linspace(0, 30, 50)
    np.testing.assert_allclose(filter_numeric(build_cpmg(1), x), 8 * np.sin(x / 4) ** 4,
                               atol=1e-12)


def test_analytic_handles_singular_points():
    n, r = 30, "3/10"
    centre = 2 * math.pi * n / 6
    val = filter_designed3(n, r, centre)
    assert math.isfinite(val)
    assert val == pytest.approx(filter_numeric(build_designed3(n, r), centre), rel=1e-12)
    assert filter_designed3(n, r, 0.0) == 0.0


def test_peak_height_examples():
    assert peak_height3(30, "3/10") == pytest.approx(200 * (1 - 2 * math.cos(0.3 * math.pi)) ** 2,
                                                     rel=1e-12)
    assert peak_height3(30, "3/10") == pytest.approx(6.168, rel=1e-3)
    assert peak_height5(30, "3/20", "17/40") == pytest.approx(7.15, rel=1e-3)
    assert peak_height3(30, "1/3") == pytest.approx(0.0, abs=1e-20)
    assert peak_height5(30, "1/5", "2/5") == pytest.approx(0.0, abs=1e-20)


def test_peak_height_is_filter_at_nominal_centre():
    for r in ("1/6", "5/18", "7/38"):
        x = 2 * math.pi * dominant_peak_position("designed3", 30)
        assert peak_height3(30, r) == pytest.approx(filter_numeric(build_designed3(30, r), x),
                                                    rel=1e-9)


def test_dominant_positions():
    assert dominant_peak_position("cpmg", 30) == 15
    assert dominant_peak_position("designed3", 30) == 5
    assert dominant_peak_position("designed3", 30, 2) == 15
    assert dominant_peak_position("designed5", 30) == 3


def test_locate_cpmg_peak():
    rep = locate_peak_numeric(build_cpmg(30), 14, 16)
    assert rep.center_omega_t_over_2pi == pytest.approx(15, abs=0.05)
    assert rep.width_at_half_max > 0
    assert rep.height == pytest.approx(filter_numeric(build_cpmg(30),
                                                      2 * math.pi * rep.center_omega_t_over_2pi))


def test_locate_rejects_empty_windows():
    with pytest.raises(InvalidParameterError):
        locate_peak_numeric(build_cpmg(30), 5, 4)
    with pytest.raises(NoPeakError):
        locate_peak_numeric(build_cpmg(6), 0, 1e-9)


def test_analytic_rejects_custom():
    with pytest.raises(InvalidParameterError):
        filter_analytic(custom_sequence([0.3]), 1.0)


@settings(max_examples=80, deadline=None)
@given(units=st.sampled_from([1, 2, 5, 10]), num=st.integers(1, 199),
       x=st.floats(0.0, 400.0))
def test_designed3_analytic_equals_numeric(units, num, x):
    n, r = 6 * units, num / 400
    seq = build_designed3(n, r)
    assert filter_analytic(seq, x) == pytest.approx(filter_numeric(seq, x), rel=1e-8, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(0.0, 200.0))
def test_filter_nonnegative_and_bounded(x):
    seq = build_designed5(30, "3/20", "17/40")
    v = filter_numeric(seq, x)
    # |amplitude| <= 2 (n + 1)
    assert 0 <= v <= 2 * (seq.n + 1) ** 2
