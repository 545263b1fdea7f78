import math

import numpy as np
import pytest

from reslab import explicit_formula as ef
from reslab import schottky as sk


@pytest.fixture(scope="module")
def tf12():
    return ef.build_test_function(0.5, 12)


@pytest.fixture(scope="module")
def pair():
    return sk.preset("sl2z-pair")


def test_build_validation():
    with pytest.raises(ValueError):
        ef.build_test_function(0.5, 0)
    with pytest.raises(ValueError):
        ef.build_test_function(-0.1, 4)
    with pytest.raises(ValueError):
        ef.build_test_function(0.5, 12, grid_size=1 << 18)
    with pytest.raises(ValueError):
        # grid too coarse for the smallest width
        ef.build_test_function(0.5, 12, grid_size=256)


def test_mass_one(tf12):
    for J in (1, 2, 5, 12):
        tf = ef.build_test_function(0.5, J)
        assert abs(tf.mass() - 1.0) < 1e-10


def test_nonnegative_and_supported(tf12):
    assert np.all(tf12.values >= 0.0)
    assert tf12.support_radius < 1.0
    outside = np.abs(tf12.x) > tf12.support_radius
    assert np.all(tf12.values[outside] == 0.0)
    assert tf12(1.5) == 0.0 and tf12(-2.0) == 0.0


def test_even_symmetry(tf12):
    assert np.abs(tf12.values - tf12.values[::-1]).max() < 1e-12


def test_width_deficit_recorded(tf12):
    assert 0.0 < tf12.tail_deficit < 1.0
    assert abs(sum(tf12.widths) + tf12.tail_deficit - 1.0) < 1e-12
    assert all(a > b for a, b in zip(tf12.widths, tf12.widths[1:]))


def test_j1_single_box():
    tf = ef.build_test_function(0.5, 1)
    inside = np.abs(tf.x) < tf.widths[0] * 0.98
    height = 1.0 / (2 * tf.widths[0])
    assert np.abs(tf.values[inside] - height).max() < 1e-2 * height


def test_j2_trapezoid_corners():
    tf = ef.build_test_function(0.5, 2)
    mu1, mu2 = tf.widths
    assert abs(tf.support_radius - (mu1 + mu2)) < 1e-12
    # flat top of height 1/(2 mu1) on [-(mu1-mu2), mu1-mu2]
    flat = np.abs(tf.x) < (mu1 - mu2) * 0.95
    assert np.abs(tf.values[flat] - 1.0 / (2 * mu1)).max() < 1e-2 / (2 * mu1)


def test_fourier_at_zero(tf12):
    assert abs(tf12.fourier(np.array([0.0]))[0] - 1.0) < 1e-12


def test_fourier_closed_form_matches_grid_transform(tf12):
    xi = np.array([0.3, 1.0, 4.0, 15.0, 60.0])
    cf = tf12.fourier(xi)
    gr = tf12.fourier_grid(xi)
    assert np.abs(cf - gr).max() < 1e-5


def test_envelope_passes_j12(tf12):
    rep = ef.fourier_envelope_check(tf12)
    assert rep["passed"]
    assert rep["C2_certified"] > 0
    assert rep["C2_fit"] > 0


def test_envelope_fails_j1():
    rep = ef.fourier_envelope_check(ef.build_test_function(0.5, 1))
    assert not rep["passed"]


def test_geodesic_sum_empty_below_shortest(pair, tf12):
    shortest = sk.primitive_geodesics(pair, 3.0, warn=[])[0].length
    assert ef.geodesic_sum(pair, shortest * 0.5, tf12) == 0.0


def test_geodesic_sum_trivial_real_positive(pair, tf12):
    for T in (4.0, 6.0, 8.0):
        val = ef.geodesic_sum(pair, T, tf12)
        assert abs(val.imag) == 0.0
        assert val.real > 0.0


def test_geodesic_sum_growth_exponent(pair, tf12):
    delta = 0.3939196600212
    Ts = np.arange(5.0, 10.0 + 1e-9, 1.0)
    vals = [ef.geodesic_sum(pair, float(t), tf12).real for t in Ts]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    slope = np.polyfit(Ts, np.log(vals), 1)[0]
    assert abs(slope - delta) < 0.15


def test_geodesic_sum_abelian_matches_bruteforce(pair, tf12):
    theta = (0.3, 0.1)
    T = 7.0
    val = ef.geodesic_sum(pair, T, tf12, character=ef.abelian_character(theta))
    total = 0.0 + 0.0j
    for c in sk.primitive_geodesics(pair, T, warn=[]):
        k = 1
        while k * c.length <= T:
            w = tf12(k * c.length / T)
            phase = np.exp(2j * np.pi * k * (theta[0] * c.homology[0]
                                             + theta[1] * c.homology[1]))
            total += phase * c.length / (1.0 - math.exp(-k * c.length)) * w
            k += 1
    assert abs(val - total) < 1e-12 * max(1.0, abs(total))


def test_geodesic_sum_incomplete_table_raises(pair, tf12):
    with pytest.raises(ValueError):
        ef.geodesic_sum(pair, 8.0, tf12, depth_cap=3)
