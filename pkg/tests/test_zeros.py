import math

import numpy as np
import pytest

from reslab import schottky as sk
from reslab import thermo, transfer, zeros
from reslab.transfer import TwistSpec

TRIV = TwistSpec.trivial()


@pytest.fixture(scope="module")
def cyl():
    return sk.preset("cylinder", t=3.0)


@pytest.fixture(scope="module")
def sym3():
    return sk.preset("symmetric3", t=6.0)


@pytest.fixture(scope="module")
def delta3(sym3):
    return thermo.critical_exponent(sym3)


def test_euler_product_far_right_is_one(sym3):
    v = zeros.euler_product(sym3, complex(50.0, 0.0), TRIV, max_word_len=4)
    assert abs(v - 1.0) < 1e-12


def test_euler_product_refuses_left_of_margin(sym3, delta3):
    with pytest.raises(ValueError):
        zeros.euler_product(sym3, complex(delta3 + 0.05, 0.0), TRIV, delta=delta3)


def test_integer_character_euler_equals_trivial(sym3, delta3):
    s = complex(delta3 + 1.5, 0.8)
    a = zeros.euler_product(sym3, s, TRIV, max_word_len=6, delta=delta3)
    b = zeros.euler_product(sym3, s, TwistSpec.abelian([1.0, 3.0]),
                            max_word_len=6, delta=delta3)
    assert abs(a - b) < 1e-12


def test_det_euler_cross_oracle(sym3, delta3):
    rng = np.random.default_rng(5)
    for _ in range(5):
        s = complex(delta3 + 1.0, rng.uniform(-3, 3))
        fd = transfer.fredholm_det(transfer.assemble(sym3, s, TRIV, 32))
        ep = zeros.euler_product(sym3, s, TRIV, max_word_len=8, delta=delta3)
        assert abs(fd - ep) < 1e-10


def test_count_right_of_delta_is_zero(sym3, delta3):
    n = zeros.count_zeros(sym3, TRIV, (delta3 + 0.2, delta3 + 1.2, -0.5, 0.5))
    assert n == 0


def test_count_one_around_delta(sym3, delta3):
    n = zeros.count_zeros(sym3, TRIV, (delta3 - 0.05, delta3 + 0.05, -0.05, 0.05))
    assert n == 1


def test_cylinder_count_two_at_first_lattice_point(cyl):
    ell = 2 * math.acosh(1.5)
    im = 2 * math.pi / ell
    n = zeros.count_zeros(cyl, TRIV, (-0.2, 0.2, im - 0.2, im + 0.2), lmax=16)
    assert n == 2


def test_contour_too_close_raises(sym3, delta3):
    with pytest.raises(zeros.ContourError):
        zeros.count_zeros(sym3, TRIV, (delta3, delta3 + 0.5, -0.2, 0.2))


def test_refine_to_delta(sym3, delta3):
    s, res, ok = zeros.refine_zero(sym3, TRIV, complex(delta3 + 0.03, 0.01))
    assert ok and res < 1e-10
    assert abs(s - delta3) < 1e-8


def test_refine_cylinder_lattice_point(cyl):
    ell = 2 * math.acosh(1.5)
    target = complex(0.0, 2 * math.pi / ell)
    s, res, ok = zeros.refine_zero(cyl, TRIV, target + complex(0.01, -0.02), mult=2)
    assert ok
    assert abs(s - target) < 1e-7


def test_refine_flags_zero_free_region(sym3, delta3):
    s, res, ok = zeros.refine_zero(sym3, TRIV, complex(delta3 + 2.0, 0.3))
    assert not ok or res >= 1e-10 or abs(s.real - (delta3 + 2.0)) > 1.0
    assert not (ok and res < 1e-10 and abs(s - complex(delta3 + 2.0, 0.3)) < 0.5)


def test_cylinder_resonance_lattice(cyl):
    ell = 2 * math.acosh(1.5)
    rs = zeros.resonances(cyl, TRIV, (-0.5, 0.5, 0.0, 7.0), lmax=16)
    assert rs.contour_count == 6
    assert rs.total_multiplicity == 6
    assert len(rs.zeros) == 3
    expected = sorted(2 * math.pi * k / ell for k in range(3))
    got = sorted(z.imag for z, _ in rs.zeros)
    for e, g in zip(expected, got):
        assert abs(e - g) < 1e-7
    for z, mult in rs.zeros:
        assert mult == 2
        assert abs(z.real) < 1e-7
    assert all(r < 1e-8 for r in rs.residuals)


def test_simple_real_zero_at_delta(sym3, delta3):
    rs = zeros.resonances(sym3, TRIV,
                          (delta3 - 0.04, delta3 + 0.04, -0.04, 0.04))
    assert rs.total_multiplicity == 1
    z, mult = rs.zeros[0]
    assert mult == 1
    assert abs(z - delta3) < 1e-8


def test_zero_set_conjugation_symmetric(cyl):
    rs = zeros.resonances(cyl, TRIV, (-0.5, 0.5, -4.0, 4.0), lmax=16)
    zs = sorted((round(z.real, 6), round(z.imag, 6)) for z, _ in rs.zeros)
    mirrored = sorted((re, round(-im, 6)) for re, im in zs)
    assert zs == mirrored


def test_zero_count_stable_in_lmax(cyl):
    rect = (-0.5, 0.5, 0.0, 7.0)
    n16 = zeros.count_zeros(cyl, TRIV, (rect[0] - 1e-3, rect[1] + 1e-3,
                                        rect[2] - 1e-3, rect[3] + 1e-3), lmax=16)
    n24 = zeros.count_zeros(cyl, TRIV, (rect[0] - 1e-3, rect[1] + 1e-3,
                                        rect[2] - 1e-3, rect[3] + 1e-3), lmax=24)
    assert n16 == n24 == 6
