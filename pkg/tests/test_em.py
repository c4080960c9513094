import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inbuilding_rt.em import (C0, AntennaPattern, BadDistance, BadFrequency, ComplexPermittivity,
                              Polarization, antenna_gain, complex_permittivity,
                              free_space_path_gain, fresnel_reflection, wall_penetration_loss)
from inbuilding_rt.geometry import CONCRETE, GLASS, Material

TE, TM = Polarization.TE, Polarization.TM

# mpmath closed form at 50 digits, see test_slab_loss_matches_mpmath
CONCRETE_SLAB_3G5_NORMAL_TE_DB = 27.7992105981695


def test_concrete_permittivity():
    eps = complex_permittivity(CONCRETE, 3.5e9)
    assert eps.re == 5.24
    assert eps.im == pytest.approx(0.632, abs=1e-3)
    assert complex_permittivity(CONCRETE, 1e9).im == pytest.approx(0.8305, abs=1e-3)


def test_lossless_permittivity():
    assert complex_permittivity(Material("air", 1.0), 3.5e9).im == 0.0


def test_bad_frequency():
    with pytest.raises(BadFrequency):
        complex_permittivity(CONCRETE, 0.0)


def test_normal_incidence():
    eps = ComplexPermittivity(4.0, 0.0)
    assert abs(fresnel_reflection(eps, 0.0, TE) - (-1 / 3)) < 1e-12
    # the stated TM form flips sign at normal incidence
    assert abs(fresnel_reflection(eps, 0.0, TM) - (1 / 3)) < 1e-12


def test_brewster_zero():
    assert abs(fresnel_reflection(ComplexPermittivity(4.0, 0.0), math.atan(2.0), TM)) < 1e-12


def test_grazing_limit():
    g = fresnel_reflection(ComplexPermittivity(4.0, 0.0), math.radians(89.99), TE)
    assert abs(g + 1) < 1e-3


@settings(max_examples=300)
@given(st.floats(1, 10), st.floats(0, 5), st.floats(0, math.radians(89.9)),
       st.sampled_from([TE, TM]))
def test_passive(er, ei, theta, pol):
    assert abs(fresnel_reflection(ComplexPermittivity(er, ei), theta, pol)) <= 1.0


@given(st.floats(1, 10))
def test_te_tm_sign_convention(er):
    eps = ComplexPermittivity(er, 0.0)
    assert fresnel_reflection(eps, 0.0, TM) == pytest.approx(-fresnel_reflection(eps, 0.0, TE), abs=1e-15)


def _mp_slab_loss(eps_r, sigma, thickness, f, theta=0):
    mp.mp.dps = 50
    f = mp.mpf(f)
    eps = mp.mpc(eps_r, -mp.mpf(sigma) / (2 * mp.pi * f * mp.mpf("8.8541878128e-12")))
    c = mp.cos(theta)
    w = mp.sqrt(eps - mp.sin(theta) ** 2)
    g = (c - w) / (c + w)
    n = mp.sqrt(eps)
    alpha = 2 * mp.pi * f / mp.mpf(299792458) * abs(mp.im(n))
    sin_t = mp.sin(theta) / mp.re(n)
    cos_t = mp.sqrt(1 - sin_t ** 2)
    return float(-10 * mp.log10(abs(1 - g * g) ** 2 * mp.e ** (-2 * alpha * thickness / cos_t)))


def test_slab_loss_matches_mpmath():
    sigma = 0.0462 * 3.5 ** 0.7822
    ref = _mp_slab_loss("5.24", sigma, mp.mpf("0.30"), 3.5e9)
    assert ref == pytest.approx(CONCRETE_SLAB_3G5_NORMAL_TE_DB, abs=1e-9)
    assert wall_penetration_loss(CONCRETE, 0.0, TE, 3.5e9) == pytest.approx(
        CONCRETE_SLAB_3G5_NORMAL_TE_DB, abs=1e-9)


@pytest.mark.parametrize("theta", [0.2, 0.7, 1.2])
def test_oblique_slab_matches_mpmath(theta):
    sigma = GLASS.conductivity(2.4e9)
    ref = _mp_slab_loss("6.27", sigma, mp.mpf("0.006"), 2.4e9, mp.mpf(theta))
    assert wall_penetration_loss(GLASS, theta, TE, 2.4e9) == pytest.approx(ref, abs=1e-9)


def test_vacuum_slab():
    air = Material("air", 1.0, sigma=0.0, thickness=1e-12)
    assert wall_penetration_loss(air, 0.3, TE, 3.5e9) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=200)
@given(st.floats(1, 10), st.floats(0, 2), st.floats(1e-3, 0.5), st.floats(1e-3, 0.5),
       st.floats(0, math.radians(89)), st.sampled_from([TE, TM]))
def test_loss_nonneg_and_monotone_in_thickness(er, sigma, d1, d2, theta, pol):
    thin, thick = sorted((d1, d2))
    lo = wall_penetration_loss(Material("m", er, sigma=sigma, thickness=thin), theta, pol, 3.5e9)
    hi = wall_penetration_loss(Material("m", er, sigma=sigma, thickness=thick), theta, pol, 3.5e9)
    assert lo >= 0.0
    assert hi >= lo


@pytest.mark.parametrize("material", [CONCRETE, GLASS])
@pytest.mark.parametrize("theta", [0.0, 0.5, 1.0])
def test_loss_monotone_in_frequency(material, theta):
    freqs = np.linspace(0.5e9, 6e9, 60)
    losses = [wall_penetration_loss(material, theta, TE, f) for f in freqs]
    assert all(b >= a for a, b in zip(losses, losses[1:]))


def test_friis():
    assert free_space_path_gain(3.5e9, 1.0) == pytest.approx(-43.33, abs=0.01)
    lam = C0 / 3.5e9
    assert free_space_path_gain(3.5e9, lam / (4 * math.pi)) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(1e8, 1e11), st.floats(1e-2, 1e4))
def test_friis_doubling(f, d):
    delta = free_space_path_gain(f, 2 * d) - free_space_path_gain(f, d)
    assert abs(delta + 20 * math.log10(2)) < 1e-9


def test_friis_bad_distance():
    with pytest.raises(BadDistance):
        free_space_path_gain(3.5e9, 0.0)


def test_pattern_examples():
    p = AntennaPattern()
    assert antenna_gain(p, 0, 0) == p.gain_dbi
    assert antenna_gain(p, p.bw_az / 2, 0) == pytest.approx(p.gain_dbi - 3)
    assert antenna_gain(p, 0, p.bw_el / 2) == pytest.approx(p.gain_dbi - 3)
    assert antenna_gain(p, 180, 0) - antenna_gain(p, 0, 0) == -p.front_to_back_db


@given(st.floats(0, 180), st.floats(0, 180), st.floats(-90, 90))
def test_pattern_symmetric_and_monotone(a1, a2, el):
    p = AntennaPattern(gain_dbi=5, bw_az=70, bw_el=40, front_to_back_db=20, sidelobe_floor_db=25)
    assert antenna_gain(p, a1, el) == antenna_gain(p, -a1, el)
    assert antenna_gain(p, a1, el) == antenna_gain(p, a1, -el)
    lo, hi = sorted((a1, a2))
    assert antenna_gain(p, hi, 0) <= antenna_gain(p, lo, 0)


def test_pattern_validation():
    with pytest.raises(ValueError):
        AntennaPattern(front_to_back_db=0)
    with pytest.raises(ValueError):
        AntennaPattern(bw_az=360)
    with pytest.raises(ValueError):
        AntennaPattern(front_to_back_db=30, sidelobe_floor_db=20)
