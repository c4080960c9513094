"""Electromagnetic primitives: permittivity, Fresnel coefficients, slab loss,
free-space gain and a parametric directional pattern.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .geometry import Material

EPS0 = 8.8541878128e-12
C0 = 299792458.0


class BadFrequency(ValueError):
    pass


class BadDistance(ValueError):
    pass


class Polarization(enum.Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class ComplexPermittivity:
    """Relative permittivity eps = re - j*im (im >= 0 for a lossy medium)."""

    re: float
    im: float

    def __post_init__(self):
        if self.re < 1.0 or self.im < 0.0:
            raise ValueError("permittivity needs re >= 1 and im >= 0")

    @property
    def value(self) -> complex:
        return complex(self.re, -self.im)


@dataclass(frozen=True)
class AntennaPattern:
    gain_dbi: float = 8.0
    bw_az: float = 65.0
    bw_el: float = 65.0
    front_to_back_db: float = 25.0
    sidelobe_floor_db: float = 30.0

    def __post_init__(self):
        if not (0.0 < self.bw_az < 360.0 and 0.0 < self.bw_el < 360.0):
            raise ValueError("beamwidths must lie in (0, 360) degrees")
        if not self.front_to_back_db > 0.0:
            raise ValueError("front_to_back_db must be > 0")
        if self.sidelobe_floor_db < self.front_to_back_db:
            raise ValueError("sidelobe_floor_db must be >= front_to_back_db")


def complex_permittivity(m: Material, f: float) -> ComplexPermittivity:
    if not f > 0.0:
        raise BadFrequency(f"frequency must be > 0, got {f}")
    return ComplexPermittivity(m.eps_r, m.conductivity(f) / (2.0 * math.pi * f * EPS0))


def _root(eps: complex, theta_i: float) -> complex:
    # cmath.sqrt is the principal branch: Re >= 0
    return cmath.sqrt(eps - math.sin(theta_i) ** 2)


def fresnel_reflection(eps: ComplexPermittivity, theta_i: float,
                       pol: Polarization = Polarization.TE) -> complex:
    """Air-to-dielectric reflection coefficient.

    With these formulas the two polarizations differ in sign at normal
    incidence: ``Γ_TM(0) = -Γ_TE(0)``.
    """
    e = eps.value
    c = math.cos(theta_i)
    r = _root(e, theta_i)
    if pol is Polarization.TE:
        return (c - r) / (c + r)
    return (e * c - r) / (e * c + r)


def wall_penetration_loss(m: Material, theta_i: float, pol: Polarization, f: float) -> float:
    """One-pass loss through a slab, in dB, internal reflections neglected."""
    eps = complex_permittivity(m, f)
    gamma = fresnel_reflection(eps, theta_i, pol)
    # Stokes relation: tau_12 * tau_21 = 1 - gamma**2
    interfaces = abs(1.0 - gamma * gamma) ** 2
    n = cmath.sqrt(eps.value)
    alpha = 2.0 * math.pi * f / C0 * abs(n.imag)
    sin_t = math.sin(theta_i) / n.real
    cos_t = math.sqrt(max(0.0, 1.0 - sin_t * sin_t))
    power = interfaces * math.exp(-2.0 * alpha * m.thickness / cos_t)
    # the one-pass product may exceed unity for very lossy media
    return max(0.0, -10.0 * math.log10(power))


def free_space_path_gain(f: float, d: float) -> float:
    if not d > 0.0:
        raise BadDistance(f"distance must be > 0, got {d}")
    if not f > 0.0:
        raise BadFrequency(f"frequency must be > 0, got {f}")
    return -20.0 * math.log10(4.0 * math.pi * d * f / C0)


def antenna_gain(p: AntennaPattern, az: float, el: float) -> float:
    """Gain in dBi toward (az, el) degrees measured from boresight."""
    rolloff = 12.0 * (az / p.bw_az) ** 2 + 12.0 * (el / p.bw_el) ** 2
    attenuation = min(rolloff, p.front_to_back_db, p.sidelobe_floor_db)
    return p.gain_dbi - attenuation
