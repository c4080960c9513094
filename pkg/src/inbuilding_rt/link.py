"""Link budget over traced paths and the SIR/SINR/SNR triple.

The repeater is the desired signal; the donor's indoor (back-lobe)
radiation is the interference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .em import (AntennaPattern, Polarization, antenna_gain, complex_permittivity,
                 free_space_path_gain, fresnel_reflection, wall_penetration_loss)
from .geometry import Scene, Vec3, normalize
from .tracer import RayPath, enumerate_specular_paths

NO_POWER = -math.inf
THERMAL_DBM_PER_HZ = -174.0
ROLES = ("donor", "repeater")


class FrameMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TracerParams:
    max_reflections: int = 2
    max_transmissions: int = 2
    polarization: Polarization = Polarization.TE


@dataclass(frozen=True, eq=False)
class AntennaNode:
    role: str
    position: Vec3
    boresight: Vec3
    pattern: AntennaPattern = field(default_factory=AntennaPattern)
    tx_power_dbm: float = 20.0

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown node role {self.role!r}")
        if abs(float(np.linalg.norm(self.boresight)) - 1.0) > 1e-9:
            raise ValueError("boresight must be a unit vector")

    def frame(self) -> tuple[Vec3, Vec3, Vec3]:
        """(forward, left, up) orthonormal basis around the boresight."""
        fwd = np.asarray(self.boresight, dtype=np.float64)
        ref = np.array([0.0, 0.0, 1.0])
        if abs(fwd[2]) > 1.0 - 1e-9:
            ref = np.array([1.0, 0.0, 0.0])
        left = normalize(np.cross(ref, fwd))
        up = np.cross(fwd, left)
        return fwd, left, up

    def az_el(self, direction: Vec3) -> tuple[float, float]:
        fwd, left, up = self.frame()
        d = normalize(np.asarray(direction, dtype=np.float64))
        x, y, z = float(d @ fwd), float(d @ left), float(d @ up)
        az = math.degrees(math.atan2(y, x))
        el = math.degrees(math.asin(max(-1.0, min(1.0, z))))
        return az, el

    def gain_toward(self, direction: Vec3) -> float:
        return antenna_gain(self.pattern, *self.az_el(direction))

    def aimed_at(self, target: Vec3) -> "AntennaNode":
        return AntennaNode(self.role, self.position, normalize(np.asarray(target) - self.position),
                           self.pattern, self.tx_power_dbm)

    def moved_to(self, position: Vec3) -> "AntennaNode":
        return AntennaNode(self.role, np.asarray(position, dtype=np.float64), self.boresight,
                           self.pattern, self.tx_power_dbm)


@dataclass(frozen=True)
class NoiseModel:
    bandwidth_hz: float = 100e6
    noise_figure_db: float = 9.0

    def __post_init__(self):
        if not (self.bandwidth_hz > 0.0 and math.isfinite(self.bandwidth_hz)):
            raise ValueError("bandwidth_hz must be > 0")
        if not (self.noise_figure_db >= 0.0 and math.isfinite(self.noise_figure_db)):
            raise ValueError("noise_figure_db must be >= 0")


@dataclass(frozen=True)
class LinkSample:
    p_signal_dbm: float
    p_interference_dbm: float
    sir_db: float
    sinr_db: float
    snr_db: float


def dbm_to_mw(p: float) -> float:
    return 0.0 if p == NO_POWER else 10.0 ** (p / 10.0)


def mw_to_dbm(p: float) -> float:
    return NO_POWER if p <= 0.0 else 10.0 * math.log10(p)


def path_power(node: AntennaNode, path: RayPath, f: float,
               pol: Polarization = Polarization.TE) -> float:
    if not np.array_equal(np.asarray(path.tx), np.asarray(node.position)):
        raise FrameMismatch("path does not start at the node position")
    p = node.tx_power_dbm + node.gain_toward(path.departure_dir) + free_space_path_gain(f, path.length)
    for inter in path.interactions:
        m = inter.surface.material
        if inter.kind == "reflect":
            gamma = fresnel_reflection(complex_permittivity(m, f), inter.incidence_angle, pol)
            p += 20.0 * math.log10(abs(gamma)) if gamma != 0 else NO_POWER
        else:
            p -= wall_penetration_loss(m, inter.incidence_angle, pol, f)
    return p


def received_power(node: AntennaNode, rx: Vec3, scene: Scene, f: float,
                   params: TracerParams = TracerParams()) -> float:
    """Incoherent multipath sum in dBm; ``NO_POWER`` when nothing arrives."""
    paths = enumerate_specular_paths(node.position, rx, scene, params.max_reflections,
                                     params.max_transmissions, allow_on_surface=True)
    total = 0.0
    for path in paths:
        total += dbm_to_mw(path_power(node, path, f, params.polarization))
    return mw_to_dbm(total)


def noise_power(n: NoiseModel) -> float:
    return THERMAL_DBM_PER_HZ + 10.0 * math.log10(n.bandwidth_hz) + n.noise_figure_db


def link_metrics(p_signal: float, p_interf: float, n: NoiseModel) -> LinkSample:
    noise = noise_power(n)
    sir = p_signal - p_interf  # +inf when p_interf is NO_POWER
    snr = p_signal - noise
    if p_interf == NO_POWER:
        sinr = snr
    else:
        sinr = p_signal - mw_to_dbm(dbm_to_mw(p_interf) + dbm_to_mw(noise))
        # absorb last-ulp rounding of the log so the ordering holds exactly
        sinr = min(sinr, sir, snr)
    return LinkSample(p_signal, p_interf, sir, sinr, snr)
