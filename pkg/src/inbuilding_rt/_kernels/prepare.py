"""Flattened, array-only view of one transmitter in a scene.

Everything that does not depend on the receiver point (facet planes,
material constants, reflection sequences and their images) is computed
here once, so both kernel backends only loop over receivers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ..em import C0, Polarization, complex_permittivity
from ..geometry import Scene, mirror_across_plane
from ..link import AntennaNode, TracerParams
from ..tracer import surface_sequences


@dataclass(frozen=True)
class Prepared:
    origin: np.ndarray      # (S, 3)
    edge_u: np.ndarray      # (S, 3)
    edge_v: np.ndarray      # (S, 3)
    inv_uu: np.ndarray      # (S,)  1 / |edge_u|^2
    inv_vv: np.ndarray      # (S,)
    normal: np.ndarray      # (S, 3)
    offset: np.ndarray      # (S,)
    holes: np.ndarray       # (S, S) uint8, holes[i, j] = window j is cut out of facet i
    eps_re: np.ndarray      # (S,)
    eps_im: np.ndarray      # (S,)
    thickness: np.ndarray   # (S,)
    alpha: np.ndarray       # (S,) field attenuation constant, 1/m
    n_re: np.ndarray        # (S,) real refractive index
    seq: np.ndarray         # (Q, R) int32, -1 padded
    seq_len: np.ndarray     # (Q,) int32
    images: np.ndarray      # (Q, R + 1, 3), images[q, 0] = tx
    tx: np.ndarray          # (3,)
    frame: np.ndarray       # (3, 3) rows: forward, left, up
    pattern: np.ndarray     # (5,) gain, bw_az, bw_el, front_to_back, floor
    tx_power_dbm: float
    frequency: float
    tm: int
    max_transmissions: int


def prepare(node: AntennaNode, scene: Scene, f: float, params: TracerParams) -> Prepared:
    surfaces = scene.surfaces
    n_s = len(surfaces)
    holes = np.zeros((n_s, n_s), dtype=np.uint8)
    for i, cut in enumerate(scene.holes):
        for j in cut:
            holes[i, j] = 1
    eps_re, eps_im, alpha, n_re = [], [], [], []
    k0 = 2.0 * math.pi * f / C0
    for s in surfaces:
        eps = complex_permittivity(s.material, f)
        n = cmath.sqrt(eps.value)
        eps_re.append(eps.re)
        eps_im.append(eps.im)
        alpha.append(k0 * abs(n.imag))
        n_re.append(n.real)

    r = params.max_reflections
    seqs = list(surface_sequences(n_s, r))
    seq = np.full((len(seqs), max(r, 1)), -1, dtype=np.int32)
    seq_len = np.zeros(len(seqs), dtype=np.int32)
    images = np.zeros((len(seqs), r + 1, 3), dtype=np.float64)
    tx = np.asarray(node.position, dtype=np.float64)
    for q, sq in enumerate(seqs):
        seq_len[q] = len(sq)
        img = tx
        images[q, 0] = img
        for k, j in enumerate(sq):
            seq[q, k] = j
            img = mirror_across_plane(img, surfaces[j])
            images[q, k + 1] = img

    p = node.pattern
    return Prepared(
        origin=np.array([s.origin for s in surfaces], dtype=np.float64).reshape(n_s, 3),
        edge_u=np.array([s.edge_u for s in surfaces], dtype=np.float64).reshape(n_s, 3),
        edge_v=np.array([s.edge_v for s in surfaces], dtype=np.float64).reshape(n_s, 3),
        inv_uu=np.array([1.0 / float(s.edge_u @ s.edge_u) for s in surfaces], dtype=np.float64),
        inv_vv=np.array([1.0 / float(s.edge_v @ s.edge_v) for s in surfaces], dtype=np.float64),
        normal=np.array([s.normal for s in surfaces], dtype=np.float64).reshape(n_s, 3),
        offset=np.array([s.offset for s in surfaces], dtype=np.float64),
        holes=holes,
        eps_re=np.array(eps_re, dtype=np.float64),
        eps_im=np.array(eps_im, dtype=np.float64),
        thickness=np.array([s.material.thickness for s in surfaces], dtype=np.float64),
        alpha=np.array(alpha, dtype=np.float64),
        n_re=np.array(n_re, dtype=np.float64),
        seq=seq,
        seq_len=seq_len,
        images=images,
        tx=tx.copy(),
        frame=np.array(node.frame(), dtype=np.float64),
        pattern=np.array([p.gain_dbi, p.bw_az, p.bw_el, p.front_to_back_db,
                          p.sidelobe_floor_db], dtype=np.float64),
        tx_power_dbm=float(node.tx_power_dbm),
        frequency=float(f),
        tm=int(params.polarization is Polarization.TM),
        max_transmissions=int(params.max_transmissions),
    )
