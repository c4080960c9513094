"""Numpy backend: received power of one prepared transmitter at many points.

Vectorized over receivers, looping over reflection sequences in canonical
order so the multipath sum is accumulated in a fixed order.
"""

from __future__ import annotations

import numpy as np

from ..geometry import ENDPOINT_TOL, RECT_TOL
from .prepare import Prepared


def _dot(a, b):
    # explicit products, no BLAS: results must not depend on array length
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _inside(pr: Prepared, j: int, p: np.ndarray) -> np.ndarray:
    d = p - pr.origin[j]
    u = _dot(d, pr.edge_u[j]) * pr.inv_uu[j]
    v = _dot(d, pr.edge_v[j]) * pr.inv_vv[j]
    return (u >= -RECT_TOL) & (u <= 1.0 + RECT_TOL) & (v >= -RECT_TOL) & (v <= 1.0 + RECT_TOL)


def _hit(pr: Prepared, j: int, a: np.ndarray, b: np.ndarray):
    """Open-segment crossing of facet j, honouring window holes.

    Returns (mask, point, cos_incidence).
    """
    d = b - a
    n = pr.normal[j]
    denom = _dot(d, n)
    nz = denom != 0.0
    safe = np.where(nz, denom, 1.0)
    t = (pr.offset[j] - _dot(a, n)) / safe
    ok = nz & (t > ENDPOINT_TOL) & (t < 1.0 - ENDPOINT_TOL)
    p = a + t[..., None] * d
    ok &= _inside(pr, j, p)
    for h in np.flatnonzero(pr.holes[j]):
        ok &= ~_inside(pr, int(h), p)
    length = np.sqrt(_dot(d, d))
    cos_i = np.minimum(1.0, np.abs(denom) / np.where(length > 0.0, length, 1.0))
    return ok, p, cos_i


def _gamma(pr: Prepared, j: int, cos_i: np.ndarray) -> np.ndarray:
    eps = complex(pr.eps_re[j], -pr.eps_im[j])
    sin2 = 1.0 - cos_i * cos_i
    w = np.sqrt(eps - sin2 + 0j)
    if pr.tm:
        return (eps * cos_i - w) / (eps * cos_i + w)
    return (cos_i - w) / (cos_i + w)


def _penetration_db(pr: Prepared, j: int, cos_i: np.ndarray) -> np.ndarray:
    g = _gamma(pr, j, cos_i)
    one_minus = 1.0 - g * g
    interfaces = one_minus.real ** 2 + one_minus.imag ** 2
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_i * cos_i)) / pr.n_re[j]
    cos_t = np.sqrt(np.maximum(0.0, 1.0 - sin_t * sin_t))
    with np.errstate(divide="ignore", over="ignore"):
        power = interfaces * np.exp(-2.0 * pr.alpha[j] * pr.thickness[j] / cos_t)
        return np.maximum(0.0, -10.0 * np.log10(power))


def _gain(pr: Prepared, direction: np.ndarray) -> np.ndarray:
    fwd, left, up = pr.frame
    x = _dot(direction, fwd)
    y = _dot(direction, left)
    z = np.clip(_dot(direction, up), -1.0, 1.0)
    az = np.degrees(np.arctan2(y, x))
    el = np.degrees(np.arcsin(z))
    g, bw_az, bw_el, fb, floor = pr.pattern
    rolloff = 12.0 * (az / bw_az) ** 2 + 12.0 * (el / bw_el) ** 2
    return g - np.minimum(np.minimum(rolloff, fb), floor)


def power_at(pr: Prepared, rx: np.ndarray) -> np.ndarray:
    """Incoherent received power in dBm at each row of ``rx`` (N, 3).

    -inf where no path survives, NaN where rx coincides with the transmitter.
    """
    rx = np.ascontiguousarray(rx, dtype=np.float64).reshape(-1, 3)
    n_rx = rx.shape[0]
    n_s = pr.normal.shape[0]
    tx = np.broadcast_to(pr.tx, rx.shape)
    fspl_k = 4.0 * np.pi * pr.frequency / 299792458.0
    total = np.zeros(n_rx)
    with np.errstate(invalid="ignore", divide="ignore"):
        for q in range(pr.seq.shape[0]):
            k = int(pr.seq_len[q])
            valid = np.ones(n_rx, dtype=bool)
            target = rx
            points = [None] * k
            refl_db = np.zeros(n_rx)
            refl_terms = [None] * k
            for r in range(k - 1, -1, -1):
                j = int(pr.seq[q, r])
                img = np.broadcast_to(pr.images[q, r + 1], rx.shape)
                ok, p, cos_i = _hit(pr, j, img, target)
                valid &= ok
                p = np.where(valid[:, None], p, rx)
                points[r] = p
                g = _gamma(pr, j, cos_i)
                refl_terms[r] = 10.0 * np.log10(g.real ** 2 + g.imag ** 2)
                target = p
            for r in range(k):
                refl_db = refl_db + refl_terms[r]
            verts = [tx] + points + [rx]
            length = np.zeros(n_rx)
            trans_db = np.zeros(n_rx)
            n_trans = np.zeros(n_rx, dtype=np.int64)
            for s in range(len(verts) - 1):
                a, b = verts[s], verts[s + 1]
                d = b - a
                seg = np.sqrt(_dot(d, d))
                valid &= seg > ENDPOINT_TOL
                length = length + seg
                for j in range(n_s):
                    ok, _, cos_i = _hit(pr, j, a, b)
                    if ok.any():
                        n_trans += ok
                        trans_db = trans_db + np.where(ok, _penetration_db(pr, j, cos_i), 0.0)
            valid &= n_trans <= pr.max_transmissions
            first = verts[1] - verts[0]
            flen = np.sqrt(_dot(first, first))
            direction = first / np.where(flen > 0.0, flen, 1.0)[:, None]
            fspl = -20.0 * np.log10(fspl_k * np.where(length > 0.0, length, 1.0))
            p_dbm = pr.tx_power_dbm + _gain(pr, direction) + fspl + refl_db - trans_db
            total = total + np.where(valid, 10.0 ** (p_dbm / 10.0), 0.0)
        out = np.where(total > 0.0, 10.0 * np.log10(np.where(total > 0.0, total, 1.0)), -np.inf)
    coincide = np.sqrt(_dot(rx - pr.tx, rx - pr.tx)) <= ENDPOINT_TOL
    out[coincide] = np.nan
    return out
