# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend: received power of one prepared transmitter at many points.

Same algorithm as ``_grid_py`` but per receiver, without the GIL.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, log10, exp, pow, atan2, asin, INFINITY, NAN, M_PI

cnp.import_array()

cdef enum:
    MAXR = 4

cdef double ENDPOINT_TOL = 1e-9
cdef double RECT_TOL = 1e-12
cdef double C0 = 299792458.0


cdef struct Cplx:
    double re
    double im


cdef inline Cplx c_sqrt(double a, double b) nogil:
    # principal branch, Re >= 0
    cdef Cplx out
    cdef double r = sqrt(a * a + b * b)
    out.re = sqrt(0.5 * (r + a))
    out.im = sqrt(0.5 * (r - a) if r > a else 0.0)
    if b < 0.0:
        out.im = -out.im
    return out


cdef inline Cplx c_div(double ar, double ai, double br, double bi) nogil:
    cdef Cplx out
    cdef double den = br * br + bi * bi
    out.re = (ar * br + ai * bi) / den
    out.im = (ai * br - ar * bi) / den
    return out


cdef inline Cplx gamma(double er, double ei, double cos_i, int tm) nogil:
    cdef double sin2 = 1.0 - cos_i * cos_i
    cdef Cplx w = c_sqrt(er - sin2, -ei)
    if tm:
        return c_div(er * cos_i - w.re, -ei * cos_i - w.im,
                     er * cos_i + w.re, -ei * cos_i + w.im)
    return c_div(cos_i - w.re, -w.im, cos_i + w.re, w.im)


cdef inline double dot3(double* a, double* b) nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


cdef class _View:
    cdef double[:, ::1] origin, edge_u, edge_v, normal, frame
    cdef double[::1] inv_uu, inv_vv, offset, eps_re, eps_im, thickness, alpha, n_re, pattern, tx
    cdef unsigned char[:, ::1] holes
    cdef int[:, ::1] seq
    cdef int[::1] seq_len
    cdef double[:, :, ::1] images
    cdef double tx_power, frequency
    cdef int tm, max_trans, n_s, n_q

    def __init__(self, pr):
        self.origin = np.ascontiguousarray(pr.origin, dtype=np.float64)
        self.edge_u = np.ascontiguousarray(pr.edge_u, dtype=np.float64)
        self.edge_v = np.ascontiguousarray(pr.edge_v, dtype=np.float64)
        self.normal = np.ascontiguousarray(pr.normal, dtype=np.float64)
        self.frame = np.ascontiguousarray(pr.frame, dtype=np.float64)
        self.inv_uu = np.ascontiguousarray(pr.inv_uu, dtype=np.float64)
        self.inv_vv = np.ascontiguousarray(pr.inv_vv, dtype=np.float64)
        self.offset = np.ascontiguousarray(pr.offset, dtype=np.float64)
        self.eps_re = np.ascontiguousarray(pr.eps_re, dtype=np.float64)
        self.eps_im = np.ascontiguousarray(pr.eps_im, dtype=np.float64)
        self.thickness = np.ascontiguousarray(pr.thickness, dtype=np.float64)
        self.alpha = np.ascontiguousarray(pr.alpha, dtype=np.float64)
        self.n_re = np.ascontiguousarray(pr.n_re, dtype=np.float64)
        self.pattern = np.ascontiguousarray(pr.pattern, dtype=np.float64)
        self.tx = np.ascontiguousarray(pr.tx, dtype=np.float64)
        self.holes = np.ascontiguousarray(pr.holes, dtype=np.uint8)
        self.seq = np.ascontiguousarray(pr.seq, dtype=np.int32)
        self.seq_len = np.ascontiguousarray(pr.seq_len, dtype=np.int32)
        self.images = np.ascontiguousarray(pr.images, dtype=np.float64)
        self.tx_power = pr.tx_power_dbm
        self.frequency = pr.frequency
        self.tm = pr.tm
        self.max_trans = pr.max_transmissions
        self.n_s = self.normal.shape[0]
        self.n_q = self.seq.shape[0]
        if self.images.shape[1] > MAXR:
            raise ValueError("too many reflections for the compiled kernel")

    cdef bint inside(self, int j, double* p) nogil:
        cdef double d[3]
        d[0] = p[0] - self.origin[j, 0]
        d[1] = p[1] - self.origin[j, 1]
        d[2] = p[2] - self.origin[j, 2]
        cdef double u = dot3(d, &self.edge_u[j, 0]) * self.inv_uu[j]
        cdef double v = dot3(d, &self.edge_v[j, 0]) * self.inv_vv[j]
        return u >= -RECT_TOL and u <= 1.0 + RECT_TOL and v >= -RECT_TOL and v <= 1.0 + RECT_TOL

    cdef bint hit(self, int j, double* a, double* b, double* p, double* cos_i) nogil:
        cdef double d[3]
        cdef int h
        d[0] = b[0] - a[0]
        d[1] = b[1] - a[1]
        d[2] = b[2] - a[2]
        cdef double denom = dot3(d, &self.normal[j, 0])
        if denom == 0.0:
            return False
        cdef double t = (self.offset[j] - dot3(a, &self.normal[j, 0])) / denom
        if not (t > ENDPOINT_TOL and t < 1.0 - ENDPOINT_TOL):
            return False
        p[0] = a[0] + t * d[0]
        p[1] = a[1] + t * d[1]
        p[2] = a[2] + t * d[2]
        if not self.inside(j, p):
            return False
        for h in range(self.n_s):
            if self.holes[j, h] and self.inside(h, p):
                return False
        cos_i[0] = fabs(denom) / sqrt(dot3(d, d))
        if cos_i[0] > 1.0:
            cos_i[0] = 1.0
        return True

    cdef double penetration_db(self, int j, double cos_i) nogil:
        cdef Cplx g = gamma(self.eps_re[j], self.eps_im[j], cos_i, self.tm)
        cdef double omr = 1.0 - (g.re * g.re - g.im * g.im)
        cdef double omi = -2.0 * g.re * g.im
        cdef double interfaces = omr * omr + omi * omi
        cdef double s = 1.0 - cos_i * cos_i
        cdef double sin_t = sqrt(s if s > 0.0 else 0.0) / self.n_re[j]
        s = 1.0 - sin_t * sin_t
        cdef double cos_t = sqrt(s if s > 0.0 else 0.0)
        cdef double power = interfaces * exp(-2.0 * self.alpha[j] * self.thickness[j] / cos_t)
        cdef double loss = -10.0 * log10(power)
        return loss if loss > 0.0 else 0.0

    cdef double gain(self, double* direction) nogil:
        cdef double x = dot3(direction, &self.frame[0, 0])
        cdef double y = dot3(direction, &self.frame[1, 0])
        cdef double z = dot3(direction, &self.frame[2, 0])
        if z > 1.0:
            z = 1.0
        elif z < -1.0:
            z = -1.0
        cdef double az = atan2(y, x) * (180.0 / M_PI)
        cdef double el = asin(z) * (180.0 / M_PI)
        cdef double rolloff = 12.0 * (az / self.pattern[1]) ** 2 + 12.0 * (el / self.pattern[2]) ** 2
        if rolloff > self.pattern[3]:
            rolloff = self.pattern[3]
        if rolloff > self.pattern[4]:
            rolloff = self.pattern[4]
        return self.pattern[0] - rolloff

    cdef double power_one(self, double* rx) nogil:
        cdef double verts[MAXR + 2][3]
        cdef double cos_r[MAXR]
        cdef double p[3]
        cdef double d[3]
        cdef double cos_i, seg, length, refl_db, trans_db, p_dbm, total = 0.0
        cdef double fspl_k = 4.0 * M_PI * self.frequency / C0
        cdef int q, k, r, j, s, c, n_trans
        cdef bint valid
        cdef Cplx g
        d[0] = rx[0] - self.tx[0]
        d[1] = rx[1] - self.tx[1]
        d[2] = rx[2] - self.tx[2]
        if sqrt(dot3(d, d)) <= ENDPOINT_TOL:
            return NAN
        for q in range(self.n_q):
            k = self.seq_len[q]
            valid = True
            for c in range(3):
                verts[0][c] = self.tx[c]
                verts[k + 1][c] = rx[c]
            for r in range(k - 1, -1, -1):
                j = self.seq[q, r]
                if not self.hit(j, &self.images[q, r + 1, 0], verts[r + 2], verts[r + 1], &cos_r[r]):
                    valid = False
                    break
            if not valid:
                continue
            refl_db = 0.0
            for r in range(k):
                j = self.seq[q, r]
                g = gamma(self.eps_re[j], self.eps_im[j], cos_r[r], self.tm)
                refl_db = refl_db + 10.0 * log10(g.re * g.re + g.im * g.im)
            length = 0.0
            trans_db = 0.0
            n_trans = 0
            for s in range(k + 1):
                for c in range(3):
                    d[c] = verts[s + 1][c] - verts[s][c]
                seg = sqrt(dot3(d, d))
                if not seg > ENDPOINT_TOL:
                    valid = False
                    break
                length = length + seg
                for j in range(self.n_s):
                    if self.hit(j, verts[s], verts[s + 1], p, &cos_i):
                        n_trans = n_trans + 1
                        trans_db = trans_db + self.penetration_db(j, cos_i)
            if not valid or n_trans > self.max_trans:
                continue
            for c in range(3):
                d[c] = verts[1][c] - verts[0][c]
            seg = sqrt(dot3(d, d))
            for c in range(3):
                d[c] = d[c] / seg
            p_dbm = (self.tx_power + self.gain(d) - 20.0 * log10(fspl_k * length)
                     + refl_db - trans_db)
            total = total + pow(10.0, p_dbm / 10.0)
        if total > 0.0:
            return 10.0 * log10(total)
        return -INFINITY


def power_at(pr, rx):
    """Incoherent received power in dBm at each row of ``rx`` (N, 3)."""
    cdef _View view = _View(pr)
    cdef double[:, ::1] pts = np.ascontiguousarray(rx, dtype=np.float64).reshape(-1, 3)
    cdef Py_ssize_t n = pts.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for i in range(n):
            res[i] = view.power_one(&pts[i, 0])
    return out
