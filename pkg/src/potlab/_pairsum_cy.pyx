# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pair-sum kernels; see ``_pairsum_np`` for the reference semantics."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, pi, sqrt

cnp.import_array()

DEF EULER_GAMMA = 0.5772156649015328606065


cdef double _k1(double t) nogil:
    """Modified Bessel K1: ascending series below 2, continued fraction above."""
    cdef double q, i1, term, psi, companion, res
    cdef double b, d, h, delh, q1, q2, a1, qq, c, a, s, qnew, dels, k0
    cdef int k, i
    if t <= 2.0:
        q = t * t / 4.0
        i1 = 1.0
        term = 1.0
        psi = -2.0 * EULER_GAMMA + 1.0
        companion = psi
        for k in range(1, 18):
            term = term * q / (k * (k + 1))
            i1 = i1 + term
            psi = psi + 1.0 / k + 1.0 / (k + 1)
            companion = companion + term * psi
        i1 = i1 * (t / 2.0)
        return log(t / 2.0) * i1 + 1.0 / t - (t / 4.0) * companion
    b = 2.0 * (1.0 + t)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    qq = a1
    c = a1
    a = -a1
    s = 1.0 + qq * delh
    for i in range(2, 80):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        qq = qq + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = qq * delh
        s = s + dels
        if dels < 1e-16 * s and dels > -1e-16 * s:
            break
    h = a1 * h
    k0 = sqrt(pi / (2.0 * t)) * exp(-t) / s
    return k0 * (t + 0.5 - h) / t


def pair_quadratic_form(double[:, ::1] pos, double[:, ::1] vec, double shift,
                        double skip_below):
    cdef Py_ssize_t m = pos.shape[0]
    cdef int n = pos.shape[1]
    cdef Py_ssize_t a, b2
    cdef int i
    cdef double total = 0.0, r2, r, da, db, vv, d0, d1, d2
    with nogil:
        for a in range(m):
            for b2 in range(m):
                d0 = pos[a, 0] - pos[b2, 0]
                d1 = pos[a, 1] - pos[b2, 1]
                d2 = pos[a, 2] - pos[b2, 2] if n == 3 else 0.0
                r2 = d0 * d0 + d1 * d1 + d2 * d2
                r = sqrt(r2)
                if r <= skip_below:
                    continue
                da = (d0 * vec[a, 0] + d1 * vec[a, 1]) / r
                db = (d0 * vec[b2, 0] + d1 * vec[b2, 1]) / r
                vv = vec[a, 0] * vec[b2, 0] + vec[a, 1] * vec[b2, 1]
                if n == 3:
                    da += d2 * vec[a, 2] / r
                    db += d2 * vec[b2, 2] / r
                    vv += vec[a, 2] * vec[b2, 2]
                total += da * db - shift * vv
    return total


def pair_quadratic_form_bessel(double[:, ::1] pos, double[:, ::1] vec,
                               double skip_below):
    cdef Py_ssize_t m = pos.shape[0]
    cdef int n = pos.shape[1]
    cdef Py_ssize_t a, b2
    cdef double total = 0.0, r2, r, da, db, d0, d1, d2
    with nogil:
        for a in range(m):
            for b2 in range(m):
                d0 = pos[a, 0] - pos[b2, 0]
                d1 = pos[a, 1] - pos[b2, 1]
                d2 = pos[a, 2] - pos[b2, 2] if n == 3 else 0.0
                r2 = d0 * d0 + d1 * d1 + d2 * d2
                r = sqrt(r2)
                if r <= skip_below:
                    continue
                da = (d0 * vec[a, 0] + d1 * vec[a, 1]) / r
                db = (d0 * vec[b2, 0] + d1 * vec[b2, 1]) / r
                if n == 3:
                    da += d2 * vec[a, 2] / r
                    db += d2 * vec[b2, 2] / r
                total += da * db * r * _k1(r)
    return total


def kernel_apply(double[:, ::1] src_pos, double[:, ::1] src_vec,
                 double[:, ::1] tgt_pos, double shift, double skip_below):
    cdef Py_ssize_t m = src_pos.shape[0], t = tgt_pos.shape[0]
    cdef int n = src_pos.shape[1]
    cdef Py_ssize_t a, b2
    cdef double r, dot, d0, d1, d2
    out_arr = np.zeros((t, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for a in range(t):
            for b2 in range(m):
                d0 = tgt_pos[a, 0] - src_pos[b2, 0]
                d1 = tgt_pos[a, 1] - src_pos[b2, 1]
                d2 = tgt_pos[a, 2] - src_pos[b2, 2] if n == 3 else 0.0
                r = sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                if r <= skip_below:
                    continue
                dot = (d0 * src_vec[b2, 0] + d1 * src_vec[b2, 1]) / r
                if n == 3:
                    dot += d2 * src_vec[b2, 2] / r
                out[a, 0] += d0 / r * dot - shift * src_vec[b2, 0]
                out[a, 1] += d1 / r * dot - shift * src_vec[b2, 1]
                if n == 3:
                    out[a, 2] += d2 / r * dot - shift * src_vec[b2, 2]
    return out_arr


def potential_sum(double[:, ::1] src_pos, double[::1] weights,
                  double[:, ::1] tgt_pos, int n, double skip_below):
    cdef Py_ssize_t m = src_pos.shape[0], t = tgt_pos.shape[0]
    cdef Py_ssize_t a, b2
    cdef double r, acc, d0, d1, d2
    out_arr = np.zeros(t, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for a in range(t):
            acc = 0.0
            for b2 in range(m):
                d0 = tgt_pos[a, 0] - src_pos[b2, 0]
                d1 = tgt_pos[a, 1] - src_pos[b2, 1]
                d2 = tgt_pos[a, 2] - src_pos[b2, 2] if n == 3 else 0.0
                r = sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                if r <= skip_below:
                    continue
                if n == 2:
                    acc += -log(r) / (2.0 * pi) * weights[b2]
                else:
                    acc += weights[b2] / (4.0 * pi * r)
            out[a] = acc
    return out_arr


def gradient_sum(double[:, ::1] src_pos, double[::1] weights,
                 double[:, ::1] tgt_pos, double skip_below):
    cdef Py_ssize_t m = src_pos.shape[0], t = tgt_pos.shape[0]
    cdef int n = src_pos.shape[1]
    cdef Py_ssize_t a, b2
    cdef double r, rn, d0, d1, d2
    out_arr = np.zeros((t, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for a in range(t):
            for b2 in range(m):
                d0 = src_pos[b2, 0] - tgt_pos[a, 0]
                d1 = src_pos[b2, 1] - tgt_pos[a, 1]
                d2 = src_pos[b2, 2] - tgt_pos[a, 2] if n == 3 else 0.0
                r = sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                if r <= skip_below:
                    continue
                rn = r * r if n == 2 else r * r * r
                out[a, 0] += d0 / rn * weights[b2]
                out[a, 1] += d1 / rn * weights[b2]
                if n == 3:
                    out[a, 2] += d2 / rn * weights[b2]
    return out_arr
