# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: atom evaluation and Eisenstein lattice sums.

All sums use Neumaier compensated summation in a fixed loop order, so the
results are reproducible run to run.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, cos, sin, fabs, sqrt, floor

cnp.import_array()


cdef struct Acc:
    double s_re
    double c_re
    double s_im
    double c_im


cdef inline void acc_init(Acc* a) noexcept nogil:
    a.s_re = 0.0
    a.c_re = 0.0
    a.s_im = 0.0
    a.c_im = 0.0


cdef inline void neumaier(double* s, double* c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


cdef inline void acc_add(Acc* a, double re, double im) noexcept nogil:
    neumaier(&a.s_re, &a.c_re, re)
    neumaier(&a.s_im, &a.c_im, im)


cdef inline void cpow_int(double ur, double ui, int n, double* outr, double* outi) noexcept nogil:
    # (ur + i ui)^n by repeated squaring
    cdef double br, bi, rr = 1.0, ri = 0.0, tr, m
    if n < 0:
        m = ur * ur + ui * ui
        br = ur / m
        bi = -ui / m
        n = -n
    else:
        br = ur
        bi = ui
    while n:
        if n & 1:
            tr = rr * br - ri * bi
            ri = rr * bi + ri * br
            rr = tr
        tr = br * br - bi * bi
        bi = 2.0 * br * bi
        br = tr
        n >>= 1
    outr[0] = rr
    outi[0] = ri


cdef inline double rpow_int(double r, int n) noexcept nogil:
    cdef double out = 1.0
    while n:
        if n & 1:
            out *= r
        r *= r
        n >>= 1
    return out


cdef inline double ratio_pow(double r, double a, int kind, int n) noexcept nogil:
    # r**a for r > 0; kind 0: a = n, kind 1: a = n + 1/2, else via exp/log
    if kind == 0:
        return rpow_int(r, n)
    if kind == 1:
        return rpow_int(r, n) * sqrt(r)
    return exp(a * log(r))


cdef void classify(double[::1] ypow, int[::1] kind, int[::1] nint):
    cdef Py_ssize_t j
    cdef double a
    for j in range(ypow.shape[0]):
        a = ypow[j]
        if a >= 0 and a == floor(a) and a < 1024:
            kind[j] = 0
            nint[j] = <int>a
        elif a >= 0 and 2 * a == floor(2 * a) and a < 1024:
            kind[j] = 1
            nint[j] = <int>floor(a)
        else:
            kind[j] = 2
            nint[j] = 0


def eval_atoms(cnp.complex128_t[::1] coeff, double[::1] ypow,
               cnp.complex128_t[::1] alpha, cnp.complex128_t[::1] beta, z):
    cdef cnp.complex128_t[::1] zz = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef Py_ssize_t m = zz.shape[0], n = coeff.shape[0], i, j
    out = np.empty(m, dtype=np.complex128)
    cdef cnp.complex128_t[::1] o = out
    cdef double x, y, logy, er, ei, mag, cr, ci, vr, vi
    cdef Acc acc
    with nogil:
        for i in range(m):
            x = zz[i].real
            y = zz[i].imag
            logy = log(y)
            acc_init(&acc)
            for j in range(n):
                # alpha z + beta conj(z)
                er = ypow[j] * logy + alpha[j].real * x - alpha[j].imag * y \
                     + beta[j].real * x + beta[j].imag * y
                ei = alpha[j].real * y + alpha[j].imag * x \
                     - beta[j].real * y + beta[j].imag * x
                mag = exp(er)
                cr = mag * cos(ei)
                ci = mag * sin(ei)
                vr = coeff[j].real * cr - coeff[j].imag * ci
                vi = coeff[j].real * ci + coeff[j].imag * cr
                acc_add(&acc, vr, vi)
            o[i].real = acc.s_re + acc.c_re
            o[i].imag = acc.s_im + acc.c_im
    return out.reshape(np.shape(z))


def lattice_block(z, int weight, cnp.complex128_t[::1] coeff, double[::1] ypow,
                  int cmax, int dmax):
    cdef cnp.complex128_t[::1] zz = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef Py_ssize_t m = zz.shape[0], na = coeff.shape[0], i, j
    cdef int c, d
    out = np.empty(m, dtype=np.complex128)
    cdef cnp.complex128_t[::1] o = out
    cdef double x, y, ur, ui, r, pr, pi_, sr, si, f
    cdef int[::1] kind = np.empty(na, dtype=np.intc)
    cdef int[::1] nint = np.empty(na, dtype=np.intc)
    classify(ypow, kind, nint)
    cdef Acc acc
    with nogil:
        for i in range(m):
            x = zz[i].real
            y = zz[i].imag
            acc_init(&acc)
            for c in range(1, cmax + 1):
                for d in range(-dmax, dmax + 1):
                    ur = c * x + d
                    ui = c * y
                    r = y / (ur * ur + ui * ui)
                    cpow_int(ur, ui, -weight, &pr, &pi_)
                    sr = 0.0
                    si = 0.0
                    for j in range(na):
                        f = ratio_pow(r, ypow[j], kind[j], nint[j])
                        sr += coeff[j].real * f
                        si += coeff[j].imag * f
                    acc_add(&acc, pr * sr - pi_ * si, pr * si + pi_ * sr)
            o[i].real = acc.s_re + acc.c_re
            o[i].imag = acc.s_im + acc.c_im
    return out.reshape(np.shape(z))


def coset_sum(z, int weight, cnp.complex128_t[::1] coeff, double[::1] ypow,
              cnp.complex128_t[::1] alpha, cnp.complex128_t[::1] beta,
              cnp.int64_t[:, ::1] pairs):
    cdef cnp.complex128_t[::1] zz = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef Py_ssize_t m = zz.shape[0], na = coeff.shape[0], npairs = pairs.shape[0], i, j, p
    out = np.empty(m, dtype=np.complex128)
    cdef cnp.complex128_t[::1] o = out
    cdef double x, y, ur, ui, mod2, pr, pi_, sr, si, f, gx, gy, nr, ni, er, ei, mag, lg
    cdef double a, b, c, d
    cdef bint plain = True
    for j in range(na):
        if alpha[j] != 0 or beta[j] != 0:
            plain = False
    cdef int[::1] kind = np.empty(na, dtype=np.intc)
    cdef int[::1] nint = np.empty(na, dtype=np.intc)
    classify(ypow, kind, nint)
    cdef Acc acc
    with nogil:
        for i in range(m):
            x = zz[i].real
            y = zz[i].imag
            acc_init(&acc)
            for p in range(npairs):
                a = <double>pairs[p, 0]
                b = <double>pairs[p, 1]
                c = <double>pairs[p, 2]
                d = <double>pairs[p, 3]
                ur = c * x + d
                ui = c * y
                mod2 = ur * ur + ui * ui
                cpow_int(ur, ui, -weight, &pr, &pi_)
                gy = y / mod2
                sr = 0.0
                si = 0.0
                if plain:
                    for j in range(na):
                        f = ratio_pow(gy, ypow[j], kind[j], nint[j])
                        sr += coeff[j].real * f
                        si += coeff[j].imag * f
                else:
                    # gamma z = (a z + b) / (c z + d)
                    nr = a * x + b
                    ni = a * y
                    gx = (nr * ur + ni * ui) / mod2
                    lg = log(gy)
                    for j in range(na):
                        er = ypow[j] * lg + alpha[j].real * gx - alpha[j].imag * gy \
                             + beta[j].real * gx + beta[j].imag * gy
                        ei = alpha[j].real * gy + alpha[j].imag * gx \
                             - beta[j].real * gy + beta[j].imag * gx
                        mag = exp(er)
                        sr += mag * (coeff[j].real * cos(ei) - coeff[j].imag * sin(ei))
                        si += mag * (coeff[j].real * sin(ei) + coeff[j].imag * cos(ei))
                acc_add(&acc, pr * sr - pi_ * si, pr * si + pi_ * sr)
            o[i].real = acc.s_re + acc.c_re
            o[i].imag = acc.s_im + acc.c_im
    return out.reshape(np.shape(z))
