"""Pure numpy implementations of the hot loops.

Same signatures and semantics as the compiled ``_ckernels`` module; used when
the extension is not built.  Summation is numpy's pairwise reduction, which
is deterministic but not bit-identical to the compensated sums of the
compiled kernels.
"""

import numpy as np

_CHUNK = 1 << 20  # max elements in one (points x terms) block


def _int_power(u, n):
    """``u**n`` for integer ``n`` by repeated squaring (no complex log)."""
    if n < 0:
        u = 1.0 / u
        n = -n
    out = np.ones_like(u)
    base = u.copy()
    while n:
        if n & 1:
            out = out * base
        base = base * base
        n >>= 1
    return out


def eval_atoms(coeff, ypow, alpha, beta, z):
    """Sum of ``coeff * y**ypow * exp(alpha z + beta conj(z))`` at each point."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros(z.shape, dtype=np.complex128)
    if coeff.size == 0:
        return out
    step = max(1, _CHUNK // coeff.size)
    for s in range(0, z.size, step):
        zz = z[s:s + step, None]
        logy = np.log(zz.imag)
        expo = ypow[None, :] * logy + alpha[None, :] * zz + beta[None, :] * np.conj(zz)
        out[s:s + step] = (coeff[None, :] * np.exp(expo)).sum(axis=1)
    return out


def lattice_block(z, weight, coeff, ypow, cmax, dmax):
    """Sum over ``1 <= c <= cmax``, ``|d| <= dmax`` of the y-power seed slashed by (c, d).

    Each term is ``sum_j coeff_j (cz+d)^(-weight) |cz+d|^(-2 ypow_j) y^ypow_j``.
    """
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros(z.shape, dtype=np.complex128)
    c = np.arange(1, cmax + 1, dtype=np.float64)
    d = np.arange(-dmax, dmax + 1, dtype=np.float64)
    cc, dd = np.meshgrid(c, d, indexing="ij")
    cc = cc.ravel()
    dd = dd.ravel()
    for i, zi in enumerate(z):
        u = cc * zi + dd
        logm = np.log(u.real * u.real + u.imag * u.imag)
        logy = np.log(zi.imag)
        up = _int_power(u, -weight)
        acc = np.zeros_like(u)
        for cj, aj in zip(coeff, ypow):
            acc = acc + cj * np.exp(aj * (logy - logm))
        out[i] = (up * acc).sum()
    return out


def coset_sum(z, weight, coeff, ypow, alpha, beta, pairs):
    """Sum over rows ``(a, b, c, d)`` of ``pairs`` of ``(seed |_weight gamma)(z)``."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros(z.shape, dtype=np.complex128)
    pa, pb, pc, pd = (pairs[:, i].astype(np.float64) for i in range(4))
    plain = bool(np.all(alpha == 0) and np.all(beta == 0))
    for i, zi in enumerate(z):
        u = pc * zi + pd
        up = _int_power(u, -weight)
        if plain:
            logm = np.log(u.real * u.real + u.imag * u.imag)
            logy = np.log(zi.imag)
            acc = np.zeros_like(u)
            for cj, aj in zip(coeff, ypow):
                acc = acc + cj * np.exp(aj * (logy - logm))
        else:
            gz = (pa * zi + pb) / u
            acc = np.zeros_like(u)
            lg = np.log(gz.imag)
            for cj, aj, al, be in zip(coeff, ypow, alpha, beta):
                acc = acc + cj * np.exp(aj * lg + al * gz + be * np.conj(gz))
        out[i] = (up * acc).sum()
    return out
