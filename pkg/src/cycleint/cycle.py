"""Cycle integrals along closed geodesics.

The normalized cycle integral of a weight ``2k`` function is

    C(F, Q) = D^((1-k)/2) int_{C_Q} F(z) Q(z, 1)^(k-1) dz.

For ``Q`` with ``a > 0``, frame ``sigma`` and automorph eigenvalue ``eps``
the substitution ``z = sigma(iy)`` turns ``Q(z,1)`` into ``-sqrt(D) iy`` up to
the automorphy factor, which cancels the ``D`` power::

    C(F, Q) = (-i)^k int_1^{eps^2} F_sigma(iy) y^(k-1) dy,   F_sigma = F |_{2k} sigma.

:func:`cycle_integral` uses this form, in the variable ``t = log y``
(``y^(k-1) dy = e^(kt) dt``) where the integrand moves along the geodesic at
unit hyperbolic speed.  :func:`cycle_integral_direct` integrates the
defining expression along the semicircle instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bqf import QuadForm, discriminant, frame, normalize_positive_a, GeodesicFrame
from .forms import ModularObject, apply_operator, evaluate, int_power

GL_ORDER = 16
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


class QuadratureError(ArithmeticError):
    """Adaptive quadrature ran out of panels before meeting the tolerance."""


@dataclass(frozen=True)
class CycleResult:
    value: complex
    abs_error: float
    panels: int
    epsilon_sq: float
    form: QuadForm
    k: int


def _fsum_complex(vals) -> complex:
    vals = list(vals)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def gauss_legendre(f, a: float, b: float, tol: float = 1e-12, max_panels: int = 4096,
                   init_width: float | None = None):
    """Adaptive Gauss-Legendre quadrature of a vectorized complex integrand.

    Each panel is compared against the sum over its two halves; a panel is
    accepted once that difference is below its share (by length) of
    ``tol * int |f|``.  Returns ``(value, abs_error, panels)``.  Panels are
    processed level by level and summed in left-to-right order, so the
    result does not depend on evaluation scheduling.
    """
    if b == a:
        return 0j, 0.0, 0
    length = b - a
    n0 = 1 if init_width is None else max(1, math.ceil(abs(length) / init_width))
    edges = np.linspace(a, b, n0 + 1)

    def panel_values(lefts, rights):
        lefts = np.asarray(lefts)
        rights = np.asarray(rights)
        half = 0.5 * (rights - lefts)
        mid = 0.5 * (rights + lefts)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        fx = np.asarray(f(x.ravel()), dtype=np.complex128).reshape(x.shape)
        vals = (fx * _WEIGHTS[None, :]).sum(axis=1) * half
        mags = (np.abs(fx) * _WEIGHTS[None, :]).sum(axis=1) * np.abs(half)
        return vals, mags

    whole, mags = panel_values(edges[:-1], edges[1:])
    scale = float(mags.sum())
    if scale == 0.0:
        return 0j, 0.0, n0
    budget = tol * scale
    pending = [(float(l), float(r), complex(v)) for l, r, v in zip(edges[:-1], edges[1:], whole)]
    accepted = []
    count = n0
    while pending:
        ls = [p[0] for p in pending]
        rs = [p[1] for p in pending]
        ms = [0.5 * (l + r) for l, r in zip(ls, rs)]
        left, _ = panel_values(ls, ms)
        right, _ = panel_values(ms, rs)
        nxt = []
        for (l, r, w), m, vl, vr in zip(pending, ms, left, right):
            err = abs(w - (vl + vr))
            if err <= budget * abs(r - l) / abs(length):
                accepted.append((l, complex(vl + vr), err))
            else:
                nxt.append((l, m, complex(vl)))
                nxt.append((m, r, complex(vr)))
        count += len(nxt) // 2
        if count > max_panels:
            raise QuadratureError(f"no convergence within {max_panels} panels (tol {tol:g})")
        pending = nxt
    accepted.sort(key=lambda t: t[0])
    value = _fsum_complex(v for _, v, _ in accepted)
    error = math.fsum(e for _, _, e in accepted)
    return value, error, len(accepted)


def neg_i_power(k: int) -> complex:
    return (1, -1j, -1, 1j)[k % 4]


def slash_at(F: ModularObject, sigma, y):
    """``(F |_w sigma)(iy) = (c iy + d)^(-w) F(sigma iy)``."""
    (a, b), (c, d) = np.asarray(sigma, dtype=float)
    iy = 1j * np.asarray(y, dtype=float)
    den = c * iy + d
    z = (a * iy + b) / den
    out = int_power(den, -F.weight) * np.asarray(evaluate(F, z))
    return complex(out) if np.ndim(y) == 0 else out


def prepare(Q: QuadForm) -> GeodesicFrame:
    Qp, _ = normalize_positive_a(Q)
    return frame(Qp)


def cycle_integral(F: ModularObject, Q: QuadForm, tol: float = 1e-12,
                   max_panels: int = 4096) -> CycleResult:
    """Normalized cycle integral of ``F`` along the closed geodesic of ``Q``."""
    if F.weight % 2:
        raise ValueError("weight must be even")
    fr = prepare(Q)
    k = F.weight // 2
    T = 2.0 * math.log(fr.eps)
    if F.is_zero:
        return CycleResult(0j, 0.0, 0, fr.eps**2, fr.form, k)

    def integrand(t):
        return slash_at(F, fr.sigma, np.exp(t)) * np.exp(k * t)

    val, err, panels = gauss_legendre(integrand, 0.0, T, tol, max_panels, init_width=0.5)
    norm = neg_i_power(k)
    return CycleResult(norm * val, err, panels, fr.eps**2, fr.form, k)


def cycle_integral_direct(F: ModularObject, Q: QuadForm, tol: float = 1e-12,
                          max_panels: int = 4096) -> CycleResult:
    """Same quantity from the definition, integrating ``F(z) Q(z,1)^(k-1) dz``.

    The path is the counterclockwise arc of the semicircle from
    ``sigma(i eps^2)`` to its top ``sigma(i)``, one period of the geodesic.
    """
    fr = prepare(Q)
    k = F.weight // 2
    a, b, c = fr.form
    D = discriminant(fr.form)
    center = 0.5 * (fr.w + fr.w_prime)
    r = 0.5 * (fr.w_prime - fr.w)
    (sa, sb), (sc, sd) = fr.sigma
    iy = 1j * fr.eps**2
    z0 = (sa * iy + sb) / (sc * iy + sd)
    th0 = math.atan2(z0.imag, z0.real - center)

    def integrand(th):
        e = np.exp(1j * th)
        z = center + r * e
        qz = a * z * z + b * z + c
        return np.asarray(evaluate(F, z)) * int_power(qz, k - 1) * (1j * r * e)

    val, err, panels = gauss_legendre(integrand, th0, 0.5 * math.pi, tol, max_panels,
                                      init_width=0.05)
    norm = D ** ((1 - k) / 2)
    return CycleResult(norm * val, norm * err, panels, fr.eps**2, fr.form, k)


def closed_geodesic_check(F: ModularObject, Q: QuadForm) -> float:
    """Relative size of ``F_sigma(i eps^2) eps^w - F_sigma(i)`` for weight ``w``."""
    fr = prepare(Q)
    eps = fr.eps
    at_one = slash_at(F, fr.sigma, 1.0)
    at_end = slash_at(F, fr.sigma, eps * eps) * eps**F.weight
    return abs(at_end - at_one) / max(1.0, abs(at_one))


def total_derivative_residuals(F: ModularObject, Q: QuadForm, npoints: int = 20,
                               rel_step: float = 1e-3) -> np.ndarray:
    """Check ``(R F)_s(iy) y^(1-k) + (L F)_s(iy) y^(-k-1) = 2 d/dy[F_s(iy) y^(1-k)]``.

    ``F`` has weight ``2 - 2k``; the derivative is a five-point central
    difference.  Returns relative residuals at ``npoints`` points in
    ``[1, eps^2]``.
    """
    fr = prepare(Q)
    k = (2 - F.weight) // 2
    RF = apply_operator(F, "R")
    LF = apply_operator(F, "L")
    ys = np.exp(np.linspace(0.0, 2 * math.log(fr.eps), npoints))
    lhs = slash_at(RF, fr.sigma, ys) * ys ** (1 - k) + slash_at(LF, fr.sigma, ys) * ys ** (-k - 1)

    def g(y):
        return slash_at(F, fr.sigma, y) * y ** (1 - k)

    h = rel_step * ys
    deriv = (-g(ys + 2 * h) + 8 * g(ys + h) - 8 * g(ys - h) + g(ys - 2 * h)) / (12 * h)
    rhs = 2 * deriv
    return np.abs(lhs - rhs) / np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)


def class_invariance_residual(F: ModularObject, Q: QuadForm, gamma, tol: float = 1e-12) -> float:
    """Relative difference of ``C(F, Q)`` and ``C(F, Q o gamma)``."""
    from .bqf import act

    v1 = cycle_integral(F, Q, tol).value
    v2 = cycle_integral(F, act(Q, gamma), tol).value
    return abs(v1 - v2) / max(abs(v1), abs(v2), 1e-300)
