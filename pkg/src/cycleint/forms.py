"""Concrete modular objects and their evaluation.

Three kinds of evaluator back a :class:`ModularObject`:

* :class:`~cycleint.wirtinger.TermSum` -- closed-form atom sums, e.g. the
  products ``y^j g(z) conj(h(z))`` of q-expansions or the completed E2;
* :class:`QExpansion` -- truncated holomorphic q-series;
* :class:`EisensteinObject` -- Poincare-type sums of a translation
  invariant seed over the cosets of the translation subgroup.

Modular objects are evaluated by first moving the point into the standard
fundamental domain and applying the automorphy factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import rgamma, zeta

from . import kernels
from .wirtinger import Atom, TermSum
from . import wirtinger as W

TWO_PI_I = 2j * math.pi
SQRT3_2 = math.sqrt(3) / 2


class DivergentFamilyError(ValueError):
    """Raised for Eisenstein parameters whose coset sum does not converge."""


# -- q-expansions ----------------------------------------------------------

def sigma(n: int, k: int) -> int:
    """Divisor power sum ``sum_{d | n} d^k``."""
    total = 0
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            total += d**k
            e = n // d
            if e != d:
                total += e**k
    return total


def _sigma_table(M: int, k: int) -> list[int]:
    table = [0] * (M + 1)
    for d in range(1, M + 1):
        p = d**k
        for n in range(d, M + 1, d):
            table[n] += p
    return table


def _delta_coeffs(M: int) -> list[int]:
    # q * prod (1 - q^n)^24, exact integer arithmetic
    poly = [0] * (M + 1)
    poly[0] = 1
    for n in range(1, M + 1):
        for _ in range(24):
            for i in range(M, n - 1, -1):
                poly[i] -= poly[i - n]
    return [0] + poly[:M]


@dataclass(frozen=True)
class QExpansion:
    """Truncated q-series ``sum_{n=0}^{M} a_n q^n``, ``q = e^{2 pi i z}``."""

    weight: int
    coeffs: tuple
    name: str = ""
    modular: bool = True

    @property
    def M(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        zz = np.asarray(z, dtype=np.complex128)
        q = np.exp(TWO_PI_I * zz)
        acc = np.zeros_like(q)
        for a in reversed(self.coeffs):
            acc = acc * q + a
        return complex(acc) if np.ndim(z) == 0 else acc

    def to_termsum(self) -> TermSum:
        atoms = [Atom(complex(a), 0.0, TWO_PI_I * n) for n, a in enumerate(self.coeffs) if a != 0]
        return TermSum(tuple(atoms), self.weight)

    def tail_bound(self, y: float) -> float:
        """Bound on the omitted tail at height ``y`` assuming ``|a_n| <= C n^weight``."""
        w = max(self.weight, 0)
        C = max(abs(a) / n**w for n, a in enumerate(self.coeffs) if n > 0) if self.M else 1.0
        total, n = 0.0, self.M + 1
        while True:
            term = C * n**w * math.exp(-2 * math.pi * n * y)
            total += term
            if term < 1e-30 * max(total, 1e-300) or n > self.M + 10_000:
                return total
            n += 1


def standard_qexp(name: str, M: int = 40) -> QExpansion:
    """E2, E4, E6 (normalized to constant term 1) or the discriminant Delta."""
    if M < 1:
        raise ValueError("truncation M must be at least 1")
    if name == "E2":
        s = _sigma_table(M, 1)
        return QExpansion(2, tuple([1] + [-24 * s[n] for n in range(1, M + 1)]), "E2", modular=False)
    if name == "E4":
        s = _sigma_table(M, 3)
        return QExpansion(4, tuple([1] + [240 * s[n] for n in range(1, M + 1)]), "E4")
    if name == "E6":
        s = _sigma_table(M, 5)
        return QExpansion(6, tuple([1] + [-504 * s[n] for n in range(1, M + 1)]), "E6")
    if name == "Delta":
        return QExpansion(12, tuple(_delta_coeffs(M)), "Delta")
    raise ValueError(f"unknown q-expansion {name!r}; expected E2, E4, E6 or Delta")


# -- fundamental domain ------------------------------------------------------

def fd_reduce_array(z, max_steps: int = 10_000):
    """Vectorized reduction into ``|Re z| <= 1/2, |z| >= 1``.

    Returns ``(z_reduced, a, b, c, d)`` with integer arrays such that
    ``(a z + b)/(c z + d) = z_reduced``.
    """
    zr = np.array(z, dtype=np.complex128, copy=True).ravel()
    if np.any(zr.imag <= 0):
        raise ValueError("points must lie in the upper half-plane")
    n = zr.size
    a = np.ones(n, np.int64)
    b = np.zeros(n, np.int64)
    c = np.zeros(n, np.int64)
    d = np.ones(n, np.int64)
    for _ in range(max_steps):
        shift = np.floor(zr.real + 0.5)
        zr = zr - shift
        s = shift.astype(np.int64)
        a, b = a - s * c, b - s * d
        inside = (zr.real**2 + zr.imag**2) < 1.0 - 1e-13
        if not inside.any():
            return zr, a, b, c, d
        zr[inside] = -1.0 / zr[inside]
        a[inside], b[inside], c[inside], d[inside] = -c[inside], -d[inside], a[inside], b[inside]
    raise ArithmeticError("fundamental domain reduction did not converge")


def fd_reduce(z: complex):
    """Reduce one point; returns ``(z', gamma)`` with ``gamma z = z'``."""
    zr, a, b, c, d = fd_reduce_array(np.array([z]))
    gamma = ((int(a[0]), int(b[0])), (int(c[0]), int(d[0])))
    return complex(zr[0]), gamma


def int_power(u, n: int):
    """``u**n`` for an integer ``n`` by repeated multiplication."""
    u = np.asarray(u, dtype=np.complex128)
    if n < 0:
        u = 1.0 / u
        n = -n
    out = np.ones_like(u)
    base = u
    while n:
        if n & 1:
            out = out * base
        base = base * base
        n >>= 1
    return out


# -- Eisenstein-type coset sums --------------------------------------------

@lru_cache(maxsize=8)
def coprime_pairs(N: int) -> np.ndarray:
    """Rows ``(a, b, c, d)`` in SL2(Z), one per +-(c, d) with ``max(|c|,|d|) <= N``.

    Ordered by ``(|c| + |d|, c, d)``.
    """
    rows = [(0, 1)]
    for c in range(1, N + 1):
        for d in range(-N, N + 1):
            if math.gcd(c, d) == 1:
                rows.append((c, d))
    rows.sort(key=lambda r: (abs(r[0]) + abs(r[1]), r[0], r[1]))
    out = np.empty((len(rows), 4), np.int64)
    for i, (c, d) in enumerate(rows):
        g, x, y = _ext_gcd(c, d)
        # x c + y d = 1  ->  a = y, b = -x gives a d - b c = 1
        out[i] = (y, -x, c, d)
    return out


def _ext_gcd(p: int, q: int):
    if q == 0:
        return (p, 1, 0) if p >= 0 else (-p, -1, 0)
    g, x, y = _ext_gcd(q, p % q)
    return g, y, x - (p // q) * y


def _binom_series(x: float, J: int) -> np.ndarray:
    out = np.empty(J + 1)
    out[0] = 1.0
    for p in range(J):
        out[p + 1] = out[p] * (x - p) / (p + 1)
    return out


@dataclass(frozen=True)
class EisensteinObject:
    """``F(z) = sum over +-(c, d) coprime of (seed |_weight gamma_{c,d})(z)``.

    ``method="lattice"`` sums over all nonzero lattice points (then divides
    by ``2 zeta(e)``) with analytic tail corrections: columns ``c > C`` via
    the zeroth Poisson mode, rows ``|d| > N`` via a convergent expansion in
    ``1/d`` against Hurwitz zeta values.  Needs a pure y-power seed.
    ``method="coset"`` is the plain truncated coset sum over
    ``max(|c|, |d|) <= N``; it converges like ``N^(2 - e)``.
    """

    seed: TermSum
    weight: int
    N: int = 100
    method: str = "lattice"

    def __post_init__(self):
        if self.seed.weight != self.weight:
            object.__setattr__(self, "seed", self.seed.with_weight(self.weight))
        if self.method not in ("lattice", "coset"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.seed.atoms:
            return
        if not self.seed.is_translation_invariant():
            raise ValueError("Eisenstein seed must be invariant under z -> z + 1")
        e_min = min(2 * a.ypow + self.weight for a in self.seed.atoms)
        if not e_min > 2:
            raise DivergentFamilyError(
                f"convergence exponent {e_min:g} <= 2 (seed {self.seed.atoms[0].ypow:g}, weight {self.weight})")
        if self.method == "lattice" and not self.plain:
            object.__setattr__(self, "method", "coset")

    @property
    def plain(self) -> bool:
        return all(a.alpha == 0 and a.beta == 0 for a in self.seed.atoms)

    @property
    def exponent(self) -> float:
        return 2 * self.seed.max_ypow + self.weight

    def with_seed(self, seed: TermSum) -> "EisensteinObject":
        return replace(self, seed=seed, weight=seed.weight)

    def __call__(self, z):
        zz = np.asarray(z, dtype=np.complex128)
        if not self.seed.atoms:
            out = np.zeros(zz.shape, np.complex128)
        elif self.method == "coset":
            out = kernels.coset_sum(zz.ravel(), self.weight, *self.seed.arrays,
                                    coprime_pairs(self.N)).reshape(zz.shape)
        else:
            out = self._lattice(zz.ravel()).reshape(zz.shape)
        return complex(out) if np.ndim(z) == 0 else out

    def _lattice(self, z: np.ndarray) -> np.ndarray:
        w = self.weight
        y = z.imag
        coeff, ypow, _, _ = self.seed.arrays
        e = 2 * ypow + w
        ze = zeta(e, 1)
        # columns beyond C contribute only through the zeroth Fourier mode
        C = max(10, math.ceil(8.0 / float(y.min())) - 1)
        zmax = float(np.abs(z).max())
        N = max(self.N, math.ceil(8 * C * zmax))
        out = kernels.lattice_block(z, w, coeff / ze, ypow, C, N)
        ratio = C * zmax / (N + 1)
        J = max(4, math.ceil(-40.0 / math.log(ratio)) + 4)
        cs = np.concatenate([np.arange(1, C + 1), -np.arange(1, C + 1)]).astype(float)
        u = cs[None, :] * z[:, None]
        ub = np.conj(u)
        for cj, a, ej, zj in zip(coeff, ypow, e, ze):
            ya = y**a
            # row tails: sum_{n > N} n^-e (1 + u/n)^-(w+a) (1 + ub/n)^-a
            bp = _binom_series(-(w + a), J)
            bq = _binom_series(-a, J)
            hz = zeta(ej + np.arange(2 * J + 1), N + 1)
            tail = np.zeros_like(u)
            up = np.ones_like(u)
            for p in range(J + 1):
                inner = np.zeros_like(u)
                uq = np.ones_like(u)
                for q in range(J + 1 - p):
                    inner = inner + bq[q] * hz[p + q] * uq
                    uq = uq * ub
                tail = tail + bp[p] * up * inner
                up = up * u
            tails = tail.sum(axis=1) * ya
            # zeroth Poisson mode of columns c > C
            I = (2.0 ** (2 - ej) * math.pi * (-1) ** (w // 2) * gamma_fn(ej - 1)
                 * rgamma(w + a) * rgamma(a)) * y ** (a + 1 - ej)
            far = I * zeta(ej - 1, C + 1)
            out = out + cj * (ya + (tails + far) / zj)
        return out

    def calibrate(self, tol: float, cap: int = 1600, points=None) -> "EisensteinObject":
        """Double ``N`` from the current value until successive values agree to ``tol``."""
        if points is None:
            points = np.array([0.5j + 1.0, 0.25 + 1.2j, -0.4 + 0.95j, 2.5j])
        obj = self
        prev = obj(points)
        while obj.N < cap:
            nxt = replace(obj, N=min(2 * obj.N, cap))
            vals = nxt(points)
            change = np.max(np.abs(vals - prev) / np.maximum(np.abs(vals), 1e-300))
            obj, prev = nxt, vals
            if change < tol:
                break
        return obj


# -- modular objects ---------------------------------------------------------

Evaluator = Union[TermSum, QExpansion, EisensteinObject]


@dataclass(frozen=True)
class ModularObject:
    evaluator: Evaluator
    weight: int
    eigenvalue: complex | None = None
    modular: bool = True
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def eval_direct(self, z):
        return self.evaluator(z)

    def __call__(self, z):
        return evaluate(self, z)

    def apply(self, op: str, n: int | None = None) -> "ModularObject":
        return apply_operator(self, op, n)

    @property
    def is_zero(self) -> bool:
        ev = self.evaluator
        if isinstance(ev, TermSum):
            return not ev.atoms
        if isinstance(ev, EisensteinObject):
            return not ev.seed.atoms
        return all(a == 0 for a in ev.coeffs)


def eval_reduced(F: ModularObject, z):
    """``F(z) = (cz + d)^(-w) F(gamma z)`` with ``gamma z`` in the fundamental domain."""
    if not F.modular:
        raise ValueError(f"{F.name or 'object'} is not modular; evaluate directly")
    zz = np.asarray(z, dtype=np.complex128)
    zr, _, _, c, d = fd_reduce_array(zz)
    vals = np.asarray(F.eval_direct(zr), dtype=np.complex128)
    factor = int_power(c * zz.ravel() + d, -F.weight)
    out = (factor * vals).reshape(zz.shape)
    return complex(out) if np.ndim(z) == 0 else out


def evaluate(F: ModularObject, z):
    """Reduced evaluation for modular objects, direct otherwise."""
    return eval_reduced(F, z) if F.modular else F.eval_direct(z)


def _as_termsum(F: ModularObject) -> TermSum:
    ev = F.evaluator
    if isinstance(ev, QExpansion):
        return ev.to_termsum()
    return ev


def _shift_eigen(lam, w, op, n=1):
    if lam is None:
        return None
    if op == "L":
        return lam - w + 2
    if op == "R":
        return lam + w
    if op == "xi":
        return complex(lam).conjugate()
    if op == "laplacian":
        return lam
    if op == "bol":
        for i in range(n):
            lam = lam + w + 2 * i
        return lam
    raise ValueError(op)


_OPS = {
    "L": (W.lower, lambda w: w - 2),
    "R": (W.raise_, lambda w: w + 2),
    "xi": (W.xi, lambda w: 2 - w),
    "laplacian": (W.laplacian, lambda w: w),
}


def apply_operator(F: ModularObject, op: str, n: int | None = None) -> ModularObject:
    """Apply ``L``, ``R``, ``xi``, ``laplacian`` or ``bol`` (n-fold D) to ``F``.

    Eisenstein objects get the operator applied to the seed (the operators
    commute with the slash action); atom sums are transformed directly.
    ``bol`` is only slash-equivariant for ``n = 1 - weight``; other ``n``
    give a non-modular result.
    """
    w = F.weight
    if op == "bol":
        if n is None or n < 0:
            raise ValueError("bol needs a non-negative n")
        new_w = w + 2 * n
        fn = lambda T: W.bol(T, n)  # noqa: E731
        modular = F.modular and n == 1 - w
    elif op in _OPS:
        fn, wmap = _OPS[op]
        new_w = wmap(w)
        modular = F.modular
    else:
        raise ValueError(f"unknown operator {op!r}")
    label = f"{op}{n if op == 'bol' else ''}({F.name})"
    lam = _shift_eigen(F.eigenvalue, w, op, n or 1)
    ev = F.evaluator
    if isinstance(ev, EisensteinObject):
        if op == "bol" and not modular:
            raise ValueError(f"D^{n} of a weight {w} Eisenstein sum is not modular")
        new_ev = ev.with_seed(fn(ev.seed))
    else:
        new_ev = fn(_as_termsum(F))
    return ModularObject(new_ev, new_w, lam, modular, label, dict(F.meta))


# -- families ---------------------------------------------------------------

def constant(c=1.0) -> ModularObject:
    return ModularObject(TermSum.constant(c, 0), 0, 0.0, True, "const")


def qexp_object(name: str, M: int = 40) -> ModularObject:
    g = standard_qexp(name, M)
    return ModularObject(g, g.weight, 0.0 if g.modular else None, g.modular, name)


def product_form(g: QExpansion, h: QExpansion, j: int | None = None) -> ModularObject:
    """``y^j g(z) conj(h(z))`` with ``j = weight(h)``; weight ``w(g) - w(h)``."""
    if j is None:
        j = h.weight
    if j != h.weight:
        raise ValueError(f"y-power {j} must equal weight(h) = {h.weight} for pure weight")
    G = g.to_termsum()
    H = W.conjugate(h.to_termsum())
    F = W.ymul(W.multiply(G, H, g.weight - h.weight), j)
    name = f"y^{j}*{g.name}*conj({h.name})"
    return ModularObject(F, g.weight - h.weight, None, g.modular and h.modular, name)


def e2_star(M: int = 40) -> ModularObject:
    """Completed weight-2 Eisenstein series ``E2(z) - 3/(pi y)`` (harmonic)."""
    E2 = standard_qexp("E2", M).to_termsum()
    F = E2 + TermSum((Atom(-3 / math.pi, -1.0),), 2)
    return ModularObject(F, 2, 0.0, True, "E2*")


def real_analytic_eisenstein(s: float, N: int = 100, method: str = "lattice") -> ModularObject:
    """``E(z, s)``: seed ``y^s`` at weight 0, Laplace eigenvalue ``s(1 - s)``."""
    if not s > 1:
        raise DivergentFamilyError(f"E(z, s) needs s > 1, got {s}")
    ev = EisensteinObject(TermSum.of((1.0, float(s))), 0, N, method)
    return ModularObject(ev, 0, s * (1 - s), True, f"E(z,{s:g})")


def harmonic_eisenstein(k: int, N: int = 100, method: str = "lattice") -> ModularObject:
    """Harmonic Eisenstein sum of weight ``2 - 2k``: seed ``y^(2k-1)``, ``k >= 2``."""
    if k < 2:
        raise DivergentFamilyError(f"harmonic Eisenstein family needs k >= 2, got {k}")
    w = 2 - 2 * k
    ev = EisensteinObject(TermSum.of((1.0, float(2 * k - 1)), weight=w), w, N, method)
    return ModularObject(ev, w, 0.0, True, f"E_{w}")


def eisenstein(seed: TermSum, weight: int, N: int = 100, eigenvalue=None,
               method: str = "lattice", name: str = "") -> ModularObject:
    ev = EisensteinObject(seed.with_weight(weight), weight, N, method)
    return ModularObject(ev, weight, eigenvalue, True, name or f"Eis[{weight}]")


def harmonicity_residual(F: ModularObject, points=None) -> float:
    """Max of ``|Delta F| / max(1, |F|)`` over a few reduced points."""
    if points is None:
        points = np.array([0.1 + 1.1j, -0.3 + 0.97j, 0.45 + 0.9j, 1.7j, 0.2 + 3.0j])
    lap = apply_operator(F, "laplacian")
    if lap.is_zero:
        return 0.0
    num = np.abs(lap(points))
    den = np.maximum(1.0, np.abs(F(points)))
    return float(np.max(num / den))
