"""Closed-form Maass operators on sums of Wirtinger atoms.

An atom is ``c * y**a * exp(alpha*z + beta*conj(z))``.  Sums of atoms with a
declared weight are closed under d/dz, d/dzbar, multiplication by powers of
y and conjugation, hence under the lowering, raising, xi, Laplace and Bol
operators.

Derivative conventions (z = x + iy)::

    dy/dz = 1/(2i),   dy/dzbar = i/2,   dx/dz = dx/dzbar = 1/2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from . import kernels

ZERO_REL = 1e-15
ROUTE_TOL = 1e-12


@dataclass(frozen=True)
class Atom:
    coeff: complex
    ypow: float
    alpha: complex = 0j
    beta: complex = 0j

    @property
    def key(self):
        a, b = complex(self.alpha), complex(self.beta)
        return (float(self.ypow), a.real, a.imag, b.real, b.imag)


def _normalize(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    merged: dict[tuple, list] = {}
    for at in atoms:
        c = complex(at.coeff)
        if c == 0:
            continue
        slot = merged.get(at.key)
        if slot is None:
            merged[at.key] = [c, abs(c), at]
        else:
            slot[0] += c
            slot[1] = max(slot[1], abs(c))
    out = []
    for key in sorted(merged):
        c, biggest, at = merged[key]
        # drop only what cancelled down to rounding noise
        if c == 0 or abs(c) <= ZERO_REL * biggest:
            continue
        out.append(Atom(c, float(at.ypow), complex(at.alpha), complex(at.beta)))
    return tuple(out)


@dataclass(frozen=True)
class TermSum:
    """Finite sum of atoms transforming (by declaration) with an even weight."""

    atoms: tuple[Atom, ...] = ()
    weight: int = 0
    _normal: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.weight) != self.weight or int(self.weight) % 2:
            raise ValueError(f"weight must be an even integer, got {self.weight}")
        object.__setattr__(self, "weight", int(self.weight))
        if not self._normal:
            object.__setattr__(self, "atoms", _normalize(self.atoms))
            object.__setattr__(self, "_normal", True)

    @classmethod
    def of(cls, *atoms, weight=0) -> "TermSum":
        """Build from ``(coeff, ypow, alpha, beta)`` tuples (alpha, beta optional)."""
        return cls(tuple(a if isinstance(a, Atom) else Atom(*a) for a in atoms), weight)

    @classmethod
    def constant(cls, c, weight=0) -> "TermSum":
        return cls((Atom(c, 0.0),), weight)

    def __len__(self):
        return len(self.atoms)

    def __bool__(self):
        return bool(self.atoms)

    def with_weight(self, weight: int) -> "TermSum":
        return TermSum(self.atoms, weight, _normal=True)

    @cached_property
    def arrays(self):
        n = len(self.atoms)
        coeff = np.fromiter((a.coeff for a in self.atoms), np.complex128, n)
        ypow = np.fromiter((a.ypow for a in self.atoms), np.float64, n)
        alpha = np.fromiter((a.alpha for a in self.atoms), np.complex128, n)
        beta = np.fromiter((a.beta for a in self.atoms), np.complex128, n)
        return coeff, ypow, alpha, beta

    def __call__(self, z):
        return evaluate(self, z)

    # algebra
    def __add__(self, other: "TermSum") -> "TermSum":
        if self.weight != other.weight:
            raise ValueError(f"adding weights {self.weight} and {other.weight}")
        return TermSum(self.atoms + other.atoms, self.weight)

    def __sub__(self, other):
        return self + scale(other, -1)

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1)

    # operators
    def L(self):
        return lower(self)

    def R(self):
        return raise_(self)

    def xi(self):
        return xi(self)

    def laplacian(self):
        return laplacian(self)

    def bol(self, n):
        return bol(self, n)

    @property
    def max_ypow(self) -> float:
        return max((a.ypow for a in self.atoms), default=-math.inf)

    def is_holomorphic(self) -> bool:
        return all(a.ypow == 0 and a.beta == 0 for a in self.atoms)

    def is_translation_invariant(self) -> bool:
        """True iff every atom is unchanged by ``z -> z + 1``."""
        for a in self.atoms:
            s = complex(a.alpha) + complex(a.beta)
            if abs(s.real) > 1e-12:
                return False
            k = s.imag / (2 * math.pi)
            if abs(k - round(k)) > 1e-9:
                return False
        return True


def evaluate(F: TermSum, z):
    """Value of ``F`` at ``z`` (scalar or array, all with ``Im z > 0``)."""
    zz = np.asarray(z, dtype=np.complex128)
    if np.any(zz.imag <= 0):
        raise ValueError("evaluation point must lie in the upper half-plane")
    if not F.atoms:
        out = np.zeros(zz.shape, np.complex128)
    else:
        out = kernels.eval_atoms(*F.arrays, zz.ravel()).reshape(zz.shape)
    return complex(out) if np.ndim(z) == 0 else out


# -- building blocks ------------------------------------------------------

def dz(F: TermSum) -> TermSum:
    out = []
    for at in F.atoms:
        if at.ypow != 0:
            out.append(Atom(at.coeff * at.ypow / 2j, at.ypow - 1, at.alpha, at.beta))
        if at.alpha != 0:
            out.append(Atom(at.coeff * at.alpha, at.ypow, at.alpha, at.beta))
    return TermSum(tuple(out), F.weight)


def dzbar(F: TermSum) -> TermSum:
    out = []
    for at in F.atoms:
        if at.ypow != 0:
            out.append(Atom(at.coeff * at.ypow * 0.5j, at.ypow - 1, at.alpha, at.beta))
        if at.beta != 0:
            out.append(Atom(at.coeff * at.beta, at.ypow, at.alpha, at.beta))
    return TermSum(tuple(out), F.weight)


def ymul(F: TermSum, p: float, weight: int | None = None) -> TermSum:
    """Multiply by ``y**p``."""
    w = F.weight if weight is None else weight
    return TermSum(tuple(Atom(a.coeff, a.ypow + p, a.alpha, a.beta) for a in F.atoms), w)


def scale(F: TermSum, c) -> TermSum:
    c = complex(c)
    return TermSum(tuple(Atom(a.coeff * c, a.ypow, a.alpha, a.beta) for a in F.atoms), F.weight)


def conjugate(F: TermSum, weight: int | None = None) -> TermSum:
    """Pointwise complex conjugate; ``conj(e^(alpha z)) = e^(conj(alpha) zbar)``."""
    w = F.weight if weight is None else weight
    return TermSum(
        tuple(Atom(complex(a.coeff).conjugate(), a.ypow, complex(a.beta).conjugate(),
                   complex(a.alpha).conjugate()) for a in F.atoms),
        w,
    )


def multiply(F: TermSum, G: TermSum, weight: int | None = None) -> TermSum:
    """Pointwise product; weight defaults to the sum of the weights."""
    w = F.weight + G.weight if weight is None else weight
    out = [
        Atom(a.coeff * b.coeff, a.ypow + b.ypow, a.alpha + b.alpha, a.beta + b.beta)
        for a in F.atoms
        for b in G.atoms
    ]
    return TermSum(tuple(out), w)


# -- Maass operators ------------------------------------------------------

def lower(F: TermSum) -> TermSum:
    """``L = -2i y^2 d/dzbar``: weight w -> w - 2."""
    return ymul(scale(dzbar(F), -2j), 2, F.weight - 2)


def raise_(F: TermSum) -> TermSum:
    """``R_w = 2i d/dz + w/y``: weight w -> w + 2."""
    G = scale(dz(F), 2j) + ymul(scale(F, F.weight), -1)
    return G.with_weight(F.weight + 2)


def xi(F: TermSum) -> TermSum:
    """``xi_w F = 2i y^w conj(dF/dzbar)``: antilinear, weight w -> 2 - w."""
    G = conjugate(dzbar(F))
    return ymul(scale(G, 2j), F.weight, 2 - F.weight)


def raise_n(F: TermSum, n: int) -> TermSum:
    for _ in range(n):
        F = raise_(F)
    return F


def lower_n(F: TermSum, n: int) -> TermSum:
    for _ in range(n):
        F = lower(F)
    return F


def coefficient_mismatch(A: TermSum, B: TermSum) -> float:
    """Largest coefficient mismatch between two sums, relative per key.

    A key present in only one sum is measured against the largest
    coefficient overall (it can be a cancellation residue).
    """
    da = {a.key: complex(a.coeff) for a in A.atoms}
    db = {b.key: complex(b.coeff) for b in B.atoms}
    top = max([abs(c) for c in da.values()] + [abs(c) for c in db.values()] + [0.0])
    worst = 0.0
    for k in set(da) | set(db):
        ca, cb = da.get(k, 0j), db.get(k, 0j)
        denom = max(abs(ca), abs(cb)) if ca and cb else top
        if denom > 0:
            worst = max(worst, abs(ca - cb) / denom)
    return worst


def laplacian(F: TermSum, check: bool = True) -> TermSum:
    """Weight-w hyperbolic Laplacian ``-(L_{w+2} R_w + w)``.

    With ``check`` the second route ``-R_{w-2} L_w`` is computed too and the
    two must agree coefficientwise.
    """
    w = F.weight
    A = scale(lower(raise_(F)) + scale(F, w), -1)
    if check:
        B = scale(raise_(lower(F)), -1)
        bad = coefficient_mismatch(A, B)
        if bad > ROUTE_TOL:
            raise ArithmeticError(f"Laplacian routes disagree (relative {bad:.3e})")
    return A


def bol(F: TermSum, n: int) -> TermSum:
    """``n``-fold ``(1/(2 pi i)) d/dz``; the result has weight ``w + 2n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    G = F
    for _ in range(n):
        G = scale(dz(G), 1 / (2j * math.pi))
    return G.with_weight(F.weight + 2 * n)


# -- finite-difference oracle ----------------------------------------------

def fd_check(F: TermSum, z: complex, h: float = 1e-5) -> tuple[float, float]:
    """Compare symbolic d/dz, d/dzbar with central differences at ``z``.

    Returns the deviations for (d/dz, d/dzbar), each divided by the larger
    of the two symbolic derivative magnitudes (absolute if both vanish).
    """
    z = complex(z)
    if z.imag <= h:
        raise ValueError("need Im z > h")
    fx = (evaluate(F, z + h) - evaluate(F, z - h)) / (2 * h)
    fy = (evaluate(F, z + 1j * h) - evaluate(F, z - 1j * h)) / (2 * h)
    num_dz = (fx - 1j * fy) / 2
    num_dzb = (fx + 1j * fy) / 2
    sym_dz = evaluate(dz(F), z)
    sym_dzb = evaluate(dzbar(F), z)
    denom = max(abs(sym_dz), abs(sym_dzb))
    if denom == 0:
        denom = 1.0
    return abs(num_dz - sym_dz) / denom, abs(num_dzb - sym_dzb) / denom
