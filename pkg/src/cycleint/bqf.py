"""Integral indefinite binary quadratic forms.

Forms are triples ``[a, b, c]`` standing for ``aX^2 + bXY + cY^2``.  All
arithmetic on coefficients and matrices is exact (Python ints); only the
geodesic frame carries floating point data.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

Matrix = tuple[tuple[int, int], tuple[int, int]]

IDENTITY: Matrix = ((1, 0), (0, 1))
S: Matrix = ((0, -1), (1, 0))
T: Matrix = ((1, 1), (0, 1))
T_INV: Matrix = ((1, -1), (0, 1))


class InadmissibleFormError(ValueError):
    """Raised for forms or discriminants that do not give a closed geodesic."""


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise TypeError(f"coefficient {name}={v!r} is not an integer")
            object.__setattr__(self, name, int(v))

    def __iter__(self) -> Iterator[int]:
        yield self.a
        yield self.b
        yield self.c

    def __str__(self):
        return f"[{self.a},{self.b},{self.c}]"

    @classmethod
    def parse(cls, text: str) -> "QuadForm":
        parts = [p.strip() for p in text.strip().strip("[]").split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated integers, got {text!r}")
        return cls(*(int(p) for p in parts))

    @property
    def disc(self) -> int:
        return discriminant(self)

    def __call__(self, x, y):
        return self.a * x * x + self.b * x * y + self.c * y * y


def discriminant(Q: QuadForm) -> int:
    return Q.b * Q.b - 4 * Q.a * Q.c


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def is_admissible(Q: QuadForm) -> bool:
    """True iff the discriminant is positive and not a perfect square."""
    D = discriminant(Q)
    return D > 0 and not is_square(D)


def check_discriminant(D: int) -> None:
    if D <= 0:
        raise InadmissibleFormError(f"non-positive discriminant {D}")
    if is_square(D):
        raise InadmissibleFormError(f"square discriminant {D}")


def matmul(M: Matrix, N: Matrix) -> Matrix:
    (a, b), (c, d) = M
    (e, f), (g, h) = N
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def det(M: Matrix) -> int:
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def inverse(M: Matrix) -> Matrix:
    """Inverse of a unimodular integer matrix."""
    if det(M) != 1:
        raise ValueError(f"matrix {M} is not in SL2(Z)")
    (a, b), (c, d) = M
    return ((d, -b), (-c, a))


def as_matrix(M) -> Matrix:
    (a, b), (c, d) = M
    return ((int(a), int(b)), (int(c), int(d)))


def act(Q: QuadForm, M) -> QuadForm:
    """Right action ``(Q o M)(X, Y) = Q(aX + bY, cX + dY)`` for ``M = (a b; c d)``."""
    M = as_matrix(M)
    if det(M) != 1:
        raise ValueError(f"matrix {M} is not unimodular (det {det(M)})")
    (al, be), (ga, de) = M
    a, b, c = Q
    return QuadForm(
        a * al * al + b * al * ga + c * ga * ga,
        2 * a * al * be + b * (al * de + be * ga) + 2 * c * ga * de,
        a * be * be + b * be * de + c * de * de,
    )


def normalize_positive_a(Q: QuadForm, max_depth: int = 24) -> tuple[QuadForm, Matrix]:
    """Find an equivalent form with ``a > 0``.

    Breadth-first search over words in T, T^-1, S (in that order), so the
    shortest word wins and T is preferred on ties.  Returns the new form and
    the matrix ``M`` with ``act(Q, M)`` equal to it.
    """
    if not is_admissible(Q):
        raise InadmissibleFormError(f"form {Q} has discriminant {discriminant(Q)}")
    if Q.a > 0:
        return Q, IDENTITY
    seen = {Q}
    queue = deque([(Q, IDENTITY, 0)])
    while queue:
        form, M, depth = queue.popleft()
        if depth >= max_depth:
            continue
        for g in (T, T_INV, S):
            new = act(form, g)
            if new in seen:
                continue
            N = matmul(M, g)
            if new.a > 0:
                return new, N
            seen.add(new)
            queue.append((new, N, depth + 1))
    raise RuntimeError(f"no form with a > 0 found for {Q} within {max_depth} steps")


# -- reduction theory ------------------------------------------------------

def is_reduced(Q: QuadForm) -> bool:
    """Gauss reduction: ``|sqrt(D) - 2|a|| < b < sqrt(D)``."""
    D = discriminant(Q)
    b, a2 = Q.b, 2 * abs(Q.a)
    if b <= 0 or b * b >= D:
        return False
    # sqrt(D) - b < 2|a| < sqrt(D) + b, done in integers
    return _lt_sqrt_minus(b, a2, D) and _lt_sqrt_plus(a2, b, D)


def _lt_sqrt_minus(b: int, a2: int, D: int) -> bool:
    # sqrt(D) - b < a2  <=>  sqrt(D) < a2 + b
    s = a2 + b
    return s > 0 and s * s > D


def _lt_sqrt_plus(a2: int, b: int, D: int) -> bool:
    # a2 < sqrt(D) + b  <=>  a2 - b < sqrt(D)
    t = a2 - b
    return t < 0 or t * t < D


def _reduce_b(b: int, c: int, D: int) -> int:
    """The b' = b (mod 2|c|) with sqrt(D) - 2|c| < b' < sqrt(D)."""
    m = 2 * abs(c)
    r = math.isqrt(D)  # floor(sqrt(D)); D is not a square
    # largest b' <= r with b' = b mod m
    return r - ((r - b) % m)


def rho(Q: QuadForm) -> tuple[QuadForm, Matrix]:
    """One step of the reduction operator: ``(a, b, c) -> (c, b', a')``."""
    D = discriminant(Q)
    b_new = _reduce_b(-Q.b, Q.c, D)
    t = (b_new + Q.b) // (2 * Q.c)
    M = ((0, -1), (1, t))
    new = act(Q, M)
    assert new.b == b_new
    return new, M


def reduce_form(Q: QuadForm, max_steps: int = 10_000) -> tuple[QuadForm, Matrix]:
    """Apply ``rho`` until the form is reduced; returns form and transforming matrix."""
    if not is_admissible(Q):
        raise InadmissibleFormError(f"form {Q} has discriminant {discriminant(Q)}")
    M = IDENTITY
    for _ in range(max_steps):
        if is_reduced(Q):
            return Q, M
        if Q.c == 0:
            raise RuntimeError("degenerate form during reduction")
        Q, step = rho(Q)
        M = matmul(M, step)
    raise RuntimeError(f"reduction of {Q} did not terminate")


def reduced_forms(D: int) -> list[QuadForm]:
    """All Gauss-reduced forms of discriminant ``D`` (imprimitive ones included)."""
    check_discriminant(D)
    r = math.isqrt(D)
    out = []
    for b in range(1, r + 1):
        if (b * b - D) % 4:
            continue
        ac = (b * b - D) // 4  # negative
        for a in range(1, -ac + 1):
            if ac % a:
                continue
            for sa in (a, -a):
                Q = QuadForm(sa, b, ac // sa)
                if is_reduced(Q):
                    out.append(Q)
    return sorted(out)


def cycle_of(Q: QuadForm) -> list[QuadForm]:
    """The rho-cycle through a reduced form, starting at ``Q``."""
    cyc = [Q]
    nxt, _ = rho(Q)
    while nxt != Q:
        cyc.append(nxt)
        nxt, _ = rho(nxt)
    return cyc


def enumerate_classes(D: int) -> list[QuadForm]:
    """One representative (with a > 0) for each SL2(Z)-class of discriminant ``D``.

    Each representative is the lexicographically smallest form with positive
    ``a`` in its reduction cycle; the list is sorted.
    """
    check_discriminant(D)
    remaining = set(reduced_forms(D))
    reps = []
    while remaining:
        start = min(remaining)
        cyc = cycle_of(start)
        remaining.difference_update(cyc)
        reps.append(min(q for q in cyc if q.a > 0))
    return sorted(reps)


# -- Pell equation ---------------------------------------------------------

def principal_form(D: int) -> QuadForm:
    """Reduced form ``[1, b, (b^2 - D)/4]`` of discriminant ``D`` (D = 0, 1 mod 4)."""
    r = math.isqrt(D)
    b = r if (r - D) % 2 == 0 else r - 1
    return QuadForm(1, b, (b * b - D) // 4)


def pell_fundamental(D: int) -> tuple[int, int]:
    """Minimal positive solution ``(t, u)`` of ``t^2 - D u^2 = 4``.

    Computed from the automorph obtained by running once around the
    reduction cycle of the principal form.  For ``D = 2, 3 (mod 4)`` every
    solution has both entries even and the problem is moved to ``4D``.
    """
    D = int(D)
    check_discriminant(D)
    if D % 4 in (2, 3):
        t, u = pell_fundamental(4 * D)
        return t, 2 * u
    P = principal_form(D)
    M = IDENTITY
    Q = P
    while True:
        Q, step = rho(Q)
        M = matmul(M, step)
        if Q == P:
            break
    (al, _), (ga, de) = M
    t, u = al + de, ga  # a = 1 for the principal form
    if t < 0:
        t, u = -t, -u
    return t, abs(u)


def pell_bruteforce(D: int, limit: int = 10**6) -> tuple[int, int] | None:
    """Smallest ``u <= limit`` with ``D u^2 + 4`` a square; ``None`` if none."""
    check_discriminant(D)
    for u in range(1, limit + 1):
        t2 = D * u * u + 4
        t = math.isqrt(t2)
        if t * t == t2:
            return t, u
    return None


# -- geodesic frame --------------------------------------------------------

@dataclass(frozen=True)
class GeodesicFrame:
    form: QuadForm
    w: float
    w_prime: float
    sigma: np.ndarray
    eps: float
    automorph: Matrix
    pell: tuple[int, int]

    @property
    def D(self) -> int:
        return discriminant(self.form)

    @property
    def length(self) -> float:
        """Hyperbolic length ``2 log eps`` of the closed geodesic."""
        return 2.0 * math.log(self.eps)


def automorph(Q: QuadForm, pell: tuple[int, int]) -> Matrix:
    t, u = pell
    a, b, c = Q
    return (((t - b * u) // 2, -c * u), (a * u, (t + b * u) // 2))


def frame(Q: QuadForm) -> GeodesicFrame:
    """Endpoints, scaling matrix and fundamental automorph of ``Q`` (needs a > 0)."""
    if not is_admissible(Q):
        raise InadmissibleFormError(f"form {Q} has discriminant {discriminant(Q)}")
    if Q.a <= 0:
        raise ValueError(f"frame needs a > 0, got {Q}; use normalize_positive_a")
    D = discriminant(Q)
    rD = math.sqrt(D)
    w = (-Q.b - rD) / (2 * Q.a)
    wp = (-Q.b + rD) / (2 * Q.a)
    scale = math.sqrt(Q.a) / D ** 0.25
    sigma = scale * np.array([[wp, w], [1.0, 1.0]])
    t, u = pell_fundamental(D)
    A = automorph(Q, (t, u))
    assert det(A) == 1 and act(Q, A) == Q
    eps = (t + u * rD) / 2
    return GeodesicFrame(Q, w, wp, sigma, eps, A, (t, u))
