"""Independent reference computations used by the tests.

Nothing here calls into the package's numerical code paths.
"""

import math
from collections import deque

import mpmath
import numpy as np
from scipy.special import kv


# -- real-analytic Eisenstein series via its Fourier expansion ---------------

def _xi(s):
    return float(mpmath.pi ** (-s) * mpmath.gamma(s) * mpmath.zeta(2 * s))


def sigma_power(n, nu):
    return sum(d ** nu for d in range(1, n + 1) if n % d == 0)


def eisenstein_fourier(z, s, nmax=60):
    """``E(z, s) = sum over coprime (c, d) mod +- of Im(gamma z)^s`` via K-Bessel."""
    x, y = z.real, z.imag
    xs = _xi(s)
    out = y**s + _xi(1 - s) / xs * y ** (1 - s) if s != 0.5 else y**s
    for n in range(1, nmax + 1):
        c = 4 * n ** (s - 0.5) * sigma_power(n, 1 - 2 * s) * math.sqrt(y) / xs
        out += c * kv(s - 0.5, 2 * math.pi * n * y) * math.cos(2 * math.pi * n * x)
    return out


# -- Pell equation -------------------------------------------------------------

def pell_search(D, cap):
    """Smallest ``u <= cap`` with ``D u^2 + 4`` a perfect square, by exhaustive search."""
    lo, step = 1, 1024
    while lo <= cap:
        u = np.arange(lo, min(cap, lo + step - 1) + 1, dtype=np.int64)
        v = D * u * u + 4
        r = np.sqrt(v.astype(np.float64)).astype(np.int64)
        ok = ((r - 1) ** 2 == v) | (r * r == v) | ((r + 1) ** 2 == v)
        hit = np.flatnonzero(ok)
        if hit.size:
            uu = int(u[hit[0]])
            return math.isqrt(D * uu * uu + 4), uu
        lo = int(u[-1]) + 1
        step *= 4
    return None


def _primes(n):
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [p for p in range(n + 1) if sieve[p]]


def pell_is_minimal(D, t, u):
    """Exact check that ``(t + u sqrt D)/2`` is the fundamental norm-one unit.

    Positive solutions of ``t^2 - D u^2 = 4`` are the powers of the
    fundamental one, so a smaller solution exists iff ``eps`` is a ``p``-th
    power of such a unit for some prime ``p``.  For each candidate ``p`` the
    root ``r = eps^(1/p)`` would satisfy ``r + 1/r = t'`` with ``t'`` an
    integer and ``t'^2 - 4 = D u'^2``; this is tested in exact integers.
    """
    if t * t - D * u * u != 4 or t <= 0 or u <= 0:
        return False
    digits = len(str(t)) + 40
    with mpmath.workdps(digits):
        eps = (mpmath.mpf(t) + u * mpmath.sqrt(D)) / 2
        # every unit > 1 here is at least (3 + sqrt 5)/2 > 2.6 or (1 + sqrt 5)/2 for D = 5
        pmax = int(mpmath.log(eps) / mpmath.log((1 + mpmath.sqrt(5)) / 2)) + 1
        for p in _primes(max(pmax, 2)):
            r = mpmath.root(eps, p)
            tp = int(mpmath.nint(r + 1 / r))
            num = tp * tp - 4
            if tp <= 0 or num <= 0 or num % D:
                continue
            up = math.isqrt(num // D)
            if up * up * D == num and up < u:
                return False
    return True


# -- class numbers by graph search -------------------------------------------

def class_count_bfs(D, bound=None):
    """Number of SL2(Z) classes among forms of discriminant ``D``.

    Explores the graph generated by S and T^{+-1} on forms with all
    coefficients bounded by ``bound``, starting from every form with
    ``|a|, |b|, |c| <= sqrt D`` ; components are counted by union-find over
    the small starting set.
    """
    bound = bound or 6 * D
    r = math.isqrt(D)
    starts = []
    for a in range(-r, r + 1):
        if a == 0:
            continue
        for b in range(-r, r + 1):
            num = b * b - D
            if num % (4 * a) == 0:
                c = num // (4 * a)
                if abs(c) <= r:
                    starts.append((a, b, c))
    parent = {s: s for s in starts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    start_set = set(starts)
    for s in starts:
        seen = {s}
        todo = deque([s])
        while todo:
            a, b, c = todo.popleft()
            for q in ((c, -b, a), (a, b + 2 * a, a + b + c), (a, b - 2 * a, a - b + c)):
                if q in seen or max(map(abs, q)) > bound:
                    continue
                seen.add(q)
                todo.append(q)
        for q in seen & start_set:
            parent[find(q)] = find(s)
    return len({find(s) for s in starts})


# -- slash operator with principal-branch complex powers -------------------------

def slash_oracle(f, weight, sigma, y):
    (a, b), (c, d) = sigma
    iy = 1j * y
    return complex(mpmath.power(mpmath.mpc(c * iy + d), -weight)) * f((a * iy + b) / (c * iy + d))
