"""Numerical checks of the cycle-integral identities.

Each check evaluates both sides with :func:`cycleint.cycle.cycle_integral`
and returns :class:`IdentityReport` objects.  :func:`run_suite` runs a grid
of checks and never raises for individual failures: bad inputs and
quadrature failures become reports with ``passed = False`` and an error
message.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from . import forms
from .bqf import InadmissibleFormError, QuadForm, check_discriminant, discriminant, enumerate_classes
from .cycle import QuadratureError, cycle_integral
from .forms import DivergentFamilyError, ModularObject

REL_FLOOR = 1e-30
HARMONIC_TOL = 1e-8

# default identity tolerances, by how the family is evaluated
TOL_EXACT = 1e-6      # atom sums and truncated q-expansions
TOL_RECURSION = 1e-5
TOL_LATTICE = 1e-4
TOL_BOL_PATHS = 1e-10

ROW_KEYS = ("identity", "family", "form", "D", "lhs_re", "lhs_im", "rhs_re", "rhs_im",
            "abs_residual", "rel_residual", "tol", "pass")


@dataclass
class IdentityReport:
    identity: str
    family: str
    form: str
    D: int | None
    lhs: complex | None
    rhs: complex | None
    abs_residual: float | None
    rel_residual: float | None
    tol: float
    passed: bool
    wall_time: float = 0.0
    error: str | None = None
    error_kind: str | None = None  # "input" or "numeric"

    @classmethod
    def compare(cls, identity, family, Q, lhs, rhs, tol, wall_time=0.0):
        lhs, rhs = complex(lhs), complex(rhs)
        ab = abs(lhs - rhs)
        rel = ab / max(abs(lhs), abs(rhs), REL_FLOOR)
        return cls(identity, family, _form_str(Q), discriminant(Q), lhs, rhs, ab, rel,
                   float(tol), bool(rel <= tol), wall_time)

    @classmethod
    def failure(cls, identity, family, Q, tol, message, kind, wall_time=0.0):
        try:
            D = discriminant(Q)
        except Exception:
            D = None
        return cls(identity, family, _form_str(Q), D, None, None, None, None, float(tol),
                   False, wall_time, message, kind)

    def row(self) -> dict:
        """Serializable row with the fixed key set ``ROW_KEYS`` (no timing)."""
        def part(v, attr):
            return None if v is None else getattr(v, attr)

        return {
            "identity": self.identity,
            "family": self.family,
            "form": self.form,
            "D": self.D,
            "lhs_re": part(self.lhs, "real"),
            "lhs_im": part(self.lhs, "imag"),
            "rhs_re": part(self.rhs, "real"),
            "rhs_im": part(self.rhs, "imag"),
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
            "tol": self.tol,
            "pass": self.passed,
        }


def _form_str(Q) -> str:
    try:
        a, b, c = Q
        return f"[{a},{b},{c}]"
    except (TypeError, ValueError):
        return str(Q)


def _k_of(F: ModularObject) -> int:
    """``k`` for an object of weight ``2 - 2k``."""
    if F.weight % 2:
        raise ValueError("weight must be even")
    return (2 - F.weight) // 2


def _cycle(F, Q, quad_tol):
    return cycle_integral(F, Q, quad_tol).value


def _iterate(F, op, n):
    for _ in range(n):
        F = forms.apply_operator(F, op)
    return F


def require_harmonic(F: ModularObject) -> None:
    if F.eigenvalue is not None and abs(F.eigenvalue) != 0:
        raise ValueError(f"{F.name} has eigenvalue {F.eigenvalue}, not harmonic")
    res = forms.harmonicity_residual(F)
    if not res < HARMONIC_TOL:
        raise ValueError(f"{F.name} is not harmonic (Laplace residual {res:.2e})")


# -- individual identities ------------------------------------------------

def check_first_identity(F: ModularObject, Q: QuadForm, tol: float = TOL_EXACT,
                         family: str | None = None, quad_tol: float = 1e-12):
    """``C(L F) = C(R F) = conj C(xi F)``; returns the three pairwise reports."""
    fam = family or F.name
    t0 = time.perf_counter()
    cL = _cycle(forms.apply_operator(F, "L"), Q, quad_tol)
    cR = _cycle(forms.apply_operator(F, "R"), Q, quad_tol)
    cX = _cycle(forms.apply_operator(F, "xi"), Q, quad_tol).conjugate()
    dt = (time.perf_counter() - t0) / 3
    return [
        IdentityReport.compare("theorem:L=R", fam, Q, cL, cR, tol, dt),
        IdentityReport.compare("theorem:R=conj(xi)", fam, Q, cR, cX, tol, dt),
        IdentityReport.compare("theorem:L=conj(xi)", fam, Q, cL, cX, tol, dt),
    ]


def recursion_constant(k: int, ell: int, lam) -> complex:
    return (k + ell) * (k - ell - 1) - lam


def check_recursion(F: ModularObject, Q: QuadForm, ell: int, side: str,
                    tol: float = TOL_RECURSION, family: str | None = None,
                    quad_tol: float = 1e-12) -> IdentityReport:
    """Eigenform recursion for ``F`` of weight ``2 - 2k`` and eigenvalue ``lam``.

    R side (``ell <= k - 2``): ``C(R^(k-ell) F) = c C(R^(k-ell-2) F)``.
    L side (``ell <= -k``): ``C(L^(2-k-ell) F) = c C(L^(-k-ell) F)``.
    Here ``c = (k+ell)(k-ell-1) - lam``.
    """
    if F.eigenvalue is None:
        raise ValueError(f"{F.name} carries no eigenvalue")
    k = _k_of(F)
    if side == "R":
        if ell > k - 2:
            raise ValueError(f"R-side recursion needs ell <= k - 2 = {k - 2}, got {ell}")
        hi, lo, op = k - ell, k - ell - 2, "R"
    elif side == "L":
        if ell > -k:
            raise ValueError(f"L-side recursion needs ell <= -k = {-k}, got {ell}")
        hi, lo, op = 2 - k - ell, -k - ell, "L"
    else:
        raise ValueError(f"side must be 'R' or 'L', got {side!r}")
    t0 = time.perf_counter()
    low = _iterate(F, op, lo)
    high = _iterate(low, op, hi - lo)
    lhs = _cycle(high, Q, quad_tol)
    rhs = recursion_constant(k, ell, F.eigenvalue) * _cycle(low, Q, quad_tol)
    return IdentityReport.compare(f"recursion:{side}(l={ell})", family or F.name, Q, lhs, rhs,
                                  tol, time.perf_counter() - t0)


def corollary_constant(k: int, j: int) -> int:
    """Constant in front of ``conj C(xi F)``; R branch for ``k >= 1``, L branch otherwise."""
    f = math.factorial
    if k >= 1:
        if not 1 <= j <= k:
            raise ValueError(f"need 1 <= j <= k = {k}, got j = {j}")
        num = f(j - 1) * f(k - j) * f(2 * k - 2)
        den = f(k - 1) * f(2 * k - 2 * j)
    else:
        m = -k
        if not 0 <= j <= m:
            raise ValueError(f"need 0 <= j <= |k| = {m}, got j = {j}")
        num = f(2 * j) * f(m)
        den = f(j) * f(m - j)
    if num % den:
        raise ArithmeticError("non-integral constant")
    return num // den


def check_corollary(F: ModularObject, Q: QuadForm, j: int, tol: float = TOL_LATTICE,
                    family: str | None = None, quad_tol: float = 1e-12) -> IdentityReport:
    """``C(R^(2j-1) F)`` (``k >= 1``) or ``C(L^(2j+1) F)`` (``k <= 0``) against
    the constant times ``conj C(xi F)``, for harmonic ``F``."""
    k = _k_of(F)
    const = corollary_constant(k, j)
    require_harmonic(F)
    t0 = time.perf_counter()
    if k >= 1:
        name, G = f"corollary:R(j={j})", _iterate(F, "R", 2 * j - 1)
    else:
        name, G = f"corollary:L(j={j})", _iterate(F, "L", 2 * j + 1)
    lhs = _cycle(G, Q, quad_tol)
    rhs = const * _cycle(forms.apply_operator(F, "xi"), Q, quad_tol).conjugate()
    return IdentityReport.compare(name, family or F.name, Q, lhs, rhs, tol,
                                  time.perf_counter() - t0)


def bgk_constant(k: int) -> float:
    return -math.factorial(2 * k - 2) / (4 * math.pi) ** (2 * k - 1)


def check_bgk(F: ModularObject, Q: QuadForm, tol: float = TOL_LATTICE,
              family: str | None = None, quad_tol: float = 1e-12) -> IdentityReport:
    """``C(D^(2k-1) F) = -((2k-2)!/(4 pi)^(2k-1)) conj C(xi F)`` with ``D = (2 pi i)^-1 d/dz``."""
    k = _k_of(F)
    if k < 1:
        raise ValueError(f"needs k >= 1, got {k}")
    require_harmonic(F)
    t0 = time.perf_counter()
    lhs = _cycle(forms.apply_operator(F, "bol", 2 * k - 1), Q, quad_tol)
    rhs = bgk_constant(k) * _cycle(forms.apply_operator(F, "xi"), Q, quad_tol).conjugate()
    return IdentityReport.compare("bgk", family or F.name, Q, lhs, rhs, tol,
                                  time.perf_counter() - t0)


def check_bol_paths(F: ModularObject, Q: QuadForm, tol: float = TOL_BOL_PATHS,
                    family: str | None = None, quad_tol: float = 1e-12) -> IdentityReport:
    """``C(D^(1-w) F) = (-4 pi)^(w-1) C(R^(1-w) F)`` for weight ``w <= 0``."""
    n = 1 - F.weight
    if n < 1:
        raise ValueError("needs weight <= 0")
    t0 = time.perf_counter()
    lhs = _cycle(forms.apply_operator(F, "bol", n), Q, quad_tol)
    rhs = _cycle(_iterate(F, "R", n), Q, quad_tol) / (-4 * math.pi) ** n
    return IdentityReport.compare(f"bol:D^{n}=R^{n}", family or F.name, Q, lhs, rhs, tol,
                                  time.perf_counter() - t0)


# -- suites -----------------------------------------------------------------

@dataclass(frozen=True)
class Job:
    """One grid entry: ``run(F, Q, tol)`` returns a report or a list of reports."""
    identity: str
    family: str
    build: Callable[[], ModularObject]
    form: object
    tol: float
    run: Callable
    count: int = 1


@dataclass
class SuiteConfig:
    suite: str = "default"
    tol: float | None = None          # overrides every identity tolerance
    quad_tol: float = 1e-12
    forms: Sequence | None = None     # overrides the geodesics used
    M: int = 40
    N: int = 100
    threads: int = 1
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, cfg: Mapping) -> "SuiteConfig":
        known = {f for f in cls.__dataclass_fields__ if f != "extra"}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**dict(cfg))


def _principal(D: int) -> QuadForm:
    return enumerate_classes(D)[0]


def _lattice_family(builder, N, tol):
    def build():
        F = builder(N)
        ev = F.evaluator.calibrate(tol)
        return forms.ModularObject(ev, F.weight, F.eigenvalue, F.modular, F.name, F.meta)
    return build


def default_jobs(cfg: SuiteConfig) -> list[Job]:
    M, N = cfg.M, cfg.N
    E4, E6 = (lambda: forms.standard_qexp("E4", M)), (lambda: forms.standard_qexp("E6", M))

    def family_a():
        return forms.product_form(E4(), E6())

    def e2s():
        return forms.e2_star(M)

    def r_e2s():
        return forms.apply_operator(forms.e2_star(M), "R")

    eis = _lattice_family(lambda n: forms.real_analytic_eisenstein(1.5, n), N, 1e-8)
    harm = _lattice_family(lambda n: forms.harmonic_eisenstein(2, n), N, 1e-8)

    def first(F, Q, tol):
        return check_first_identity(F, Q, tol, quad_tol=cfg.quad_tol)

    def rec(ell, side):
        return lambda F, Q, tol: check_recursion(F, Q, ell, side, tol, quad_tol=cfg.quad_tol)

    def cor(j):
        return lambda F, Q, tol: check_corollary(F, Q, j, tol, quad_tol=cfg.quad_tol)

    def bgk(F, Q, tol):
        return check_bgk(F, Q, tol, quad_tol=cfg.quad_tol)

    def bolp(F, Q, tol):
        return check_bol_paths(F, Q, tol, quad_tol=cfg.quad_tol)

    fa_forms = list(cfg.forms) if cfg.forms else [_principal(D) for D in (5, 8, 13)]
    q8 = list(cfg.forms) if cfg.forms else [QuadForm(1, 0, -2)]
    q5 = list(cfg.forms) if cfg.forms else [QuadForm(1, 1, -1)]

    jobs = [Job("theorem", "productE4E6", family_a, Q, TOL_EXACT, first, 3) for Q in fa_forms]
    jobs += [Job("theorem", "E2star", e2s, Q, TOL_EXACT, first, 3) for Q in q8]
    for Q in q5:
        jobs.append(Job("recursion:R(l=-1)", "eisenstein(s=1.5)", eis, Q, TOL_RECURSION, rec(-1, "R")))
        jobs.append(Job("recursion:L(l=-1)", "eisenstein(s=1.5)", eis, Q, TOL_RECURSION, rec(-1, "L")))
    jobs += [Job("recursion:L(l=1)", "R(E2star)", r_e2s, Q, TOL_EXACT, rec(1, "L")) for Q in q8]
    for Q in q5:
        jobs.append(Job("corollary:R(j=1)", "harmonic(k=2)", harm, Q, TOL_LATTICE, cor(1)))
        jobs.append(Job("corollary:R(j=2)", "harmonic(k=2)", harm, Q, TOL_LATTICE, cor(2)))
        jobs.append(Job("bgk", "harmonic(k=2)", harm, Q, TOL_LATTICE, bgk))
        jobs.append(Job("bol:D^3=R^3", "harmonic(k=2)", harm, Q, TOL_BOL_PATHS, bolp))
    jobs += [Job("corollary:L(j=0)", "E2star", e2s, Q, TOL_EXACT, cor(0)) for Q in q8]
    return jobs


SUITES = {"default": default_jobs}


def _run_job(job: Job, cfg: SuiteConfig) -> list[IdentityReport]:
    tol = job.tol if cfg.tol is None else cfg.tol
    t0 = time.perf_counter()
    names = ([f"theorem:{s}" for s in ("L=R", "R=conj(xi)", "L=conj(xi)")]
             if job.count == 3 else [job.identity])

    def fail(msg, kind):
        dt = (time.perf_counter() - t0) / len(names)
        return [IdentityReport.failure(n, job.family, job.form, tol, msg, kind, dt) for n in names]

    try:
        Q = job.form if isinstance(job.form, QuadForm) else QuadForm(*job.form)
        check_discriminant(discriminant(Q))
    except (InadmissibleFormError, TypeError, ValueError) as exc:
        return fail(str(exc), "input")
    try:
        F = job.build()
        out = job.run(F, Q, tol)
    except QuadratureError as exc:
        return fail(str(exc), "numeric")
    except (DivergentFamilyError, InadmissibleFormError, ValueError) as exc:
        return fail(str(exc), "input")
    out = out if isinstance(out, list) else [out]
    for r in out:
        r.family = job.family
    return out


def run_suite(config=None) -> list[IdentityReport]:
    """Run a configured grid of checks; report order follows the grid.

    ``config`` is a :class:`SuiteConfig`, a mapping of its fields, or
    ``None`` for the default suite.  ``suite=""`` gives no reports.
    """
    if config is None:
        cfg = SuiteConfig()
    elif isinstance(config, SuiteConfig):
        cfg = config
    else:
        cfg = SuiteConfig.from_mapping(config)
    if not cfg.suite:
        return []
    if cfg.suite not in SUITES:
        raise ValueError(f"unknown suite {cfg.suite!r}")
    jobs = SUITES[cfg.suite](cfg)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(lambda j: _run_job(j, cfg), jobs))
    else:
        chunks = [_run_job(j, cfg) for j in jobs]
    return [r for chunk in chunks for r in chunk]


def all_passed(reports: Sequence[IdentityReport]) -> bool:
    return all(r.passed for r in reports)
