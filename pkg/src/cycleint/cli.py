"""Command-line interface: ``cycleint {integral,verify,classes}``.

Exit codes: 0 success, 1 identity failure, 2 invalid input, 3 quadrature
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

from . import forms, kernels
from .bqf import (InadmissibleFormError, QuadForm, check_discriminant, discriminant,
                  enumerate_classes, frame)
from .cycle import QuadratureError, cycle_integral
from .forms import DivergentFamilyError
from .verify import ROW_KEYS, SuiteConfig, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

M_CAP = 400
N_CAP = 1600
FAMILIES = ("const", "productE4E6", "E2star", "eisenstein", "harmonic", "E4", "E6", "Delta")
OPS = ("none", "L", "R", "xi", "laplacian", "bol")


class UsageError(ValueError):
    pass


def _error(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_INPUT


def parse_form(text: str) -> QuadForm:
    try:
        return QuadForm.parse(text)
    except ValueError as exc:
        raise UsageError(f"bad form {text!r}: expected a,b,c") from exc


def resolve_form(form: str | None, D: int | None) -> QuadForm:
    if form is not None:
        Q = parse_form(form)
        check_discriminant(discriminant(Q))
        return Q
    if D is None:
        raise UsageError("give --form or --D")
    check_discriminant(D)
    classes = enumerate_classes(D)
    if not classes:
        raise UsageError(f"no forms of discriminant {D}")
    return classes[0]


def build_family(name: str, M: int = 40, N: int = 100, s: float | None = None,
                 k: int | None = None) -> forms.ModularObject:
    if not 1 <= M <= M_CAP:
        raise UsageError(f"--M must be in [1, {M_CAP}]")
    if not 1 <= N <= N_CAP:
        raise UsageError(f"--N must be in [1, {N_CAP}]")
    if name == "const":
        return forms.constant(1.0)
    if name == "productE4E6":
        return forms.product_form(forms.standard_qexp("E4", M), forms.standard_qexp("E6", M))
    if name == "E2star":
        return forms.e2_star(M)
    if name == "eisenstein":
        return forms.real_analytic_eisenstein(1.5 if s is None else s, N)
    if name == "harmonic":
        return forms.harmonic_eisenstein(2 if k is None else k, N)
    if name in ("E4", "E6", "Delta"):
        return forms.qexp_object(name, M)
    raise UsageError(f"unknown family {name!r}")


# -- integral ---------------------------------------------------------------

def cmd_integral(args) -> int:
    try:
        Q = resolve_form(args.form, args.D)
        F = build_family(args.family, args.M, args.N, args.s, args.k)
        if args.op != "none":
            n = args.n
            if args.op == "bol" and n is None:
                n = 1 - F.weight
            F = forms.apply_operator(F, args.op, n)
        if not args.tol > 0:
            raise UsageError("--tol must be positive")
    except (UsageError, InadmissibleFormError, DivergentFamilyError, ValueError) as exc:
        return _error(str(exc))
    try:
        res = cycle_integral(F, Q, args.tol)
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        return _error(str(exc))
    v = res.value
    print(f"form      {res.form}  (input {Q}, D = {discriminant(Q)})")
    print(f"object    {F.name}  weight {F.weight}")
    print(f"C(F, Q)   {v.real:.16g} {'+' if v.imag >= 0 else '-'} {abs(v.imag):.16g}i")
    print(f"error     {res.abs_error:.3e}  ({res.panels} panels, eps^2 = {res.epsilon_sq:.12g})")
    return EXIT_OK


# -- verify -------------------------------------------------------------------

CONFIG_KEYS = {"suite", "out", "format", "tol", "quad_tol", "threads", "forms", "M", "N"}


def read_config(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (p.strip() for p in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _parse_forms(text: str) -> list[QuadForm]:
    parts = [p for p in text.replace(" ", "").split(";") if p]
    return [parse_form(p) for p in parts]


def suite_config(args) -> tuple[SuiteConfig, str | None, str]:
    merged = read_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    try:
        tol = None if merged.get("tol") is None else float(merged["tol"])
        quad_tol = float(merged.get("quad_tol", 1e-12))
        threads = int(merged.get("threads", 1))
        M = int(merged.get("M", 40))
        N = int(merged.get("N", 100))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad numeric setting: {exc}") from exc
    if tol is not None and not tol > 0:
        raise UsageError("tolerances must be positive")
    if not quad_tol > 0:
        raise UsageError("tolerances must be positive")
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    if not (1 <= M <= M_CAP and 1 <= N <= N_CAP):
        raise UsageError(f"truncations must satisfy 1 <= M <= {M_CAP}, 1 <= N <= {N_CAP}")
    fmt = merged.get("format", "json")
    if fmt not in ("json", "csv"):
        raise UsageError(f"unknown format {fmt!r}")
    forms_ = merged.get("forms")
    cfg = SuiteConfig(
        suite=merged.get("suite", "default"),
        tol=tol,
        quad_tol=quad_tol,
        forms=_parse_forms(forms_) if forms_ else None,
        M=M,
        N=N,
        threads=threads,
    )
    return cfg, merged.get("out"), fmt


def render_json(rows) -> str:
    return json.dumps(rows, indent=2, allow_nan=False) + "\n"


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def render_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ROW_KEYS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(v) for k, v in row.items()})
    return buf.getvalue()


def cmd_verify(args) -> int:
    try:
        cfg, out, fmt = suite_config(args)
        t0 = time.perf_counter()
        reports = run_suite(cfg)
    except (UsageError, OSError, ValueError) as exc:
        return _error(str(exc))
    total = time.perf_counter() - t0
    rows = [r.row() for r in reports]
    text = render_json(rows) if fmt == "json" else render_csv(rows)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        meta = {
            "backend": kernels.backend_name(),
            "wall_time": total,
            "reports": [{"identity": r.identity, "form": r.form, "wall_time": r.wall_time,
                         "error": r.error} for r in reports],
        }
        with open(out + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
    else:
        sys.stdout.write(text)
    n_pass = sum(r.passed for r in reports)
    print(f"{n_pass}/{len(reports)} identities passed in {total:.1f}s", file=sys.stderr)
    for r in reports:
        if r.error:
            print(f"  {r.identity} {r.family} {r.form}: {r.error}", file=sys.stderr)
    kinds = {r.error_kind for r in reports}
    if "input" in kinds:
        return EXIT_INPUT
    if "numeric" in kinds:
        return EXIT_NUMERIC
    return EXIT_OK if n_pass == len(reports) else EXIT_FAIL


# -- classes -------------------------------------------------------------------

def cmd_classes(args) -> int:
    try:
        check_discriminant(args.D)
    except InadmissibleFormError as exc:
        return _error(str(exc))
    reps = enumerate_classes(args.D)
    print(f"D = {args.D}: {len(reps)} class{'es' if len(reps) != 1 else ''}")
    for Q in reps:
        fr = frame(Q)
        t, u = fr.pell
        eps_txt = f"({t}+{u}*sqrt({args.D}))/2"
        print(f"{str(Q):16s} eps = {eps_txt} = {fr.eps:.12g}   2 log eps = {2 * math.log(fr.eps):.12g}")
    return EXIT_OK


# -- entry point ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cycleint", description="Cycle integrals along closed geodesics.")
    p.add_argument("--backend", choices=kernels.available_backends(),
                   help="kernel backend (default: compiled if available)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pi = sub.add_parser("integral", help="compute one cycle integral")
    pi.add_argument("--form", help="quadratic form a,b,c")
    pi.add_argument("--D", type=int, help="discriminant (uses the first class representative)")
    pi.add_argument("--family", choices=FAMILIES, default="const")
    pi.add_argument("--op", choices=OPS, default="none", help="operator applied before integrating")
    pi.add_argument("--n", type=int, help="order for --op bol (default 1 - weight)")
    pi.add_argument("--s", type=float, help="spectral parameter for eisenstein")
    pi.add_argument("--k", type=int, help="k for the harmonic family (weight 2 - 2k)")
    pi.add_argument("--M", type=int, default=40, help="q-expansion terms")
    pi.add_argument("--N", type=int, default=100, help="lattice truncation")
    pi.add_argument("--tol", type=float, default=1e-12, help="quadrature tolerance")
    pi.set_defaults(func=cmd_integral)

    pv = sub.add_parser("verify", help="run an identity suite")
    pv.add_argument("--suite", help="suite name ('default'); empty string for none")
    pv.add_argument("--out", help="report path (stdout if omitted)")
    pv.add_argument("--format", choices=("json", "csv"))
    pv.add_argument("--tol", type=float, help="override every identity tolerance")
    pv.add_argument("--quad-tol", dest="quad_tol", type=float)
    pv.add_argument("--threads", type=int)
    pv.add_argument("--forms", help="semicolon-separated forms replacing the suite's geodesics")
    pv.add_argument("--M", type=int)
    pv.add_argument("--N", type=int)
    pv.add_argument("--config", help="key=value file; command-line flags win")
    pv.set_defaults(func=cmd_verify)

    pc = sub.add_parser("classes", help="list class representatives of discriminant D")
    pc.add_argument("--D", type=int, required=True)
    pc.set_defaults(func=cmd_classes)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.backend:
        kernels.use_backend(args.backend)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
