import math

import numpy as np
import pytest

from cycleint import kernels
from cycleint.forms import (
    DivergentFamilyError, EisensteinObject, ModularObject, apply_operator, constant, coprime_pairs,
    e2_star, eval_reduced, evaluate, fd_reduce, fd_reduce_array, harmonic_eisenstein,
    harmonicity_residual, product_form, qexp_object, real_analytic_eisenstein, sigma,
    standard_qexp,
)
from cycleint.wirtinger import TermSum

from oracles import eisenstein_fourier

PTS = np.array([0.12 + 0.35j, -0.4 + 0.2j, 0.3 + 1.4j, 0.05 + 0.9j])


def test_divisor_sums():
    assert sigma(6, 1) == 12
    assert sigma(12, 3) == 1 + 8 + 27 + 64 + 216 + 1728
    assert sigma(1, 5) == 1


def test_qexp_coefficients():
    E4, E6, D = (standard_qexp(n, 10) for n in ("E4", "E6", "Delta"))
    assert E4.coeffs[:3] == (1, 240, 2160)
    assert E6.coeffs[:2] == (1, -504)
    assert D.coeffs[:5] == (0, 1, -24, 252, -1472)
    assert standard_qexp("E2", 3).coeffs == (1, -24, -72, -96)
    with pytest.raises(ValueError):
        standard_qexp("E8")
    with pytest.raises(ValueError):
        standard_qexp("E4", 0)


def test_delta_relation():
    M = 30
    E4, E6, D = (np.array(standard_qexp(n, M).coeffs, dtype=object) for n in ("E4", "E6", "Delta"))

    def mul(a, b):
        return np.array([sum(a[i] * b[n - i] for i in range(n + 1)) for n in range(M + 1)], dtype=object)

    assert list(mul(mul(E4, E4), E4) - mul(E6, E6)) == list(1728 * D)


def test_fd_reduce_example():
    z = 0.1 + 0.1j
    zr, g = fd_reduce(z)
    assert zr.imag >= math.sqrt(3) / 2 - 1e-12 and abs(zr.real) <= 0.5 and abs(zr) >= 1 - 1e-12
    (a, b), (c, d) = g
    assert a * d - b * c == 1
    assert abs((a * z + b) / (c * z + d) - zr) < 1e-12


def test_fd_reduce_array_round_trip():
    rng = np.random.default_rng(4)
    z = rng.uniform(-3, 3, 500) + 1j * 10 ** rng.uniform(-3, 0.5, 500)
    zr, a, b, c, d = fd_reduce_array(z)
    assert np.all(a * d - b * c == 1)
    assert np.all(np.abs(zr.real) <= 0.5 + 1e-12) and np.all(np.abs(zr) >= 1 - 1e-12)
    assert np.allclose((a * z + b) / (c * z + d), zr, rtol=1e-9, atol=1e-12)
    with pytest.raises(ValueError):
        fd_reduce_array(np.array([1 - 1j]))


def test_coprime_pairs():
    P = coprime_pairs(5)
    assert np.all(P[:, 0] * P[:, 3] - P[:, 1] * P[:, 2] == 1)
    cd = {(int(c), int(d)) for c, d in P[:, 2:]}
    assert len(cd) == len(P)
    expect = 1 + sum(1 for c in range(1, 6) for d in range(-5, 6) if math.gcd(c, d) == 1)
    assert len(P) == expect


@pytest.mark.parametrize("name", ["E4", "E6", "Delta"])
def test_holomorphic_automorphy(name):
    F = qexp_object(name, 60)
    z = 0.2 + 0.9j
    for (a, b), (c, d) in (((0, -1), (1, 0)), ((1, 1), (0, 1)), ((2, 1), (1, 1))):
        gz = (a * z + b) / (c * z + d)
        lhs = F.eval_direct(gz)
        rhs = (c * z + d) ** F.weight * F.eval_direct(z)
        assert abs(lhs - rhs) < 1e-10 * abs(rhs)


def test_reduced_matches_direct_where_series_converges():
    F = product_form(standard_qexp("E4", 60), standard_qexp("E6", 60))
    z = np.array([0.2 + 0.95j, -0.1 + 1.5j])
    assert np.allclose(eval_reduced(F, z), F.eval_direct(z), rtol=1e-11)


def test_eval_reduced_needs_modular():
    E2 = qexp_object("E2")
    assert not E2.modular
    with pytest.raises(ValueError):
        eval_reduced(E2, 1j)
    assert evaluate(E2, 1j) == E2.eval_direct(1j)


def test_e2_star_is_modular_and_harmonic():
    F = e2_star(60)
    z = 0.15 + 0.4j
    assert abs(F.eval_direct(z) - eval_reduced(F, z)) < 1e-9 * abs(F.eval_direct(z))
    assert harmonicity_residual(F) < 1e-10
    L = apply_operator(F, "L")
    assert L.weight == 0
    assert np.allclose(evaluate(L, PTS), 3 / math.pi)


@pytest.mark.parametrize("s", [1.5, 2.3])
def test_eisenstein_lattice_matches_fourier(s):
    F = real_analytic_eisenstein(s)
    for z in PTS:
        ref = eisenstein_fourier(z, s)
        assert abs(F(z) - ref) < 1e-12 * abs(ref)


def test_coset_sum_converges_slowly_towards_lattice():
    z = 0.3 + 1.1j
    ref = eisenstein_fourier(z, 1.5)
    errs = [abs(real_analytic_eisenstein(1.5, N, "coset").eval_direct(z) - ref) for N in (25, 50, 100)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] > 1e-4  # O(N^(2-e)) truncation, far from the lattice result


def test_eisenstein_automorphy_and_eigenvalue():
    F = real_analytic_eisenstein(1.5)
    z = 0.23 + 1.3j
    for (a, b), (c, d) in (((0, -1), (1, 0)), ((1, 2), (1, 3))):
        gz = (a * z + b) / (c * z + d)
        assert abs(F.eval_direct(gz) - F.eval_direct(z)) < 1e-12 * abs(F.eval_direct(z))
    assert F.eigenvalue == pytest.approx(-0.75)
    lap = apply_operator(F, "laplacian")
    assert np.allclose(evaluate(lap, PTS), -0.75 * evaluate(F, PTS), rtol=1e-12)


def test_harmonic_eisenstein_xi_is_e4():
    F = harmonic_eisenstein(2)
    assert F.weight == -2 and harmonicity_residual(F) == 0.0
    X = apply_operator(F, "xi")
    E4 = standard_qexp("E4", 60)
    z = np.array([0.1 + 1.0j, 0.4 + 2.0j])
    # xi y^3 = 3, so xi E_{-2} = 3 * (E4 normalized by its constant term)
    assert np.allclose(X.eval_direct(z), 3 * E4(z), rtol=1e-12)


def test_eigenvalue_shifts():
    F = real_analytic_eisenstein(1.5)
    assert apply_operator(F, "R").eigenvalue == pytest.approx(-0.75)
    assert apply_operator(F, "L").eigenvalue == pytest.approx(1.25)
    assert apply_operator(apply_operator(F, "R"), "R").eigenvalue == pytest.approx(1.25)
    G = apply_operator(e2_star(), "R")
    assert G.weight == 4 and G.eigenvalue == 2


def test_raised_objects_are_eigenfunctions():
    G = apply_operator(e2_star(40), "R")
    lap = apply_operator(G, "laplacian")
    assert np.allclose(lap.eval_direct(PTS), 2 * G.eval_direct(PTS), rtol=1e-10)


def test_bol_modularity_rules():
    F = harmonic_eisenstein(2)
    assert apply_operator(F, "bol", 3).modular
    with pytest.raises(ValueError):
        apply_operator(F, "bol", 2)
    G = product_form(standard_qexp("E4"), standard_qexp("E6"))
    assert not apply_operator(G, "bol", 1).modular
    with pytest.raises(ValueError):
        apply_operator(G, "nope")


def test_families_reject_divergent_parameters():
    with pytest.raises(DivergentFamilyError):
        real_analytic_eisenstein(1.0)
    with pytest.raises(DivergentFamilyError):
        harmonic_eisenstein(1)
    with pytest.raises(ValueError):
        product_form(standard_qexp("E4"), standard_qexp("E6"), j=2)
    with pytest.raises(ValueError):
        EisensteinObject(TermSum.of((1.0, 2.0, 1j), weight=0), 0)


def test_exponent_is_invariant_under_operators():
    F = harmonic_eisenstein(2)
    e = F.evaluator.exponent
    for op in ("R", "xi"):
        assert apply_operator(F, op).evaluator.exponent == e


def test_calibrate_doubles_until_stable():
    F = real_analytic_eisenstein(1.5, N=50).evaluator
    G = F.calibrate(1e-10)
    assert G.N >= 100 and G.N % 50 == 0


def test_constant_family():
    c = constant(2.5)
    assert c.weight == 0 and c.eigenvalue == 0
    assert np.allclose(evaluate(c, PTS), 2.5)
    assert isinstance(c, ModularObject)


@pytest.mark.skipif("compiled" not in kernels.available_backends(), reason="extension not built")
def test_backends_agree():
    F = product_form(standard_qexp("E4", 30), standard_qexp("E6", 30))
    E = real_analytic_eisenstein(2.3)
    H = harmonic_eisenstein(2, N=40, method="coset")
    out = {}
    for b in ("compiled", "python"):
        prev = kernels.use_backend(b)
        try:
            out[b] = [F.eval_direct(PTS), E.eval_direct(PTS), H.eval_direct(PTS)]
        finally:
            kernels.use_backend(prev)
    for x, y in zip(out["compiled"], out["python"]):
        # the summation orders differ, so compare against the scale of each case
        assert np.max(np.abs(x - y)) < 1e-12 * np.max(np.abs(y))
