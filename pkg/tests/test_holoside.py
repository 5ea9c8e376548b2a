import dataclasses
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nctorus.errors import HypothesisViolated, NotPositiveDefinite, UnsupportedT
from nctorus.holoside import (
    acal_theta,
    check_cocycle,
    check_compatibility,
    curvature,
    curvature_closed_form,
    deformation_matrix,
    holomorphicity_obstruction,
    integral_twist_example,
    integrality_matrix,
    make_bundle,
    make_complex_torus,
    make_connection,
    make_factor,
    make_iso,
    residue_classes,
    section_symbol,
    solve_hom,
    lattice_morphism,
    theta_section,
    verify_morphism,
    verify_section,
)
from nctorus.symcalc import Symbol, SymbolForm, form_residual, moyal_star, star_inverse, symbol_residual

from conftest import antisym, random_int_matrix, sym, twist_pair

I2 = 1j * np.eye(2)


def test_torus_validation():
    assert make_complex_torus(I2).n == 2
    with pytest.raises(NotPositiveDefinite):
        make_complex_torus(np.eye(2))
    T = np.array([[1j, 0.3], [0.3, 2j]])
    # Im T = diag(1, 2): characteristic polynomial (t - 1)(t - 2)
    assert make_complex_torus(T).n == 2


def test_kind_reductions(rng):
    A = random_int_matrix(rng, 2)
    theta = antisym(rng, 2)
    zero = np.zeros((2, 2))
    nct = make_factor("nc_twisted", A, theta, zero)
    nc = make_factor("nc", A, theta)
    for a, b in zip(nct.gens, nc.gens):
        assert symbol_residual(a, b) == 0.0
    nc0 = make_factor("nc", A, zero)
    com = make_factor("commutative", A)
    for a, b in zip(nc0.gens, com.gens):
        assert symbol_residual(a, b) == 0.0


def test_nc_generator_inverse(rng):
    A = random_int_matrix(rng, 2)
    theta = antisym(rng, 2)
    nc = make_factor("nc", A, theta)
    com = make_factor("commutative", A)
    for i in range(2):
        lx = np.zeros(4, dtype=complex)
        lx[:2] = 1j * np.pi * (A.T @ theta @ A)[i]
        expected = Symbol.exp_linear(lx) * star_inverse(com.gens[i], None)
        assert symbol_residual(star_inverse(nc.gens[i], theta), expected) < 1e-13


def test_twisted_inverse_pointwise():
    theta, acal = integral_twist_example(1)
    f = make_factor("nc_twisted", np.eye(2), theta, acal)
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(16, 4))
    for g in f.gens[2:]:
        prod = moyal_star(g, star_inverse(g, theta), theta).values(pts)
        assert np.max(np.abs(prod - 1)) < 1e-10


@pytest.mark.parametrize("m", [1, 2, 3])
def test_integral_twist_pairs(m):
    theta, acal = integral_twist_example(m)
    det = np.linalg.det(deformation_matrix(theta, acal))
    assert det == pytest.approx((-2 - 2 * np.sqrt(1 + m * m)) / m**2, abs=1e-10)
    assert np.allclose(integrality_matrix(acal, theta), [[0, m], [-m, 0]], atol=1e-9)
    rep = check_cocycle(make_factor("nc_twisted", np.eye(2), theta, acal))
    assert rep.passed


def test_acal_theta_alternate_form(rng):
    theta, acal = antisym(rng, 3), sym(rng, 3)
    alt = np.linalg.inv(np.eye(3) + acal @ theta / (2 * np.pi)) @ acal
    assert np.allclose(acal_theta(acal, theta), alt, atol=1e-12)


def test_cocycle_with_null_twist(rng):
    acal = np.diag([1.0, 0.0])
    theta = np.array([[0.0, 1.0], [-1.0, 0.0]])
    rep = check_cocycle(make_factor("nc_twisted", random_int_matrix(rng, 2), theta, acal))
    assert rep.passed and not np.any(np.round(rep.integrality_matrix, 12))


def test_cocycle_fails_off_integrality():
    theta, acal = integral_twist_example(1)
    rep = check_cocycle(make_factor("nc_twisted", np.eye(2), 1.01 * theta, acal))
    assert not rep.passed
    assert rep.max_residual > 1e-3


def test_commutative_connection():
    A = np.array([[2.0, 1.0], [1.0, 1.0]])
    p, q = np.array([0.1, 0.2]), np.array([0.3, -0.4])
    T = np.array([[1j, 0.2], [0.2, 1.5j]])
    omega = make_connection("commutative", A, p, q, T)
    rng = np.random.default_rng(1)
    for w in rng.normal(size=(5, 4)):
        x = w[:2]
        coeff = -2j * np.pi * (A @ x + p + T.T @ q)
        for b in range(2):
            assert omega.coefficient((b,)).value(w) == 0
            assert abs(omega.coefficient((2 + b,)).value(w) - coeff[b]) < 1e-12
    assert check_compatibility(make_factor("commutative", A), omega).passed


def test_nc_connection_adds_x_term(rng):
    A = random_int_matrix(rng, 2)
    theta = antisym(rng, 2)
    p, q = rng.normal(size=2), rng.normal(size=2)
    extra = np.zeros((4, 4), dtype=complex)
    extra[:2, :2] = 1j * np.pi * A.T @ theta @ A
    got = make_connection("nc_twisted", A, p, q, I2, theta, np.zeros((2, 2)))
    want = make_connection("commutative", A, p, q, I2) + SymbolForm.linear_one_form(extra, np.zeros(4))
    assert form_residual(got, want) < 1e-13


def test_perturbed_connection_fails():
    theta, acal = integral_twist_example(1)
    A = np.eye(2)
    f = make_factor("nc_twisted", A, theta, acal)
    omega = make_connection("nc_twisted", A, [0.1, 0.2], [0.0, 0.3], I2, theta, acal)
    assert check_compatibility(f, omega).passed
    # a constant shift only moves (p, q); the x_1 dy_1 bump leaves a constant defect
    assert check_compatibility(f, omega + SymbolForm.from_vector([0, 0, 1, 0])).passed
    L = np.zeros((4, 4))
    L[0, 2] = 1.0
    rep = check_compatibility(f, omega + SymbolForm.linear_one_form(L, np.zeros(4)))
    assert not rep.passed
    assert rep.residuals["e1"] == pytest.approx(1.0)


def test_curvature_closed_forms():
    A = np.array([[1.0, 1.0], [0.0, 2.0]])
    omega = make_connection("commutative", A, [0.0, 0.0], [0.0, 0.0], I2)
    N = np.zeros((4, 4), dtype=complex)
    N[:2, 2:] = -2j * np.pi * A.T
    assert form_residual(curvature(omega), SymbolForm.from_matrix(N)) < 1e-13
    theta, acal = integral_twist_example(2)
    omega = make_connection("nc_twisted", A, [0.2, 0.0], [0.1, 0.1], I2, theta, acal)
    closed = curvature_closed_form("nc_twisted", A, theta, acal)
    assert form_residual(curvature(omega, theta), closed) < 1e-12 * max(1.0, closed.norm())


def test_obstruction_cases(rng):
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    om = curvature(make_connection("commutative", A, [0, 0], [0, 0], I2))
    assert holomorphicity_obstruction(om, I2).vanishes
    theta = np.array([[0.0, 1.0], [-1.0, 0.0]])
    om = curvature(make_connection("nc", A, [0, 0], [0, 0], I2, theta), theta)
    assert not holomorphicity_obstruction(om, I2).vanishes
    A = np.array([[1.0, 0.0], [0.0, 0.0]])
    om = curvature(make_connection("nc", A, [0, 0], [0, 0], I2, theta), theta)
    assert holomorphicity_obstruction(om, I2).vanishes


def test_obstruction_matches_display():
    A = np.eye(2)
    T = np.array([[1j, 0.5], [0.5, 2j]])
    theta = np.array([[0.0, 0.7], [-0.7, 0.0]])
    om = curvature(make_connection("nc", A, [0, 0], [0, 0], T, theta), theta)
    D = np.linalg.inv(T - T.conj())
    want = 1j * np.pi * D.T @ T.T @ A.T @ theta @ A @ T @ D
    # half of the antisymmetric coefficient matrix
    assert np.allclose(0.5 * holomorphicity_obstruction(om, T).obstruction_matrix, want, atol=1e-12)


def test_isomorphisms():
    acal = np.diag([1.0, 0.0])
    theta = np.array([[0.0, 1.0], [-1.0, 0.0]])
    A = np.array([[1.0, 1.0], [0.0, 2.0]])
    phi = make_iso("phi_theta_A", acal, theta, A)
    assert phi.value(np.zeros(4)) == 1
    assert symbol_residual(make_iso("phi_theta_A", acal, np.zeros((2, 2)), A), make_iso("phi_A", acal)) == 0
    zero = np.zeros((2, 2))
    assert symbol_residual(make_iso("phi_A", zero), Symbol.constant(1.0, 4)) == 0
    src = make_bundle("nc", A, [0.1, 0.2], [0.3, 0.4], I2, theta)
    dst = make_bundle("nc_twisted", A, [0.1, 0.2], [0.3, 0.4], I2, theta, acal)
    assert verify_morphism(phi, src, dst).passed
    with pytest.raises(HypothesisViolated):
        make_iso("phi_theta_A", np.eye(2), theta, A)


def test_identity_and_bad_morphisms(rng):
    A = random_int_matrix(rng, 2)
    theta = antisym(rng, 2)
    E = make_bundle("nc", A, [0.1, 0.2], [0.3, 0.4], I2, theta)
    assert verify_morphism(1.0, E, E).passed
    F = make_bundle("nc", A, [0.1, 0.2], [0.8, 0.4], I2, theta)
    rep = verify_morphism(1.0, E, F)
    assert not rep.passed
    assert rep.residuals["dbar"] > 0.1 and rep.residuals["e"] == 0


def test_solve_hom_cases(rng):
    A = random_int_matrix(rng, 2)
    theta = antisym(rng, 2)
    zero = np.zeros((2, 2))
    p, q = rng.normal(size=2), rng.normal(size=2)
    phi = solve_hom(A, zero, theta, (p, q), (p, q), 3)
    assert symbol_residual(phi, Symbol.constant(1.0, 4)) < 1e-14
    k0, l0 = np.array([1.0, -2.0]), np.array([0.0, 3.0])
    phi = solve_hom(A, zero, theta, (p, q), (p + k0, q - A.T @ theta @ k0 + l0), 3)
    assert symbol_residual(phi, lattice_morphism(A, zero, theta, k0, l0)) < 1e-12
    for K in (1, 2, 3):
        assert solve_hom(A, zero, theta, (p, q), (p + [0.5, 0], q), K) is None


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_twisted_lattice_shifts_give_morphisms(seed):
    rng = np.random.default_rng(seed)
    theta, acal = twist_pair(rng, 2)
    A = random_int_matrix(rng, 2)
    D = np.eye(2) - (theta @ acal / (2 * np.pi)) @ (theta @ acal / (2 * np.pi))
    k, l = rng.integers(-2, 3, size=2), rng.integers(-2, 3, size=2)
    p, q = rng.normal(size=2), rng.normal(size=2)
    p2 = p + D.T @ k
    q2 = q - A.T @ theta @ D.T @ k + l
    assert solve_hom(A, acal, theta, (p, q), (p2, q2), 2) is not None


# -- sections -----------------------------------------------------------------

def test_residue_counts():
    assert len(residue_classes(np.array([[1.0]]))) == 1
    assert [r.tolist() for r in residue_classes(np.array([[3.0]]))] == [[0.0], [1.0], [2.0]]
    assert len(residue_classes(np.array([[2.0, 1.0], [1.0, 2.0]]))) == 3


def test_section_against_direct_sum():
    s = theta_section(np.array([[1.0]]), [0.0], [0.0], N=10)
    direct = sum(np.exp(-np.pi * (0.25 + l) ** 2) for l in range(-10, 11))
    assert abs(section_symbol(s, 10).value(np.array([0.25, 0.0])) - direct) < 1e-12


def test_section_relations():
    s = theta_section(np.array([[2.0]]), [0.3], [0.7], N=10)
    rep = verify_section(s, samples=16, tol=1e-8)
    assert rep.passed, rep.residuals
    assert s.dimension == 2


def test_zero_section_passes():
    s = theta_section(np.array([[2.0]]), [0.3], [0.7], C={}, N=10)
    rep = verify_section(s)
    assert rep.passed and rep.max_residual == 0


def test_gaussian_mismatch_fails():
    s = theta_section(np.array([[2.0]]), [0.3], [0.7], N=10)
    bad = dataclasses.replace(s, p_gauss=np.array([0.45]))
    rep = verify_section(bad)
    assert not rep.passed
    # the shifted Gaussian still transforms correctly; the holomorphicity relation breaks
    assert max(rep.residuals["e"], rep.residuals["Te"]) < 1e-12
    assert rep.residuals["dbar"] > 0.1


def test_deformed_section_quasi_periodic():
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    theta = np.array([[0.0, 0.4], [-0.4, 0.0]])
    rep = verify_section(theta_section(A, [0.1, 0.2], [0.3, 0.0], N=10, theta=theta))
    assert rep.passed and "dbar" not in rep.residuals


def test_section_preconditions():
    with pytest.raises(UnsupportedT):
        theta_section(np.eye(2), [0, 0], [0, 0], T=np.array([[1j, 0.3], [0.3, 1j]]))
    with pytest.raises(NotPositiveDefinite):
        theta_section(np.array([[1.0, 2.0], [2.0, 1.0]]), [0, 0], [0, 0])


def test_integral_twist_rejects_zero():
    with pytest.raises(ValueError):
        integral_twist_example(0)
