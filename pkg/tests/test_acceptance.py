"""End-to-end acceptance checks, one test per criterion.

Each test appends a one-line verdict that is printed in the terminal summary.
"""

import itertools
import json
import math
import shutil
import subprocess
import sys
import time

import numpy as np
import pytest

from nctorus import cli
from nctorus.gcs import build_IT, verify_identity
from nctorus.holoside import (
    check_cocycle,
    check_compatibility,
    curvature,
    curvature_closed_form,
    deformation_matrix,
    gerbe_two_form,
    holomorphicity_obstruction,
    integral_twist_example,
    integrality_matrix,
    make_bundle,
    make_connection,
    make_factor,
    make_iso,
    solve_hom,
    theta_section,
    verify_morphism,
    verify_section,
)
from nctorus.modsyz import curvature_match, intersection_points, moduli_equiv, moduli_point, syz_map
from nctorus.symcalc import Symbol, form_residual, moyal_star, symbol_residual
from nctorus.sympside import dual_curvature_closed_form

from conftest import (
    ACCEPTANCE_LINES,
    antisym,
    null_twist_pair,
    random_general_T,
    random_int_matrix,
    random_T,
    sym,
    twist_pair,
)
from test_symcalc import affine_exp, gaussian_exp, random_poly, series_star


def record(number, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_gcs_suite():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for k in range(100):
        T = random_general_T(rng, 1 + k % 3)
        J = build_IT(T)
        worst = max(
            worst,
            J.square_residual(),
            J.pairing_residual(),
            verify_identity("gcs_mirror", {"T": T}).max_entry_residual,
            verify_identity("gcs_factorization", {"T": T}).max_entry_residual,
        )
    elapsed = time.perf_counter() - start
    record(1, worst < 1e-9 and elapsed < 5, f"max residual {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_moyal_suite():
    rng = np.random.default_rng(2)
    f, g = gaussian_exp(rng, 2), gaussian_exp(rng, 2)
    zero_red = symbol_residual(moyal_star(f, g, np.zeros((2, 2))), f * g)
    assoc = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 3))
        theta = antisym(rng, n)
        a, b, c = gaussian_exp(rng, n), affine_exp(rng, n), affine_exp(rng, n)
        pts = rng.normal(size=(32, 2 * n)) * 0.5
        left = moyal_star(moyal_star(a, b, theta), c, theta).values(pts)
        right = moyal_star(a, moyal_star(b, c, theta), theta).values(pts)
        assoc = max(assoc, float(np.max(np.abs(left - right)) / max(1.0, np.max(np.abs(left)))))
    theta = antisym(rng, 2)
    series = 0.0
    for _ in range(20):
        p, q = random_poly(rng, 4, 2), random_poly(rng, 4, 2)
        got = moyal_star(Symbol.poly(p, 4), Symbol.poly(q, 4), theta)
        series = max(series, symbol_residual(got, Symbol.poly(series_star(p, q, theta), 4)))
    ok = zero_red == 0 and assoc < 1e-9 and series < 1e-12
    record(2, ok, f"theta=0 residual {zero_red:.1e}, associativity {assoc:.2e}, series {series:.2e}")


def test_criterion_03_integral_twist_pairs():
    worst_det = worst_int = 0.0
    cocycles = True
    for m in (1, 2, 3):
        theta, acal = integral_twist_example(m)
        det = np.linalg.det(deformation_matrix(theta, acal))
        worst_det = max(worst_det, abs(det - (-2 - 2 * math.sqrt(1 + m * m)) / m**2))
        worst_int = max(worst_int, float(np.max(np.abs(integrality_matrix(acal, theta) - [[0, m], [-m, 0]]))))
        cocycles &= check_cocycle(make_factor("nc_twisted", np.eye(2), theta, acal)).passed
    ok = worst_det < 1e-10 and worst_int < 1e-9 and cocycles
    record(3, ok, f"det error {worst_det:.1e}, integrality error {worst_int:.1e}, cocycles {cocycles}")


def test_criterion_04_connection_and_curvature_identities():
    rng = np.random.default_rng(4)
    worst_conn = worst_curv = 0.0
    for k in range(50):
        n = 2 + k % 2
        theta, acal = twist_pair(rng, n) if k % 3 else null_twist_pair(rng, n)
        A = random_int_matrix(rng, n)
        T = random_T(rng, n)
        p, q = rng.normal(size=n), rng.normal(size=n)
        factor = make_factor("nc_twisted", A, theta, acal)
        assert check_cocycle(factor).passed
        omega = make_connection("nc_twisted", A, p, q, T, theta, acal)
        rep = check_compatibility(factor, omega)
        worst_conn = max(worst_conn, rep.max_residual / max(1.0, omega.norm()))
        closed = curvature_closed_form("nc_twisted", A, theta, acal)
        worst_curv = max(worst_curv, form_residual(curvature(omega, theta), closed) / max(1.0, closed.norm()))
    ok = worst_conn < 1e-12 and worst_curv < 1e-12
    record(4, ok, f"relative residuals: connection {worst_conn:.1e}, curvature {worst_curv:.1e}")


def test_criterion_05_isomorphism():
    rng = np.random.default_rng(5)
    worst = 0.0
    passed = True
    special = 0.0
    for _ in range(25):
        n = int(rng.integers(2, 4))
        theta, acal = null_twist_pair(rng, n)
        A = random_int_matrix(rng, n)
        T = random_T(rng, n)
        p, q = rng.normal(size=n), rng.normal(size=n)
        phi = make_iso("phi_theta_A", acal, theta, A)
        src = make_bundle("nc", A, p, q, T, theta)
        dst = make_bundle("nc_twisted", A, p, q, T, theta, acal)
        rep = verify_morphism(phi, src, dst)
        passed &= rep.passed
        worst = max(worst, rep.max_residual)
        special = max(special, symbol_residual(make_iso("phi_theta_A", acal, np.zeros((n, n)), A), make_iso("phi_A", acal)))
    record(5, passed and special == 0, f"all pass {passed}, worst {worst:.1e}, theta=0 difference {special:.1e}")


def test_criterion_06_morphisms_match_lattice():
    rng = np.random.default_rng(6)
    disagreements = 0
    checked = 0
    for n in (1, 2):
        if n == 1:
            theta, acal = np.zeros((1, 1)), sym(rng, 1)
        else:
            theta, acal = twist_pair(rng, 2)
        A = random_int_matrix(rng, n)
        p, q = rng.normal(size=n), rng.normal(size=n)
        ta = theta @ acal / (2 * np.pi)
        D = np.eye(n) - ta @ ta
        x = moduli_point(p, q, "holo", A, acal, theta)
        for kl in itertools.product(range(-2, 3), repeat=2 * n):
            k, l = np.array(kl[:n], float), np.array(kl[n:], float)
            for offset in (0.0, 0.5):
                p2 = p + D.T @ k
                q2 = q - A.T @ theta @ D.T @ k + l
                p2 = p2 + offset * np.eye(n)[0]
                equiv = moduli_equiv(x, moduli_point(p2, q2, "holo", A, acal, theta))
                found = solve_hom(A, acal, theta, (p, q), (p2, q2), 3) is not None
                disagreements += found != equiv
                disagreements += equiv == bool(offset)
                checked += 1
    record(6, disagreements == 0, f"{checked} targets, {disagreements} disagreements")


def test_criterion_07_symplectic_moduli_and_syz():
    rng = np.random.default_rng(7)
    theta, acal = twist_pair(rng, 2)
    A = random_int_matrix(rng, 2)
    round_trip = 0.0
    for _ in range(100):
        v = rng.normal(size=4) * 3
        for side in ("symp", "holo"):
            x = moduli_point(v[:2], v[2:], side, A, acal, theta)
            round_trip = max(round_trip, float(np.max(np.abs(syz_map(syz_map(x)).vector - v))))
    p, q = rng.normal(size=2), rng.normal(size=2)
    x = moduli_point(p, q, "symp", A, acal, theta)
    hx = syz_map(x)
    failures = 0
    for k in itertools.product(range(-2, 3), repeat=4):
        k = np.array(k, dtype=float)
        y = moduli_point(p + k[:2], q + k[2:], "symp", A, acal, theta)
        failures += not moduli_equiv(x, y)
        failures += not moduli_equiv(hx, syz_map(y))
        failures += moduli_equiv(x, moduli_point(p + k[:2] + [0.5, 0], q + k[2:], "symp", A, acal, theta))
    ok = round_trip < 1e-10 and failures == 0
    record(7, ok, f"round trip {round_trip:.1e}, coset failures {failures}")


def test_criterion_08_curvature_comparison():
    rng = np.random.default_rng(8)
    disagreements = 0
    matches = 0
    for k in range(50):
        theta = antisym(rng, 2, 0.5)
        acal = sym(rng, 2)
        if k % 3 == 0:
            bcal = -acal
        elif k % 3 == 1:
            v, w = rng.normal(size=2), rng.normal(size=2)
            acal, bcal = np.outer(v, v), 2.0 * np.outer(w, w)
        else:
            bcal = sym(rng, 2)
        A = random_int_matrix(rng, 2)
        match = curvature_match(acal, bcal, theta)
        matches += match
        holo = form_residual(curvature_closed_form("nc_twisted", A, theta, acal), curvature_closed_form("nc_twisted", A, theta, bcal))
        dual = form_residual(dual_curvature_closed_form(A, acal, theta), dual_curvature_closed_form(A, bcal, theta))
        disagreements += not (match == (holo < 1e-9) == (dual < 1e-9))
    record(8, disagreements == 0, f"{matches} matching of 50, {disagreements} disagreements")


def test_criterion_09_sections():
    start = time.perf_counter()
    bad = []
    for A in ([[1]], [[2]], [[3]], [[1, 0], [0, 2]], [[2, 1], [1, 2]]):
        A = np.array(A, dtype=float)
        n = A.shape[0]
        det = int(round(np.linalg.det(A)))
        p, q = np.full(n, 0.3), np.full(n, 0.7)
        s = theta_section(A, p, q, N=10)
        rep = verify_section(s, samples=16, tol=1e-8)
        if not (rep.passed and s.dimension == det and intersection_points(A, p).count == det):
            bad.append(A.tolist())
    elapsed = time.perf_counter() - start
    record(9, not bad and elapsed < 10, f"failures {bad}, {elapsed:.2f}s")


def test_criterion_10_tau_deformations():
    rng = np.random.default_rng(10)
    T = 1j * np.eye(2)
    A = np.array([[2.0, 1.0], [1.0, 1.0]])
    exact = verify_identity("tau1_preserve_iff", {"T": T, "tau": np.zeros((2, 2))}).max_entry_residual == 0
    fam1 = verify_identity("tau1_preserve_iff", {"T": random_T(rng, 2), "samples": 20})
    fam2 = verify_identity("tau2_preserve_iff", {"T": random_T(rng, 2), "samples": 20})
    iff_ok = exact and fam1.passed and fam2.passed and fam1.details["min_nonnull_residual"] > 1e-6
    curv = 0.0
    obstruction_errors = 0
    cases = [("tau1", np.zeros((2, 2))), ("tau1", antisym(rng, 2)), ("tau2", np.zeros((2, 2))),
             ("tau2", sym(rng, 2)), ("tau2", rng.normal(size=(2, 2))), ("tau2", antisym(rng, 2))]
    for kind, tau in cases:
        fk = "gerby_" + kind
        factor = make_factor(fk, A, tau=tau, T=T)
        omega = make_connection(fk, A, [0.1, 0.2], [0.3, 0.1], T)
        Om = curvature(omega, None, gerbe_two_form(factor))
        curv = max(curv, form_residual(Om, curvature_closed_form(fk, A, T=T, tau=tau)))
        null = not np.any(tau) if kind == "tau1" else np.allclose(tau.T @ T, (tau.T @ T).T)
        obs = holomorphicity_obstruction(Om, T)
        obstruction_errors += obs.vanishes != null
        if null:
            obstruction_errors += np.abs(obs.obstruction_matrix).max() > 1e-14
    ok = iff_ok and curv < 1e-12 and obstruction_errors == 0
    record(10, ok, f"biconditionals {iff_ok}, curvature residual {curv:.1e}, obstruction errors {obstruction_errors}")


def _verify_command():
    exe = shutil.which("verify")
    return [exe] if exe else [sys.executable, "-m", "nctorus.cli"]


def test_criterion_11_end_to_end(tmp_path):
    start = time.perf_counter()
    run = subprocess.run(_verify_command() + ["remark_m1.json", "--check", "all"], capture_output=True, text=True)
    elapsed = time.perf_counter() - start
    data = json.loads((cli.resources.files("nctorus") / "scenarios" / "remark_m1.json").read_text())
    data["theta"] = (1.01 * np.array(data["theta"])).tolist()
    mutated = tmp_path / "remark_m1_mutated.json"
    mutated.write_text(json.dumps(data))
    out = tmp_path / "report.json"
    bad = subprocess.run(_verify_command() + [str(mutated), "--check", "all", "--out", str(out)], capture_output=True, text=True)
    report = json.loads(out.read_text())
    cocycle = next(r for r in report["results"] if r["name"] == "cocycle")
    ok = run.returncode == 0 and elapsed < 60 and bad.returncode != 0 and not cocycle["pass"]
    record(11, ok, f"exit {run.returncode} in {elapsed:.1f}s; mutated exit {bad.returncode}, cocycle pass {cocycle['pass']}")
