"""Complex-geometry side: tori, factors of automorphy, connections, curvature,
isomorphisms and theta sections."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import (
    ContextMismatch,
    HypothesisViolated,
    NotPositiveDefinite,
    SingularDeformation,
    SingularT,
    TruncationInsufficient,
    UnsupportedT,
)
from .matcore import (
    DEFAULT_TOL,
    Tolerance,
    is_antisymmetric,
    is_positive_definite,
    is_symmetric,
    max_abs,
    near_integer_matrix,
)
from .symcalc import (
    Symbol,
    SymbolForm,
    antiholomorphic_frame,
    dolbeault_project,
    exterior_d,
    moyal_star,
    star_inverse,
    wedge_star,
    zero_two_matrix,
)

TWO_PI = 2 * np.pi

KINDS = ("commutative", "nc", "twisted", "nc_twisted", "gerby_tau1", "gerby_tau2")


# ---------------------------------------------------------------- torus


@dataclass(frozen=True)
class ComplexTorus:
    n: int
    T: np.ndarray

    @property
    def X(self) -> np.ndarray:
        return self.T.real

    @property
    def Y(self) -> np.ndarray:
        return self.T.imag


def make_complex_torus(T) -> ComplexTorus:
    T = np.array(T, dtype=complex)
    if T.ndim == 0:
        T = T.reshape(1, 1)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise SingularT("T must be a square matrix")
    Y = T.imag
    if not is_symmetric(Y) or not is_positive_definite(Y):
        raise NotPositiveDefinite("Im T must be symmetric positive definite")
    if abs(np.linalg.det(T)) <= 1e-12:
        raise SingularT("det T vanishes")
    T.setflags(write=False)
    return ComplexTorus(T.shape[0], T)


def _torus(T) -> ComplexTorus:
    if isinstance(T, ComplexTorus):
        return T
    return make_complex_torus(T)


# ---------------------------------------------------------------- parameters


def deformation_matrix(theta, acal) -> np.ndarray:
    """I + theta Acal / 2pi; raises if singular."""
    theta = np.asarray(theta, dtype=float)
    acal = np.asarray(acal, dtype=float)
    D = np.eye(theta.shape[0]) + theta @ acal / TWO_PI
    if abs(np.linalg.det(D)) <= 1e-12:
        raise SingularDeformation("det(I + theta Acal / 2pi) vanishes")
    return D


def acal_theta(acal, theta) -> np.ndarray:
    """The deformed parameter Acal (I + theta Acal / 2pi)^-1."""
    acal = np.asarray(acal, dtype=float)
    return acal @ np.linalg.inv(deformation_matrix(theta, acal))


def integrality_matrix(acal, theta) -> np.ndarray:
    """(1/2pi)^2 Acal^theta theta (Acal^theta)^T."""
    at = acal_theta(acal, theta)
    return at @ np.asarray(theta, dtype=float) @ at.T / TWO_PI**2


def lambda_tau1(T, tau) -> np.ndarray:
    """((T - Tbar)^-1)^T T^T tau T (T - Tbar)^-1."""
    T = np.asarray(T, dtype=complex)
    D = np.linalg.inv(T - T.conj())
    return D.T @ T.T @ np.asarray(tau, dtype=float) @ T @ D


def lambda_tau2(T, tau) -> np.ndarray:
    """((T - Tbar)^-1)^T tau^T T (T - Tbar)^-1."""
    T = np.asarray(T, dtype=complex)
    D = np.linalg.inv(T - T.conj())
    return D.T @ np.asarray(tau, dtype=float).T @ T @ D


def _gerby_data(kind: str, T, tau):
    """(factor c, Lambda): the xi exponents are -c*pi*i*u^T Lambda zbar."""
    if kind == "gerby_tau1":
        return 1.0, lambda_tau1(T, tau)
    return 2.0, lambda_tau2(T, tau)


def _generator_vectors(T) -> List[np.ndarray]:
    """Images u_gamma of the generators in zbar-coordinates: e_i and conj(T) e_i."""
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    return [np.eye(n)[i].astype(complex) for i in range(n)] + [T.conj()[:, i] for i in range(n)]


def generator_shift(g: int, n: int) -> np.ndarray:
    """Translation in w = (x, y) induced by generator g (e_i for g < n, T e_i otherwise)."""
    v = np.zeros(2 * n)
    v[g] = 1.0
    return v


def generator_name(g: int, n: int) -> str:
    return f"e{g + 1}" if g < n else f"Te{g - n + 1}"


# ---------------------------------------------------------------- factors


@dataclass
class FactorOfAutomorphy:
    kind: str
    n: int
    gens: List[Symbol]
    theta: np.ndarray
    params: Dict[str, np.ndarray]
    torus: Optional[ComplexTorus] = None
    alpha: Optional[np.ndarray] = None  # 2n x 2n gerbe constants, gerby kinds only

    def generator(self, g: int) -> Symbol:
        return self.gens[g]


def make_factor(kind: str, A, theta=None, acal=None, tau=None, T=None) -> FactorOfAutomorphy:
    """Build the generator symbols of a factor of automorphy."""
    if kind not in KINDS:
        raise ValueError(f"unknown factor kind {kind!r}")
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    theta = np.zeros((n, n)) if theta is None or kind in ("commutative", "twisted", "gerby_tau1", "gerby_tau2") else np.asarray(theta, float)
    acal = np.zeros((n, n)) if acal is None or kind in ("commutative", "nc", "gerby_tau1", "gerby_tau2") else np.asarray(acal, float)
    torus = _torus(T) if T is not None else None
    at = acal_theta(acal, theta)
    N = 2 * n
    gens: List[Symbol] = []
    for i in range(n):
        l = np.zeros(N, dtype=complex)
        l[:n] = -1j * np.pi * (A.T @ theta @ A)[i]
        l[n:] = 2j * np.pi * A.T[i]
        gens.append(Symbol.exp_linear(l))
    for i in range(n):
        l = np.zeros(N, dtype=complex)
        l[:n] = -1j * (at @ theta @ A)[i]
        l[n:] = 1j * at[i]
        gens.append(Symbol.exp_linear(l, 0.5j * acal[i, i]))
    alpha = None
    params = {"A": A, "theta": theta, "acal": acal}
    if kind in ("gerby_tau1", "gerby_tau2"):
        if torus is None:
            raise SingularT("gerby factors need a validated torus")
        if tau is None:
            raise ValueError("gerby factors need tau")
        tau = np.asarray(tau, dtype=float)
        if kind == "gerby_tau1" and not is_antisymmetric(tau):
            raise ValueError("tau must be antisymmetric for the tau1 deformation")
        c, lam = _gerby_data(kind, torus.T, tau)
        Tb = torus.T.conj()
        us = _generator_vectors(torus.T)
        for g in range(N):
            row = us[g] @ lam  # u^T Lambda
            l = np.concatenate([row, row @ Tb]) * (-c * np.pi * 1j)
            gens[g] = gens[g] * Symbol.exp_linear(l)
        anti = lam - lam.T
        alpha = np.array([[np.exp(1j * np.pi * c * (us[g] @ anti @ us[h])) for h in range(N)] for g in range(N)])
        params["tau"] = tau
    return FactorOfAutomorphy(kind, n, gens, theta, params, torus, alpha)


@dataclass
class CocycleReport:
    passed: bool
    max_residual: float
    integrality_matrix: Optional[np.ndarray]
    residuals: Dict[str, float] = field(default_factory=dict)


def check_cocycle(factor: FactorOfAutomorphy, tol: Tolerance = DEFAULT_TOL, int_tol: float = 1e-9) -> CocycleReport:
    """Verify the (star- or gerbe-twisted) cocycle relations for all generator pairs."""
    n = factor.n
    N = 2 * n
    theta = factor.theta
    residuals = {}
    for g in range(N):
        for h in range(g + 1, N):
            jg, jh = factor.gens[g], factor.gens[h]
            lhs = moyal_star(jh.shift(generator_shift(g, n)), jg, theta)
            rhs = moyal_star(jg.shift(generator_shift(h, n)), jh, theta)
            if factor.alpha is not None:
                rhs = rhs.scale(factor.alpha[g, h])
            residuals[f"{generator_name(g, n)},{generator_name(h, n)}"] = (lhs - rhs).norm()
    worst = max(residuals.values(), default=0.0)
    imat = None
    ok = tol.ok(worst)
    if factor.kind == "nc_twisted":
        imat = integrality_matrix(factor.params["acal"], theta)
        ok = ok and near_integer_matrix(imat, int_tol)
    return CocycleReport(bool(ok), float(worst), imat, residuals)


# ---------------------------------------------------------------- connections


def connection_matrices(kind: str, A, p, q, T, theta=None, acal=None) -> Tuple[np.ndarray, np.ndarray]:
    """(L, c) with omega = sum_b (w^T L[:, b] + c_b) dw_b."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    T = np.asarray(T, dtype=complex)
    theta = np.zeros((n, n)) if theta is None or kind in ("commutative", "twisted", "gerby_tau1", "gerby_tau2") else np.asarray(theta, float)
    acal = np.zeros((n, n)) if acal is None or kind in ("commutative", "nc", "gerby_tau1", "gerby_tau2") else np.asarray(acal, float)
    I = np.eye(n)
    L = np.zeros((2 * n, 2 * n), dtype=complex)
    L[:n, :n] = 1j * np.pi * A.T @ (I + theta @ acal / np.pi) @ theta @ A
    L[:n, n:] = -2j * np.pi * A.T @ (I + theta @ acal / TWO_PI)
    L[n:, :n] = 1j * acal @ theta @ A
    L[n:, n:] = -1j * acal
    c = np.zeros(2 * n, dtype=complex)
    c[n:] = -2j * np.pi * (np.asarray(p, float) + T.T @ np.asarray(q, float))
    return L, c


def make_connection(kind: str, A, p, q, T, theta=None, acal=None) -> SymbolForm:
    """The connection 1-form of the bundle of the given kind, flat (p, q) part included."""
    L, c = connection_matrices(kind, A, p, q, T, theta, acal)
    return SymbolForm.linear_one_form(L, c)


def zero_connections(factor: FactorOfAutomorphy) -> Optional[List[SymbolForm]]:
    """Gerbe 0-connection 1-forms per generator (gerby kinds only)."""
    if factor.kind not in ("gerby_tau1", "gerby_tau2"):
        return None
    T = factor.torus.T
    n = factor.n
    c, lam = _gerby_data(factor.kind, T, factor.params["tau"])
    _, Q, _ = antiholomorphic_frame(T)
    out = []
    for u in _generator_vectors(T):
        vec = 0.5 * c * (u @ lam @ Q)
        out.append(SymbolForm.from_vector(list(vec), 2 * n))
    return out


def gerbe_two_form(factor: FactorOfAutomorphy) -> Optional[SymbolForm]:
    """2 pi i B^(0,2) in the dx/dy basis (gerby kinds only)."""
    if factor.kind not in ("gerby_tau1", "gerby_tau2"):
        return None
    T = factor.torus.T
    c, lam = _gerby_data(factor.kind, T, factor.params["tau"])
    _, Q, _ = antiholomorphic_frame(T)
    return SymbolForm.from_matrix(1j * np.pi * c * Q.T @ lam @ Q)


@dataclass
class Report:
    passed: bool
    max_residual: float
    residuals: Dict[str, float] = field(default_factory=dict)


def check_compatibility(factor: FactorOfAutomorphy, omega: SymbolForm, tol: Tolerance = DEFAULT_TOL) -> Report:
    """omega(w + gamma) = j * omega * j^-1 + j * d(j^-1) (- 2 pi i zero-connection for gerbes)."""
    n = factor.n
    theta = factor.theta
    zc = zero_connections(factor)
    residuals = {}
    scale = max(1.0, omega.norm())
    for g in range(2 * n):
        j = factor.gens[g]
        jinv = star_inverse(j, theta)
        conj = omega.map(lambda c: moyal_star(moyal_star(j, c, theta), jinv, theta))
        gauge = exterior_d(jinv).map(lambda c: moyal_star(j, c, theta))
        rhs = conj + gauge
        if zc is not None:
            rhs = rhs - zc[g].scale(2j * np.pi)
        residuals[generator_name(g, n)] = (omega.shift(generator_shift(g, n)) - rhs).norm()
    worst = max(residuals.values(), default=0.0)
    return Report(tol.ok(worst, scale), float(worst), residuals)


# ---------------------------------------------------------------- curvature


def curvature(omega: SymbolForm, theta=None, gerbe_2form: Optional[SymbolForm] = None) -> SymbolForm:
    """Omega = d omega + omega ^* omega (+ gerbe 2-form)."""
    out = exterior_d(omega) + wedge_star(omega, omega, theta)
    if gerbe_2form is not None:
        out = out + gerbe_2form
    return out


def curvature_closed_form(kind: str, A, theta=None, acal=None, T=None, tau=None) -> SymbolForm:
    """The displayed closed-form curvature of each bundle kind."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if kind in ("gerby_tau1", "gerby_tau2"):
        N = np.zeros((2 * n, 2 * n), dtype=complex)
        N[:n, n:] = -2j * np.pi * A.T
        c, lam = _gerby_data(kind, T, tau)
        _, Q, _ = antiholomorphic_frame(T)
        return SymbolForm.from_matrix(N + 1j * np.pi * c * Q.T @ lam @ Q)
    theta = np.zeros((n, n)) if theta is None or kind in ("commutative", "twisted") else np.asarray(theta, float)
    acal = np.zeros((n, n)) if acal is None or kind in ("commutative", "nc") else np.asarray(acal, float)
    ta = theta @ acal / TWO_PI
    D = np.eye(n) - ta @ ta
    N = np.zeros((2 * n, 2 * n), dtype=complex)
    N[:n, :n] = 1j * np.pi * A.T @ D @ theta @ A
    N[:n, n:] = -2j * np.pi * A.T @ D
    N[n:, n:] = 1j / (4 * np.pi) * acal @ theta @ acal
    return SymbolForm.from_matrix(N)


@dataclass
class Obstruction:
    vanishes: bool
    obstruction_matrix: np.ndarray


def holomorphicity_obstruction(Omega: SymbolForm, T, tol: float = 1e-10) -> Obstruction:
    """(0,2)-part of a constant curvature as 1/2 dzbar^T N dzbar; vanishes iff N = 0."""
    N = zero_two_matrix(Omega, T)
    scale = max(1.0, Omega.norm())
    return Obstruction(bool(max_abs(N) <= tol * scale), N)


# ---------------------------------------------------------------- bundles and morphisms


@dataclass
class BundleObject:
    factor: FactorOfAutomorphy
    omega: SymbolForm
    gerbe_2form: Optional[SymbolForm]
    labels: Dict[str, np.ndarray]


def make_bundle(kind: str, A, p, q, T, theta=None, acal=None, tau=None, check: bool = True) -> BundleObject:
    torus = _torus(T)
    factor = make_factor(kind, A, theta, acal, tau, torus)
    omega = make_connection(kind, A, p, q, torus.T, factor.theta, factor.params["acal"])
    bundle = BundleObject(
        factor,
        omega,
        gerbe_two_form(factor),
        {"A": np.asarray(A, float), "p": np.asarray(p, float), "q": np.asarray(q, float), "T": torus.T},
    )
    if check:
        rep = check_compatibility(factor, omega)
        if not rep.passed:
            raise ValueError(f"connection is not compatible with the factor (residual {rep.max_residual:.3g})")
    return bundle


def make_iso(kind: str, acal, theta=None, A=None, tol: float = 1e-10) -> Symbol:
    """The isomorphisms phi_A (trivialization) and phi_{theta,A}."""
    acal = np.asarray(acal, dtype=float)
    n = acal.shape[0]
    S = np.zeros((2 * n, 2 * n), dtype=complex)
    S[n:, n:] = 1j * acal
    if kind == "phi_A":
        return Symbol.exp_quadratic(S, np.zeros(2 * n))
    if kind != "phi_theta_A":
        raise ValueError(f"unknown isomorphism kind {kind!r}")
    theta = np.asarray(theta, dtype=float)
    A = np.asarray(A, dtype=float)
    if max_abs(acal @ theta @ acal) > tol * max(1.0, max_abs(acal) ** 2 * max(1.0, max_abs(theta))):
        raise HypothesisViolated("phi_theta_A needs Acal theta Acal = O")
    S[:n, :n] = 1j * A.T @ theta.T @ acal @ theta @ A
    S[:n, n:] = 1j * A.T @ theta @ acal
    S[n:, :n] = S[:n, n:].T
    return Symbol.exp_quadratic(S, np.zeros(2 * n))


def verify_morphism(phi, src: BundleObject, dst: BundleObject, tol: Tolerance = DEFAULT_TOL) -> Report:
    """Check the three isomorphism conditions between two bundles."""
    fs, fd = src.factor, dst.factor
    if fs.n != fd.n or not np.allclose(fs.theta, fd.theta):
        raise ContextMismatch("source and target must share n and theta")
    n = fs.n
    theta = fs.theta
    T = src.labels["T"]
    if not np.allclose(T, dst.labels["T"]):
        raise ContextMismatch("source and target live on different tori")
    phi = phi if isinstance(phi, Symbol) else Symbol.constant(phi, 2 * n)
    res = {"e": 0.0, "Te": 0.0}
    scale = 1.0
    for g in range(2 * n):
        lhs = moyal_star(fd.gens[g], phi, theta)
        rhs = moyal_star(phi.shift(generator_shift(g, n)), fs.gens[g], theta)
        key = "e" if g < n else "Te"
        res[key] = max(res[key], (lhs - rhs).norm())
        scale = max(scale, lhs.norm())
    dbar = dolbeault_project(exterior_d(phi), T, 1)
    w_dst = dolbeault_project(dst.omega, T, 1)
    w_src = dolbeault_project(src.omega, T, 1)
    total = dbar + wedge_star(w_dst, phi, theta) - wedge_star(phi, w_src, theta)
    res["dbar"] = total.norm()
    worst = max(res.values())
    return Report(bool(tol.ok(worst, scale)), float(worst), res)


def lattice_morphism(A, acal, theta, k, l) -> Symbol:
    """exp(-2 pi i (k^T (I - theta Acal/2pi) theta A + l^T) x + 2 pi i k^T (I - theta Acal/2pi) y)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    theta = np.asarray(theta, dtype=float)
    acal = np.asarray(acal, dtype=float)
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    E = np.eye(n) - theta @ acal / TWO_PI
    lin = np.zeros(2 * n, dtype=complex)
    lin[:n] = -2j * np.pi * ((E @ theta @ A).T @ k + l)
    lin[n:] = 2j * np.pi * E.T @ k
    return Symbol.exp_linear(lin)


def solve_hom(A, acal, theta, pq, pq_prime, window: int, T=None, tol: Tolerance = DEFAULT_TOL) -> Optional[Symbol]:
    """Find the lattice morphism between (p, q) and (p', q'), if any."""
    from .modsyz import holo_lattice
    from .matcore import lattice_member

    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    T = 1j * np.eye(n) if T is None else np.asarray(T, dtype=complex)
    lat = holo_lattice(A, acal, theta)
    p, q = (np.asarray(v, float) for v in pq)
    p2, q2 = (np.asarray(v, float) for v in pq_prime)
    dec = lattice_member(np.concatenate([p2 - p, q2 - q]), lat)
    if not dec.inside or np.max(np.abs(dec.coords), initial=0) > window:
        return None
    k, l = dec.coords[:n], dec.coords[n:]
    phi = lattice_morphism(A, acal, theta, k, l)
    src = make_bundle("nc_twisted", A, p, q, T, theta, acal, check=False)
    dst = make_bundle("nc_twisted", A, p2, q2, T, theta, acal, check=False)
    rep = verify_morphism(phi, src, dst, tol)
    if not rep.passed:
        raise RuntimeError(f"constructed morphism failed verification: {rep.residuals}")
    return phi


# ---------------------------------------------------------------- theta sections


def residue_classes(A) -> List[np.ndarray]:
    """Canonical representatives of Z^n / A Z^n in the fundamental parallelepiped."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    Ainv = np.linalg.inv(A)
    # d e_i lies in A Z^n for d = |det A|, so every class meets [0, d)^n.
    bound = max(1, int(round(abs(np.linalg.det(A)))))
    seen = {}
    for m in itertools.product(range(bound), repeat=n):
        m = np.array(m, dtype=float)
        red = m - A @ np.floor(Ainv @ m + 1e-9)
        key = tuple(int(round(v)) for v in red)
        seen.setdefault(key, np.array(key, dtype=float))
    return [seen[k] for k in sorted(seen)]


@dataclass
class ThetaSection:
    A: np.ndarray
    p: np.ndarray
    q: np.ndarray
    C: Dict[Tuple[int, ...], complex]
    N: int
    theta: np.ndarray
    residues: List[np.ndarray]
    p_gauss: Optional[np.ndarray] = None  # overrides p inside the Gaussian only

    @property
    def dimension(self) -> int:
        return len(self.residues)

    def symbol(self, N: Optional[int] = None) -> Symbol:
        return section_symbol(self, self.N if N is None else N)


def theta_section(A, p, q, C=None, N: int = 10, theta=None, T=None) -> ThetaSection:
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if T is not None and not np.allclose(np.asarray(T, dtype=complex), 1j * np.eye(n)):
        raise UnsupportedT("sections are implemented for T = i I only")
    if not is_symmetric(A) or not is_positive_definite(A) or not np.allclose(A, np.round(A)):
        raise NotPositiveDefinite("A must be a symmetric positive definite integer matrix")
    if N < 1:
        raise ValueError("N must be at least 1")
    theta = np.zeros((n, n)) if theta is None else np.asarray(theta, dtype=float)
    res = residue_classes(A)
    if C is None:
        C = {tuple(int(v) for v in m): 1.0 for m in res}
    return ThetaSection(A, np.asarray(p, float), np.asarray(q, float), dict(C), int(N), theta, res)


def section_symbol(s: ThetaSection, N: int) -> Symbol:
    A, q, theta = s.A, s.q, s.theta
    p = s.p if s.p_gauss is None else s.p_gauss
    n = A.shape[0]
    Ainv = np.linalg.inv(A)
    S = np.zeros((2 * n, 2 * n), dtype=complex)
    S[:n, :n] = -2 * np.pi * A
    terms = []
    from .symcalc import PolyExpSymbol, QuadExponent

    for m in s.residues:
        cm = s.C.get(tuple(int(v) for v in m), 0.0)
        if cm == 0:
            continue
        for l in itertools.product(range(-N, N + 1), repeat=n):
            l = np.array(l, dtype=float)
            freq = -A @ l + m
            c = Ainv @ (freq - p)
            lin = np.zeros(2 * n, dtype=complex)
            lin[:n] = 2 * np.pi * A.T @ c - 2j * np.pi * q - 1j * np.pi * (theta @ A).T @ freq
            lin[n:] = 2j * np.pi * freq
            kappa = -np.pi * c @ A @ c - 2j * np.pi * l @ q
            terms.append(PolyExpSymbol({(0,) * (2 * n): cm}, QuadExponent(S, lin, kappa)))
    return Symbol(2 * n, terms)


def verify_section(s: ThetaSection, samples: int = 16, tol: float = 1e-8, seed: int = 0) -> Report:
    """Quasi-periodicity against j_{theta,A} at random points, plus the
    dbar-relation for the undeformed (theta = 0) section."""
    n = s.A.shape[0]
    rng = np.random.default_rng(seed)
    pts = rng.random((samples, 2 * n))
    sym = section_symbol(s, s.N)
    base = sym.values(pts)
    trunc = float(np.max(np.abs(base - section_symbol(s, s.N + 2).values(pts)), initial=0.0))
    if trunc >= tol / 10:
        raise TruncationInsufficient(f"N={s.N} leaves a tail of {trunc:.3g}")
    factor = make_factor("nc", s.A, s.theta)
    T = 1j * np.eye(n)
    res = {"e": 0.0, "Te": 0.0}
    for g in range(2 * n):
        lhs = moyal_star(factor.gens[g], sym, factor.theta).values(pts)
        rhs = sym.values(pts + generator_shift(g, n))
        key = "e" if g < n else "Te"
        res[key] = max(res[key], float(np.max(np.abs(lhs - rhs), initial=0.0)))
    if not np.any(s.theta):
        omega = make_connection("commutative", s.A, s.p, s.q, T)
        w01 = dolbeault_project(omega, T, 1)
        rel = dolbeault_project(exterior_d(sym), T, 1) + wedge_star(w01, sym)
        res["dbar"] = max((float(np.max(np.abs(c.values(pts)))) for c in rel.coeffs.values()), default=0.0)
    worst = max(res.values())
    return Report(bool(worst <= tol), float(worst), res)


def integral_twist_example(m: int) -> Tuple[np.ndarray, np.ndarray]:
    """A 2x2 pair (theta, Acal) whose integrality matrix is [[0, m], [-m, 0]]."""
    if m == 0:
        raise ValueError("m must be a nonzero integer")
    t = (1 + np.sqrt(1 + m * m)) / (2 * m)
    theta = t * np.array([[0.0, 1.0], [-1.0, 0.0]])
    acal = 4 * np.pi * np.array([[0.0, 1.0], [1.0, 0.0]])
    return theta, acal
