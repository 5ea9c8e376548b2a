"""Symplectic side: mirror tori, affine Lagrangians, flat gerbes on them and
twisted local systems with their curvature."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import IntegralityViolated, PreconditionFailed, SingularT
from .holoside import (
    Report,
    acal_theta,
    lambda_tau1,
    lambda_tau2,
    make_complex_torus,
)
from .matcore import is_antisymmetric, is_symmetric, max_abs, near_integer_matrix
from .symcalc import Symbol, SymbolForm, antiholomorphic_frame, exterior_d, form_residual, wedge_star

TWO_PI = 2 * np.pi
VARIANTS = ("plain", "nc", "tau1", "tau2")
GERBE_KINDS = ("theta_lagrangian", "tau1_lagrangian", "theta_torus", "theta_fm_torus", "tau1", "tau2")


# ---------------------------------------------------------------- mirror torus


@dataclass(frozen=True)
class MirrorTorus:
    """Real 2n-torus in coordinates (xv, yv) with a complexified symplectic form.

    ``omega_twist`` and ``b_twist`` are 2n x 2n matrices N of extra 2-forms
    dw^T N dw added by the deformation (zero for the plain variant).
    """

    n: int
    T: np.ndarray
    variant: str
    omega_matrix: np.ndarray
    b_matrix: np.ndarray
    omega_twist: np.ndarray
    b_twist: np.ndarray
    param: Optional[np.ndarray] = None

    @property
    def complexified(self) -> np.ndarray:
        return self.b_matrix + 1j * self.omega_matrix

    def omega_two_form(self) -> np.ndarray:
        """Total symplectic form as a 2n x 2n matrix N (form = dw^T N dw)."""
        n = self.n
        N = np.zeros((2 * n, 2 * n))
        N[:n, n:] = self.omega_matrix
        return N + self.omega_twist

    def b_two_form(self) -> np.ndarray:
        n = self.n
        N = np.zeros((2 * n, 2 * n))
        N[:n, n:] = self.b_matrix
        return N + self.b_twist


def make_mirror(T, variant: str = "plain", param=None) -> MirrorTorus:
    """Mirror partner of the complex torus with period matrix ``T``.

    ``param`` is theta for ``nc`` and tau for ``tau1``/``tau2``.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown mirror variant {variant!r}")
    torus = make_complex_torus(T)
    n = torus.n
    m = -np.linalg.inv(torus.T).T
    om, bm = m.imag.copy(), m.real.copy()
    Ow = np.zeros((2 * n, 2 * n))
    Bw = np.zeros((2 * n, 2 * n))
    p = None
    if variant != "plain":
        if param is None:
            raise ValueError(f"variant {variant!r} needs a parameter matrix")
        p = np.asarray(param, dtype=float)
        if variant == "nc":
            if not is_antisymmetric(p):
                raise ValueError("theta must be antisymmetric")
            Bw[n:, n:] = 0.5 * p
        elif variant == "tau1":
            if not is_antisymmetric(p):
                raise ValueError("tau must be antisymmetric for the tau1 variant")
            Bw[:n, :n] = 0.5 * p
        else:
            Ow[:n, :n] = -om @ p.T
            Bw[:n, :n] = -bm @ p.T
    return MirrorTorus(n, torus.T, variant, om, bm, Ow, Bw, p)


# ---------------------------------------------------------------- Lagrangians


@dataclass(frozen=True)
class Lagrangian:
    """Affine section yv = S xv + p with slope S = A (+ tau^T when deformed)."""

    A: np.ndarray
    p: np.ndarray
    slope_shift: Optional[np.ndarray] = None
    fukaya: Optional[bool] = None

    @property
    def slope(self) -> np.ndarray:
        return self.A if self.slope_shift is None else self.A + self.slope_shift

    def embedding(self) -> np.ndarray:
        """Tangent map [I; S] from xv to (xv, yv)."""
        n = self.A.shape[0]
        return np.vstack([np.eye(n), self.slope])


def fukaya_object_check(A, p=None, q=None, T=None) -> bool:
    """True iff A T is complex symmetric."""
    A = np.asarray(A, dtype=float)
    if T is None:
        T = 1j * np.eye(A.shape[0])
    return is_symmetric(A @ np.asarray(T, dtype=complex))


def make_lagrangian(A, p, T=None, tau=None) -> Lagrangian:
    A = np.asarray(A, dtype=float)
    shift = None if tau is None else np.asarray(tau, dtype=float).T
    ok = None if T is None else fukaya_object_check(A, T=T)
    return Lagrangian(A, np.asarray(p, dtype=float), shift, ok)


def restrict_two_form(N, J) -> np.ndarray:
    """Pull back dw^T N dw along w = J v; returns J^T N J."""
    J = np.asarray(J)
    return J.T @ np.asarray(N) @ J


def two_form_periods(N) -> np.ndarray:
    """Antisymmetric C whose (i, j) entry integrates dv^T N dv over the unit (i, j) torus."""
    N = np.asarray(N)
    return N - N.T


@dataclass(frozen=True)
class Periods:
    period_matrix: np.ndarray
    integral: bool


def b_restriction_periods(A, mirror: MirrorTorus, tol: float = 1e-9) -> Periods:
    """Periods of the total B-field restricted to the Lagrangian of slope ``A``."""
    A = np.asarray(A, dtype=float)
    if not fukaya_object_check(A, T=mirror.T):
        raise PreconditionFailed("A T is not symmetric, so B does not vanish on the Lagrangian")
    J = np.vstack([np.eye(mirror.n), A])
    C = two_form_periods(restrict_two_form(mirror.b_two_form(), J)).real
    return Periods(C, near_integer_matrix(C, tol))


# ---------------------------------------------------------------- gerbes


@dataclass
class GerbeDatum:
    """Flat gerbe with constant data built from a single matrix L.

    Primitive 2 pi i w^T L dw, 0-connection gamma^T L dw on the overlap of
    the translation by gamma, 1-connection 2 pi i dw^T L dw and cocycle
    alpha(g, h) = exp(2 pi i g^T (L - L^T) h).
    """

    kind: str
    carrier: str
    L: np.ndarray
    generators: np.ndarray  # rows are translation vectors in w
    alpha: np.ndarray
    zero_conn: List[SymbolForm]
    one_conn: SymbolForm
    beta: SymbolForm

    @property
    def nvars(self) -> int:
        return self.L.shape[0]

    def xi(self, g: int) -> Symbol:
        return Symbol.exp_linear(-2j * np.pi * (self.generators[g] @ self.L))


def _gerbe_from_matrix(kind: str, carrier: str, L, generators) -> GerbeDatum:
    L = np.asarray(L, dtype=complex)
    G = np.asarray(generators, dtype=complex)
    nv = L.shape[0]
    anti = L - L.T
    alpha = np.exp(2j * np.pi * (G @ anti @ G.T))
    zero = [SymbolForm.from_vector(list(g @ L), nv) for g in G]
    one = SymbolForm.from_matrix(2j * np.pi * L)
    beta = SymbolForm.linear_one_form(2j * np.pi * L, np.zeros(nv))
    return GerbeDatum(kind, carrier, L, G, alpha, zero, one, beta)


def _complex_generators(T) -> np.ndarray:
    n = T.shape[0]
    return np.eye(2 * n)


def make_gerbe(kind: str, *, A=None, theta=None, tau=None, T=None) -> GerbeDatum:
    """Construct one of the flat gerbes.

    ``theta_lagrangian``  on L_(A,p): B = 1/2 dxv^T A^T theta A dxv
    ``tau1_lagrangian``   on L_(A,p): B = 1/2 dxv^T tau dxv
    ``theta_torus``       on the mirror torus: B = 1/2 dyv^T theta dyv
    ``theta_fm_torus``    on the dual mirror torus: B = 1/2 dxv^T theta dxv
    ``tau1``, ``tau2``    on the complex torus: the (0,2)-part of the tau B-field
    """
    if kind not in GERBE_KINDS:
        raise ValueError(f"unknown gerbe kind {kind!r}")
    if kind in ("theta_lagrangian", "tau1_lagrangian"):
        if kind == "theta_lagrangian":
            A = np.asarray(A, dtype=float)
            M = A.T @ np.asarray(theta, dtype=float) @ A
        else:
            M = np.asarray(tau, dtype=float)
            if not is_antisymmetric(M):
                raise ValueError("tau must be antisymmetric")
        n = M.shape[0]
        return _gerbe_from_matrix(kind, "lagrangian", 0.5 * M, np.eye(n))
    if kind in ("theta_torus", "theta_fm_torus"):
        theta = np.asarray(theta, dtype=float)
        n = theta.shape[0]
        L = np.zeros((2 * n, 2 * n))
        if kind == "theta_torus":
            L[n:, n:] = 0.5 * theta
        else:
            L[:n, :n] = 0.5 * theta
        return _gerbe_from_matrix(kind, "torus", L, np.eye(2 * n))
    if T is None:
        raise SingularT("complex gerbes need a period matrix")
    torus = make_complex_torus(T)
    tau = np.asarray(tau, dtype=float)
    if kind == "tau1":
        if not is_antisymmetric(tau):
            raise ValueError("tau must be antisymmetric for the tau1 gerbe")
        c, lam = 0.5, lambda_tau1(torus.T, tau)
    else:
        c, lam = 1.0, lambda_tau2(torus.T, tau)
    _, Q, _ = antiholomorphic_frame(torus.T)
    return _gerbe_from_matrix(kind, "complex_torus", c * Q.T @ lam @ Q, _complex_generators(torus.T))


def pullback_gerbe(g: GerbeDatum, J, generator_images, kind: Optional[str] = None, carrier: str = "lagrangian") -> GerbeDatum:
    """Pull ``g`` back along the affine map v -> J v + c.

    Constant offsets c only change the primitive by a closed constant form,
    so they are omitted. ``generator_images`` are the translations J g'.
    """
    J = np.asarray(J, dtype=float)
    L = J.T @ g.L @ J
    imgs = np.asarray(generator_images, dtype=float)
    G = np.linalg.lstsq(J, imgs.T, rcond=None)[0].T
    return _gerbe_from_matrix(kind or g.kind, carrier, L, G)


def check_gerbe(g: GerbeDatum, tol: float = 1e-12) -> Report:
    """Re-derive the gerbe compatibilities from the stored data."""
    res: Dict[str, float] = {}
    nv = g.nvars
    two_pi_i = 2j * np.pi
    dbeta = exterior_d(g.beta)
    res["one_conn"] = form_residual(dbeta, g.one_conn)
    k = len(g.generators)
    shift_res = 0.0
    for a in range(k):
        gamma = g.generators[a].real
        diff = g.beta.shift(gamma) - g.beta
        shift_res = max(shift_res, form_residual(diff, g.zero_conn[a].scale(two_pi_i)))
    res["zero_conn"] = shift_res
    add_res = 0.0
    alpha_res = 0.0
    for a in range(k):
        for b in range(k):
            ga, gb = g.generators[a].real, g.generators[b].real
            both = g.beta.shift(ga + gb) - g.beta
            lhs = (g.zero_conn[a] + g.zero_conn[b]).scale(two_pi_i)
            add_res = max(add_res, form_residual(lhs, both))
            xa, xb = g.xi(a), g.xi(b)
            combined = xa.shift(gb) * xb
            ratio = xb.shift(ga) * xa * _inverse_exp(combined)
            alpha_res = max(alpha_res, (ratio - Symbol.constant(g.alpha[a, b], nv)).norm())
    res["additivity"] = add_res
    res["alpha"] = alpha_res
    res["alpha_antisym"] = max_abs(g.alpha * g.alpha.T - 1.0)
    worst = max(res.values())
    return Report(bool(worst <= tol), float(worst), res)


def _inverse_exp(f: Symbol) -> Symbol:
    (t,) = f.terms
    c = t.poly[(0,) * f.nvars]
    return Symbol.exp_quadratic(-t.S, -t.l, -t.kappa, {(0,) * f.nvars: 1.0 / c})


def gerbe_equal(a: GerbeDatum, b: GerbeDatum) -> Dict[str, float]:
    """Coefficient residuals between two gerbes on the same carrier."""
    out = {"one_conn": form_residual(a.one_conn, b.one_conn)}
    out["zero_conn"] = max((form_residual(x, y) for x, y in zip(a.zero_conn, b.zero_conn)), default=0.0)
    out["alpha"] = max_abs(a.alpha - b.alpha)
    return out


def restriction_consistency(A, theta) -> Report:
    """The Lagrangian theta-gerbe equals the torus theta-gerbe restricted to L_(A,p)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    glob = make_gerbe("theta_torus", theta=theta)
    J = np.vstack([np.eye(n), A])
    restricted = pullback_gerbe(glob, J, J.T, kind="theta_lagrangian")
    res = gerbe_equal(restricted, make_gerbe("theta_lagrangian", A=A, theta=theta))
    worst = max(res.values())
    return Report(bool(worst <= 1e-12), float(worst), res)


def fm_pullback_check(A, theta) -> Report:
    """Pull the dual-torus theta-gerbe back through (xv, yv) -> (yv, -xv), then
    restrict to L_(A,p); compare with the Lagrangian theta-gerbe."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if abs(np.linalg.det(A)) < 0.5:
        raise PreconditionFailed("the Fourier-Mukai comparison needs det A != 0")
    fm = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    J = fm @ np.vstack([np.eye(n), A])
    pulled = pullback_gerbe(make_gerbe("theta_fm_torus", theta=theta), J, J.T, kind="theta_lagrangian")
    res = gerbe_equal(pulled, make_gerbe("theta_lagrangian", A=A, theta=theta))
    worst = max(res.values())
    return Report(bool(worst <= 1e-12), float(worst), res)


# ---------------------------------------------------------------- twisted local systems


@dataclass
class TwistedLocalSystem:
    A: np.ndarray
    p: np.ndarray
    q: np.ndarray
    acal: np.ndarray
    theta: np.ndarray
    j_dual: List[Symbol]
    omega_dual: SymbolForm
    integrality: np.ndarray
    labels: Dict[str, object] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.A.shape[0]


def _dual_twist(acal, theta) -> np.ndarray:
    at = acal_theta(acal, theta)
    return at @ theta @ at.T


def make_twisted_local_system(A, p, q, acal=None, theta=None, enforce_integrality: bool = True, tol: float = 1e-9) -> TwistedLocalSystem:
    """Transition functions and connection of the twisted bundle on L_(A,p)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    theta = np.zeros((n, n)) if theta is None else np.asarray(theta, dtype=float)
    acal = np.zeros((n, n)) if acal is None else np.asarray(acal, dtype=float)
    N = _dual_twist(acal, theta)
    imat = N / TWO_PI**2
    if enforce_integrality and not near_integer_matrix(imat, tol):
        raise IntegralityViolated("(1/2pi)^2 Acal^theta theta Acal^theta^T is not integral")
    M = A.T @ theta @ A
    gens = [Symbol.exp_linear(-1j / (4 * np.pi) * N[i] - 1j * np.pi * M[i]) for i in range(n)]
    omega = SymbolForm.linear_one_form(1j / (4 * np.pi) * N, 2j * np.pi * np.asarray(q, dtype=float))
    return TwistedLocalSystem(A, np.asarray(p, float), np.asarray(q, float), acal, theta, gens, omega, imat)


def _exponent_scale(sys: TwistedLocalSystem) -> float:
    """Size of the phases in j^vee; absolute rounding in the checks grows with it."""
    N = _dual_twist(sys.acal, sys.theta)
    return 1.0 + max_abs(N) / (4 * np.pi) + np.pi * max_abs(sys.A.T @ sys.theta @ sys.A)


def check_twisted_cocycle(sys: TwistedLocalSystem, gerbe: Optional[GerbeDatum] = None, tol: float = 1e-12) -> Report:
    """j(ei+ej)^-1 j(ej, x+ei) j(ei, x) against the gerbe constants."""
    gerbe = gerbe or make_gerbe("theta_lagrangian", A=sys.A, theta=sys.theta)
    n = sys.n
    res = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ei, ej = np.eye(n)[i], np.eye(n)[j]
            combined = sys.j_dual[i].shift(ej) * sys.j_dual[j]
            ratio = sys.j_dual[j].shift(ei) * sys.j_dual[i] * _inverse_exp(combined)
            res[f"e{i + 1},e{j + 1}"] = (ratio - Symbol.constant(gerbe.alpha[i, j], n)).norm()
    worst = max(res.values(), default=0.0)
    return Report(bool(worst <= tol * _exponent_scale(sys)), float(worst), res)


def check_connection_shift(sys: TwistedLocalSystem, gerbe: Optional[GerbeDatum] = None, tol: float = 1e-12) -> Report:
    """omega(x + ei) = omega(x) + j d(j^-1) - 2 pi i omega_gerbe(ei)."""
    gerbe = gerbe or make_gerbe("theta_lagrangian", A=sys.A, theta=sys.theta)
    n = sys.n
    res = {}
    for i in range(n):
        j = sys.j_dual[i]
        jdj = wedge_star(SymbolForm.scalar(j), exterior_d(_inverse_exp(j)))
        rhs = sys.omega_dual + jdj - gerbe.zero_conn[i].scale(2j * np.pi)
        res[f"e{i + 1}"] = form_residual(sys.omega_dual.shift(np.eye(n)[i]), rhs)
    worst = max(res.values(), default=0.0)
    return Report(bool(worst <= tol * _exponent_scale(sys)), float(worst), res)


@dataclass
class DualCurvature:
    omega: SymbolForm
    closed_form: SymbolForm
    generalized_condition_pass: bool
    residuals: Dict[str, float]


def dual_curvature_closed_form(A, acal, theta) -> SymbolForm:
    """(i/4pi) dxv^T N dxv + pi i dxv^T A^T theta A dxv."""
    A = np.asarray(A, dtype=float)
    theta = np.asarray(theta, dtype=float)
    N = _dual_twist(np.asarray(acal, float), theta)
    return SymbolForm.from_matrix(1j / (4 * np.pi) * N + 1j * np.pi * A.T @ theta @ A)


def dual_curvature(sys: TwistedLocalSystem, gerbe: Optional[GerbeDatum] = None, mirror: Optional[MirrorTorus] = None, tol: float = 1e-12) -> DualCurvature:
    """d omega + omega ^ omega + 1-connection, with the B-field condition."""
    gerbe = gerbe or make_gerbe("theta_lagrangian", A=sys.A, theta=sys.theta)
    if gerbe.carrier != "lagrangian" or gerbe.nvars != sys.n:
        raise PreconditionFailed("gerbe does not live on the Lagrangian")
    w = sys.omega_dual
    Om = exterior_d(w) + wedge_star(w, w) + gerbe.one_conn
    closed = dual_curvature_closed_form(sys.A, sys.acal, sys.theta)
    n = sys.n
    if mirror is None:
        mirror = make_mirror(1j * np.eye(n), "nc", sys.theta)
    J = np.vstack([np.eye(n), sys.A])
    total_b = restrict_two_form(mirror.b_two_form(), J)
    rhs = SymbolForm.from_matrix(2j * np.pi * total_b)
    res = {
        "closed_form": form_residual(Om, closed),
        "b_condition": form_residual(Om - exterior_d(w), rhs),
    }
    return DualCurvature(Om, closed, bool(res["b_condition"] <= tol), res)
