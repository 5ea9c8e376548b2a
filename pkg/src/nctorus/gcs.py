"""Generalized complex structures on flat 2n-tori as dense 4n x 4n matrices.

Frame order is (d/dx, d/dy, dx, dy); a transform with matrix M acts by
J -> M J M^-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import DimensionMismatch, UnknownIdentity
from .holoside import make_complex_torus
from .matcore import is_antisymmetric, is_symmetric, max_abs

IDENTITIES = (
    "gcs_mirror",
    "gcs_factorization",
    "fm_mirror_compat",
    "fm_as_bfield",
    "tau1_preserve_iff",
    "tau2_preserve_iff",
)
TRANSFORM_KINDS = ("mirror", "beta", "bfield", "bfield_tau1", "bfield_tau2", "fm_complex", "fm_symplectic")


def pairing(n: int) -> np.ndarray:
    """Natural pairing between vectors and covectors, [[O, I], [I, O]]."""
    Z, I = np.zeros((2 * n, 2 * n)), np.eye(2 * n)
    return np.block([[Z, I], [I, Z]])


@dataclass(frozen=True)
class GCStructure:
    n: int
    J: np.ndarray

    def square_residual(self) -> float:
        return max_abs(self.J @ self.J + np.eye(4 * self.n))

    def pairing_residual(self) -> float:
        P = pairing(self.n)
        return max_abs(self.J.T @ P @ self.J - P)

    def is_valid(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, max_abs(self.J)) ** 2
        return self.square_residual() <= tol * scale and self.pairing_residual() <= tol * scale


@dataclass(frozen=True)
class Transform:
    kind: str
    M: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0] // 4


def _blocks(rows) -> np.ndarray:
    return np.block(rows)


def _split(T):
    torus = make_complex_torus(T)
    return torus.n, torus.T.real, torus.T.imag


def build_IT(T) -> GCStructure:
    """Structure induced by the complex structure with period matrix T."""
    n, X, Y = _split(T)
    Yi = np.linalg.inv(Y)
    top = np.block([[-X @ Yi, -Y - X @ Yi @ X], [Yi, Yi @ X]])
    Z = np.zeros((2 * n, 2 * n))
    return GCStructure(n, np.block([[top, Z], [Z, -top.T]]))


def build_mirror_IT(T) -> GCStructure:
    """The mirror structure written out block by block (independent of M_(n))."""
    n, X, Y = _split(T)
    Yi = np.linalg.inv(Y)
    Z = np.zeros((n, n))
    J = _blocks([
        [-X @ Yi, Z, Z, -Y - X @ Yi @ X],
        [Z, -X.T @ Yi.T, Y.T + X.T @ Yi.T @ X.T, Z],
        [Z, -Yi.T, Yi.T @ X.T, Z],
        [Yi, Z, Z, Yi @ X],
    ])
    return GCStructure(n, J)


def mirror_matrix(n: int) -> np.ndarray:
    """M_(n): swaps the d/dy and dy blocks; its own inverse."""
    I, Z = np.eye(n), np.zeros((n, n))
    return _blocks([[I, Z, Z, Z], [Z, Z, Z, I], [Z, Z, I, Z], [Z, I, Z, Z]])


def bfield_matrix(B) -> np.ndarray:
    """[[I, O], [-B, I]] for a 2n x 2n two-form matrix B."""
    B = np.asarray(B, dtype=float)
    m = B.shape[0]
    return np.block([[np.eye(m), np.zeros((m, m))], [-B, np.eye(m)]])


def beta_matrix(theta) -> np.ndarray:
    """Left conjugator of the beta-field transform by the bivector theta on y."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    M = np.eye(4 * n)
    M[n:2 * n, 3 * n:] = -theta
    return M


def fm_complex_matrix(n: int) -> np.ndarray:
    I, Z = np.eye(n), np.zeros((n, n))
    return _blocks([[Z, Z, Z, I], [Z, Z, -I, Z], [Z, I, Z, Z], [-I, Z, Z, Z]])


def fm_symplectic_matrix(n: int) -> np.ndarray:
    I, Z = np.eye(n), np.zeros((n, n))
    return _blocks([[Z, I, Z, Z], [-I, Z, Z, Z], [Z, Z, Z, I], [Z, Z, -I, Z]])


def fm_symplectic_action(n: int) -> np.ndarray:
    """The coordinate map xv -> [[O, I], [-I, O]] xv behind the symplectic transform."""
    I, Z = np.eye(n), np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


def tau1_bfield(tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    n = tau.shape[0]
    B = np.zeros((2 * n, 2 * n))
    B[:n, :n] = tau
    return B


def tau2_bfield(tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    n = tau.shape[0]
    B = np.zeros((2 * n, 2 * n))
    B[:n, n:] = tau
    B[n:, :n] = -tau.T
    return B


def make_transform(kind: str, n: Optional[int] = None, param=None) -> Transform:
    if kind not in TRANSFORM_KINDS:
        raise ValueError(f"unknown transform kind {kind!r}")
    if param is not None:
        param = np.asarray(param, dtype=float)
        n = param.shape[0] if kind != "bfield" else param.shape[0] // 2
    if n is None:
        raise ValueError("dimension is required")
    if kind == "mirror":
        M = mirror_matrix(n)
    elif kind == "beta":
        M = beta_matrix(param)
    elif kind == "bfield":
        M = bfield_matrix(param)
    elif kind == "bfield_tau1":
        if not is_antisymmetric(param):
            raise ValueError("tau must be antisymmetric")
        M = bfield_matrix(tau1_bfield(param))
    elif kind == "bfield_tau2":
        M = bfield_matrix(tau2_bfield(param))
    elif kind == "fm_complex":
        M = fm_complex_matrix(n)
    else:
        M = fm_symplectic_matrix(n)
    return Transform(kind, M)


def conjugate(M, J) -> np.ndarray:
    return M @ J @ np.linalg.inv(M)


def apply_transform(J: GCStructure, t: Transform, check: bool = True) -> GCStructure:
    if t.M.shape != J.J.shape:
        raise DimensionMismatch(f"transform is {t.M.shape}, structure is {J.J.shape}")
    out = GCStructure(J.n, conjugate(t.M, J.J))
    if check and out.square_residual() > 1e-9 * max(1.0, max_abs(out.J)) ** 2:
        raise ArithmeticError("transformed matrix no longer squares to -I")
    return out


# ---------------------------------------------------------------- identities


@dataclass
class IdentityReport:
    name: str
    passed: bool
    max_entry_residual: float
    details: Dict[str, float] = field(default_factory=dict)


def _factorized_mirror(T) -> Dict[str, np.ndarray]:
    """The three-factor product together with the two routes to -(T^-1)^T."""
    n, X, Y = _split(T)
    Yi = np.linalg.inv(Y)
    K = np.linalg.inv(Y + X @ Yi @ X)
    re = -K.T @ X.T @ Yi.T
    im = K.T
    I, Z = np.eye(n), np.zeros((n, n))
    left = _blocks([[I, Z, Z, Z], [Z, I, Z, Z], [Z, -re, I, Z], [re.T, Z, Z, I]])
    mid = _blocks([
        [Z, Z, Z, -np.linalg.inv(im).T],
        [Z, Z, np.linalg.inv(im), Z],
        [Z, -im, Z, Z],
        [im.T, Z, Z, Z],
    ])
    right = _blocks([[I, Z, Z, Z], [Z, I, Z, Z], [Z, re, I, Z], [-re.T, Z, Z, I]])
    direct = -np.linalg.inv(make_complex_torus(T).T).T
    return {"product": left @ mid @ right, "re": re, "im": im, "direct": direct}


def _IT_theta(T, theta) -> np.ndarray:
    return conjugate(beta_matrix(theta), build_IT(T).J)


def _mirror_IT_theta(T, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    E = np.eye(4 * n)
    E[3 * n:, n:2 * n] = -theta
    return conjugate(E, build_mirror_IT(T).J)


def _lower_left(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    B = np.zeros((2 * n, 2 * n))
    B[:n, :n] = theta
    return bfield_matrix(B)


def _preserve_residual(T, B) -> float:
    J = build_IT(T).J
    return max_abs(conjugate(bfield_matrix(B), J) - J)


def _iff_family(T, kind: str, tau, samples: int, seed: int):
    """Yields (tau, expected_equal) pairs for the biconditional checks."""
    n = make_complex_torus(T).n
    if tau is not None:
        tau = np.asarray(tau, dtype=float)
        yield tau, _null_condition(T, kind, tau)
        return
    yield np.zeros((n, n)), True
    X, Y = np.asarray(T).real, np.asarray(T).imag
    if kind == "tau2" and is_symmetric(X) and is_symmetric(Y):
        yield 0.7 * np.eye(n), True
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        t = rng.normal(size=(n, n))
        if kind == "tau1":
            t = t - t.T
        if n == 1 and kind == "tau1":
            continue
        yield t, _null_condition(T, kind, t)


def _null_condition(T, kind: str, tau) -> bool:
    if kind == "tau1":
        return bool(max_abs(tau) <= 1e-12)
    return is_symmetric(tau.T @ np.asarray(T, dtype=complex), 1e-12)


def verify_identity(name: str, params: Optional[dict] = None, tol: float = 1e-9) -> IdentityReport:
    """Check one of the named matrix identities; see IDENTITIES."""
    params = dict(params or {})
    if name not in IDENTITIES:
        raise UnknownIdentity(name)
    T = np.asarray(params.get("T", 1j), dtype=complex)
    if T.ndim == 0:
        T = T.reshape(1, 1)
    n = T.shape[0]
    theta = np.asarray(params.get("theta", np.zeros((n, n))), dtype=float)
    d: Dict[str, float] = {}
    if name == "gcs_mirror":
        M = mirror_matrix(n)
        d["mirror"] = max_abs(M @ build_IT(T).J @ M - build_mirror_IT(T).J)
    elif name == "gcs_factorization":
        f = _factorized_mirror(T)
        d["product"] = max_abs(f["product"] - build_mirror_IT(T).J)
        d["real_part"] = max_abs(f["re"] - f["direct"].real)
        d["imag_part"] = max_abs(f["im"] - f["direct"].imag)
    elif name == "fm_mirror_compat":
        M, F, G = mirror_matrix(n), fm_complex_matrix(n), fm_symplectic_matrix(n)
        lhs = M @ conjugate(F, _IT_theta(T, theta)) @ M
        d["compat"] = max_abs(lhs - conjugate(G, _mirror_IT_theta(T, theta)))
    elif name == "fm_as_bfield":
        F, G, E = fm_complex_matrix(n), fm_symplectic_matrix(n), _lower_left(theta)
        sym_hat = conjugate(G, build_mirror_IT(T).J)
        cx_hat = conjugate(F, build_IT(T).J)
        d["symplectic"] = max_abs(conjugate(G, _mirror_IT_theta(T, theta)) - conjugate(E, sym_hat))
        d["complex"] = max_abs(conjugate(F, _IT_theta(T, theta)) - conjugate(E, cx_hat))
    else:
        kind = "tau1" if name == "tau1_preserve_iff" else "tau2"
        build = tau1_bfield if kind == "tau1" else tau2_bfield
        mismatches = 0
        worst_null = 0.0
        least_other = np.inf
        for k, (tau, null) in enumerate(_iff_family(T, kind, params.get("tau"), int(params.get("samples", 20)), int(params.get("seed", 0)))):
            r = _preserve_residual(T, build(tau))
            if null:
                worst_null = max(worst_null, r)
                mismatches += r > tol
            else:
                least_other = min(least_other, r)
                mismatches += r <= 1e-6
        d["null_residual"] = worst_null
        if np.isfinite(least_other):
            d["min_nonnull_residual"] = float(least_other)
        d["mismatches"] = float(mismatches)
        return IdentityReport(name, mismatches == 0, worst_null, d)
    worst = max(d.values())
    return IdentityReport(name, bool(worst <= tol), float(worst), d)
