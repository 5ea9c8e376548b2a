"""Moduli equivalence on both sides, the SYZ map, curvature matching and
Lagrangian intersection counts."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List

import numpy as np

from .errors import ContextMismatch, SingularDeformation, SingularSlope
from .matcore import LatticeBasis, lattice_member, max_abs

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class ModuliPoint:
    p: np.ndarray
    q: np.ndarray
    side: str  # "holo" or "symp"
    A: np.ndarray
    acal: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        n = self.A.shape[0]
        if self.side not in ("holo", "symp"):
            raise ValueError("side must be 'holo' or 'symp'")
        for name in ("p", "q"):
            if np.asarray(getattr(self, name)).shape != (n,):
                raise ValueError(f"{name} must have length {n}")
        for name in ("acal", "theta"):
            if np.asarray(getattr(self, name)).shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.q])


def moduli_point(p, q, side, A, acal=None, theta=None) -> ModuliPoint:
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    z = np.zeros((n, n))
    return ModuliPoint(
        np.asarray(p, dtype=float),
        np.asarray(q, dtype=float),
        side,
        A,
        z if acal is None else np.asarray(acal, dtype=float),
        z if theta is None else np.asarray(theta, dtype=float),
    )


def _squared_deformation(acal, theta) -> np.ndarray:
    acal = np.asarray(acal, dtype=float)
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    if abs(np.linalg.det(np.eye(n) + theta @ acal / TWO_PI)) <= 1e-12:
        raise SingularDeformation("det(I + theta Acal / 2pi) vanishes")
    ta = theta @ acal / TWO_PI
    return np.eye(n) - ta @ ta


def holo_lattice(A, acal, theta) -> LatticeBasis:
    """Basis [[D^T, O], [-A^T theta D^T, I]] with D = I - (theta Acal / 2pi)^2."""
    A = np.asarray(A, dtype=float)
    theta = np.asarray(theta, dtype=float)
    n = A.shape[0]
    D = _squared_deformation(acal, theta)
    return LatticeBasis(np.block([[D.T, np.zeros((n, n))], [-A.T @ theta @ D.T, np.eye(n)]]))


def _same_context(x: ModuliPoint, y: ModuliPoint) -> None:
    if x.side != y.side:
        raise ContextMismatch("points lie on different sides")
    for name in ("A", "acal", "theta"):
        a, b = getattr(x, name), getattr(y, name)
        if a.shape != b.shape or not np.allclose(a, b):
            raise ContextMismatch(f"points differ in {name}")


def moduli_equiv(x: ModuliPoint, y: ModuliPoint, tol: float = 1e-9) -> bool:
    _same_context(x, y)
    diff = y.vector - x.vector
    if x.side == "symp":
        return bool(np.all(np.abs(diff - np.round(diff)) <= tol))
    return lattice_member(diff, holo_lattice(x.A, x.acal, x.theta), tol).inside


def canonical_representative(x: ModuliPoint) -> ModuliPoint:
    """Reduce (p, q) into the fundamental cell [0,1)^{2n} of the relevant lattice."""
    n = x.A.shape[0]
    if x.side == "symp":
        v = x.vector - np.floor(x.vector)
    else:
        B = holo_lattice(x.A, x.acal, x.theta).basis
        u = np.linalg.solve(B, x.vector)
        v = B @ (u - np.floor(u))
    return replace(x, p=v[:n], q=v[n:])


def syz_map(x: ModuliPoint) -> ModuliPoint:
    """Forward (symp -> holo) or inverse (holo -> symp) SYZ transform of (p, q)."""
    D = _squared_deformation(x.acal, x.theta)
    if abs(np.linalg.det(D)) <= 1e-12:
        raise SingularDeformation("det(I - (theta Acal / 2pi)^2) vanishes")
    At = x.A.T @ x.theta
    if x.side == "symp":
        p2 = D.T @ x.p
        q2 = -At @ D.T @ x.p + x.q
        return replace(x, p=p2, q=q2, side="holo")
    p2 = np.linalg.solve(D.T, x.p)
    q2 = At @ x.p + x.q
    return replace(x, p=p2, q=q2, side="symp")


def curvature_match(acal, bcal, theta, tol: float = 1e-10) -> bool:
    """True iff Acal theta Acal = Bcal theta Bcal."""
    acal = np.asarray(acal, dtype=float)
    bcal = np.asarray(bcal, dtype=float)
    theta = np.asarray(theta, dtype=float)
    a = acal @ theta @ acal
    b = bcal @ theta @ bcal
    return bool(max_abs(a - b) <= tol * max(1.0, max_abs(a), max_abs(b)))


@dataclass(frozen=True)
class Intersections:
    points: List[np.ndarray]
    count: int


def intersection_points(A, p) -> Intersections:
    """Solutions of A x + p in Z^n with x in [0,1)^n, i.e. x = A^-1 (m - p) mod Z^n."""
    from .holoside import residue_classes

    A = np.asarray(A, dtype=float)
    p = np.asarray(p, dtype=float)
    det = np.linalg.det(A)
    if abs(det) < 0.5:
        raise SingularSlope("the slope matrix must be invertible")
    Ainv = np.linalg.inv(A)
    pts = {}
    for m in residue_classes(A):
        x = Ainv @ (m - p)
        x = x - np.floor(x + 1e-12)
        x[np.abs(x - 1.0) < 1e-12] = 0.0
        key = tuple(np.round(x, 9))
        pts.setdefault(key, x)
    points = [pts[k] for k in sorted(pts)]
    return Intersections(points, len(points))
