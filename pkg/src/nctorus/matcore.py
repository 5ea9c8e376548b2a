"""Dense matrix helpers, tolerances and lattice membership."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SingularBasis

REL_TOL = 1e-9
ABS_TOL = 1e-12
# Bases with a larger condition number are treated as singular.
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class Tolerance:
    rel: float = REL_TOL
    abs: float = ABS_TOL

    def bound(self, scale: float = 1.0) -> float:
        return self.abs + self.rel * max(1.0, float(scale))

    def ok(self, residual: float, scale: float = 1.0) -> bool:
        return float(residual) <= self.bound(scale)


DEFAULT_TOL = Tolerance()


def real_matrix(data, name: str = "matrix") -> np.ndarray:
    m = np.array(data, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional")
    return m


def complex_matrix(data) -> np.ndarray:
    return np.array(data, dtype=complex)


def is_symmetric(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.T), initial=0.0) <= tol * max(1.0, np.max(np.abs(m), initial=0.0)))


def is_antisymmetric(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m + m.T), initial=0.0) <= tol * max(1.0, np.max(np.abs(m), initial=0.0)))


def is_positive_definite(m: np.ndarray) -> bool:
    """Cholesky test on the symmetric part of a real matrix."""
    m = np.asarray(m, dtype=float)
    try:
        np.linalg.cholesky(0.5 * (m + m.T))
    except np.linalg.LinAlgError:
        return False
    return True


def max_abs(m) -> float:
    a = np.asarray(m)
    return float(np.max(np.abs(a), initial=0.0))


def near_integer_matrix(m, tol: float = 1e-9) -> bool:
    """True iff every entry lies within ``tol`` of an integer."""
    a = np.asarray(m, dtype=float)
    return bool(np.all(np.abs(a - np.round(a)) <= tol))


def distance_to_integers(m) -> float:
    a = np.asarray(m, dtype=float)
    return float(np.max(np.abs(a - np.round(a)), initial=0.0))


class LatticeBasis:
    """Lattice spanned by the integer column combinations of ``basis``."""

    def __init__(self, basis):
        b = np.array(basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise SingularBasis("lattice basis must be square")
        cond = np.linalg.cond(b) if b.size else 1.0
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise SingularBasis(f"lattice basis is numerically singular (cond={cond:.3g})")
        self.basis = b
        self.basis.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __repr__(self) -> str:
        return f"LatticeBasis({self.basis.tolist()!r})"


@dataclass(frozen=True)
class LatticeDecision:
    inside: bool
    coords: Optional[np.ndarray]
    residual: float


def lattice_member(v, lattice, tol: float = 1e-9) -> LatticeDecision:
    """Decide whether ``v`` is an integer combination of the basis columns."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not isinstance(lattice, LatticeBasis):
        lattice = LatticeBasis(lattice)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != lattice.dim:
        raise ValueError("vector and lattice dimension differ")
    u = np.linalg.solve(lattice.basis, v)
    rounded = np.round(u)
    residual = float(np.max(np.abs(u - rounded), initial=0.0))
    if residual <= tol:
        return LatticeDecision(True, rounded.astype(int), residual)
    return LatticeDecision(False, None, residual)


def complex_to_json(z) -> dict:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def complex_from_json(obj) -> complex:
    if isinstance(obj, dict):
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    return complex(obj)


def matrix_to_json(m) -> list:
    a = np.asarray(m)
    if np.iscomplexobj(a):
        return [[complex_to_json(z) for z in row] for row in a]
    return [[float(x) for x in row] for row in a]


def matrix_from_json(data, complex_entries: bool = False) -> np.ndarray:
    if complex_entries:
        return np.array([[complex_from_json(z) for z in row] for row in data], dtype=complex)
    return np.array(data, dtype=float)


def vector_to_json(v) -> list:
    a = np.asarray(v)
    if np.iscomplexobj(a):
        return [complex_to_json(z) for z in a]
    return [float(x) for x in a]
