"""Polynomial times exponential-quadratic symbols and their Moyal calculus.

A term is ``P(w) * exp(1/2 w^T S w + l^T w + kappa)`` with ``w = (x, y)``.
Sums of terms are held by :class:`Symbol`; differential forms with symbol
coefficients by :class:`SymbolForm`.

The star product is taken at hbar = -i with the Poisson pairing acting on
the y-variables only:

    f * g = f exp(<-d_y^T K ->d_y) g,    K = -(i / 4 pi) theta.
"""

from __future__ import annotations

import functools
import itertools
import math
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DegreeOverflow, MoyalNotClosed, SingularT
from .matcore import complex_from_json, complex_to_json

MAX_DEGREE = 4
_KEY_RTOL = 1e-10
_AFFINE_TOL = 1e-14

Poly = Dict[Tuple[int, ...], complex]


# ---------------------------------------------------------------- polynomials


def _poly_clean(p: Mapping) -> Poly:
    return {k: complex(c) for k, c in p.items() if c != 0}


def _poly_degree(p: Mapping) -> int:
    return max((sum(k) for k in p), default=0)


def _poly_add(p: Mapping, q: Mapping, s: complex = 1.0) -> Poly:
    out = dict(p)
    for k, c in q.items():
        out[k] = out.get(k, 0) + s * c
    return _poly_clean(out)


def _poly_mul(p: Mapping, q: Mapping) -> Poly:
    out: Poly = {}
    for k1, c1 in p.items():
        for k2, c2 in q.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            out[k] = out.get(k, 0) + c1 * c2
    return _poly_clean(out)


def _poly_scale(p: Mapping, s: complex) -> Poly:
    return _poly_clean({k: s * c for k, c in p.items()})


def _poly_deriv(p: Mapping, b: int) -> Poly:
    out: Poly = {}
    for k, c in p.items():
        if k[b]:
            kk = list(k)
            kk[b] -= 1
            kk = tuple(kk)
            out[kk] = out.get(kk, 0) + c * k[b]
    return _poly_clean(out)


def _poly_linear(coeffs, const, nvars: int) -> Poly:
    out: Poly = {}
    if const != 0:
        out[(0,) * nvars] = complex(const)
    for a in range(nvars):
        if coeffs[a] != 0:
            k = [0] * nvars
            k[a] = 1
            out[tuple(k)] = complex(coeffs[a])
    return out


def _poly_eval(p: Mapping, w: np.ndarray) -> complex:
    total = 0j
    for k, c in p.items():
        term = c
        for a, e in enumerate(k):
            if e:
                term *= w[a] ** e
        total += term
    return total


def _poly_compose(p: Mapping, M: np.ndarray, v: np.ndarray, nvars: int) -> Poly:
    """Return ``P(M w + v)``."""
    lin = [_poly_linear(M[a], v[a], nvars) for a in range(nvars)]
    cache: Dict[Tuple[int, int], Poly] = {}
    one = {(0,) * nvars: 1.0 + 0j}

    def power(a: int, e: int) -> Poly:
        if e == 0:
            return one
        if (a, e) not in cache:
            cache[(a, e)] = _poly_mul(power(a, e - 1), lin[a])
        return cache[(a, e)]

    out: Poly = {}
    for k, c in p.items():
        term: Poly = {(0,) * nvars: c}
        for a, e in enumerate(k):
            if e:
                term = _poly_mul(term, power(a, e))
        out = _poly_add(out, term)
    return out


def _check_degree(p: Mapping) -> None:
    d = _poly_degree(p)
    if d > MAX_DEGREE:
        raise DegreeOverflow(f"polynomial degree {d} exceeds the cap {MAX_DEGREE}")


# ---------------------------------------------------------------- terms


class QuadExponent:
    """E(w) = 1/2 w^T S w + l^T w + kappa with S symmetrized on construction."""

    __slots__ = ("S", "l", "kappa")

    def __init__(self, S, l, kappa=0.0):
        S = np.array(S, dtype=complex)
        self.S = 0.5 * (S + S.T)
        self.l = np.array(l, dtype=complex).reshape(-1)
        self.kappa = complex(kappa)
        if self.S.shape != (self.l.size, self.l.size):
            raise ValueError("exponent shapes are inconsistent")

    @property
    def nvars(self) -> int:
        return self.l.size

    def value(self, w: np.ndarray) -> complex:
        return 0.5 * w @ self.S @ w + self.l @ w + self.kappa


class PolyExpSymbol:
    """A single term ``P(w) exp(E(w))``.

    The imaginary part of kappa is folded into the polynomial so that
    kappa is real after construction.
    """

    __slots__ = ("poly", "exponent")

    def __init__(self, poly: Mapping, exponent: QuadExponent):
        poly = _poly_clean(poly)
        _check_degree(poly)
        ph = exponent.kappa.imag
        if ph != 0.0:
            poly = _poly_scale(poly, complex(math.cos(ph), math.sin(ph)))
            exponent = QuadExponent(exponent.S, exponent.l, exponent.kappa.real)
        for k in poly:
            if len(k) != exponent.nvars:
                raise ValueError("multi-index length does not match the number of variables")
        self.poly = poly
        self.exponent = exponent

    @property
    def nvars(self) -> int:
        return self.exponent.nvars

    @property
    def S(self) -> np.ndarray:
        return self.exponent.S

    @property
    def l(self) -> np.ndarray:
        return self.exponent.l

    @property
    def kappa(self) -> float:
        return self.exponent.kappa.real

    def key(self) -> np.ndarray:
        return np.concatenate([self.S.ravel(), self.l])

    def value(self, w) -> complex:
        w = np.asarray(w, dtype=float)
        return _poly_eval(self.poly, w) * np.exp(self.exponent.value(w))

    def values(self, W: np.ndarray) -> np.ndarray:
        """Evaluate at each row of ``W``."""
        ex = self.exponent
        E = 0.5 * np.einsum("ia,ab,ib->i", W, ex.S, W) + W @ ex.l + ex.kappa
        P = np.zeros(W.shape[0], dtype=complex)
        for k, c in self.poly.items():
            P += c * np.prod(W ** np.array(k), axis=1)
        return P * np.exp(E)

    def magnitude(self) -> float:
        if not self.poly:
            return 0.0
        return max(abs(c) for c in self.poly.values()) * math.exp(self.kappa)

    def to_json(self) -> dict:
        return {
            "poly": [
                {"multi_index": list(k), "coeff": complex_to_json(c)}
                for k, c in sorted(self.poly.items())
            ],
            "S": [[complex_to_json(z) for z in row] for row in self.S],
            "l": [complex_to_json(z) for z in self.l],
            "kappa": complex_to_json(self.kappa),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PolyExpSymbol":
        l = np.array([complex_from_json(z) for z in obj["l"]], dtype=complex)
        S = np.array([[complex_from_json(z) for z in row] for row in obj["S"]], dtype=complex)
        if S.size == 0:
            S = np.zeros((l.size, l.size), dtype=complex)
        kappa = complex_from_json(obj.get("kappa", 0.0))
        poly = {tuple(int(i) for i in item["multi_index"]): complex_from_json(item["coeff"]) for item in obj["poly"]}
        return cls(poly, QuadExponent(S, l, kappa))


def _term_mul(a: PolyExpSymbol, b: PolyExpSymbol) -> PolyExpSymbol:
    return PolyExpSymbol(
        _poly_mul(a.poly, b.poly),
        QuadExponent(a.S + b.S, a.l + b.l, a.kappa + b.kappa),
    )


def _term_deriv(t: PolyExpSymbol, b: int) -> Tuple[Poly, QuadExponent]:
    n = t.nvars
    grad = _poly_linear(t.S[b], t.l[b], n)
    poly = _poly_add(_poly_deriv(t.poly, b), _poly_mul(t.poly, grad))
    return poly, t.exponent


def _term_substitute(t: PolyExpSymbol, M: np.ndarray, v: np.ndarray) -> PolyExpSymbol:
    S, l = t.S, t.l
    S2 = M.T @ S @ M
    l2 = M.T @ (S @ v + l)
    k2 = t.exponent.kappa + 0.5 * v @ S @ v + l @ v
    return PolyExpSymbol(_poly_compose(t.poly, M, v, t.nvars), QuadExponent(S2, l2, k2))


# ---------------------------------------------------------------- sums


class Symbol:
    """A finite sum of :class:`PolyExpSymbol` terms with distinct exponents."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Iterable[PolyExpSymbol] = ()):
        self.nvars = int(nvars)
        self.terms: Tuple[PolyExpSymbol, ...] = tuple(_merge(self.nvars, terms))

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Symbol":
        return cls(nvars)

    @classmethod
    def constant(cls, c, nvars: int) -> "Symbol":
        return cls.poly({(0,) * nvars: c}, nvars)

    @classmethod
    def poly(cls, poly: Mapping, nvars: int) -> "Symbol":
        ex = QuadExponent(np.zeros((nvars, nvars)), np.zeros(nvars))
        return cls(nvars, [PolyExpSymbol(poly, ex)])

    @classmethod
    def linear(cls, coeffs, const=0.0) -> "Symbol":
        coeffs = np.asarray(coeffs, dtype=complex)
        n = coeffs.size
        return cls.poly(_poly_linear(coeffs, const, n), n)

    @classmethod
    def exp_quadratic(cls, S, l, kappa=0.0, poly: Optional[Mapping] = None) -> "Symbol":
        l = np.asarray(l, dtype=complex)
        n = l.size
        if poly is None:
            poly = {(0,) * n: 1.0}
        return cls(n, [PolyExpSymbol(poly, QuadExponent(S, l, kappa))])

    @classmethod
    def exp_linear(cls, l, kappa=0.0) -> "Symbol":
        l = np.asarray(l, dtype=complex)
        return cls.exp_quadratic(np.zeros((l.size, l.size)), l, kappa)

    # arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "Symbol":
        if isinstance(other, Symbol):
            if other.nvars != self.nvars:
                raise ValueError("symbols live on different numbers of variables")
            return other
        if isinstance(other, PolyExpSymbol):
            return Symbol(self.nvars, [other])
        return Symbol.constant(other, self.nvars)

    def __add__(self, other) -> "Symbol":
        other = self._coerce(other)
        return Symbol(self.nvars, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> "Symbol":
        return self.scale(-1.0)

    def __sub__(self, other) -> "Symbol":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Symbol":
        return self._coerce(other) - self

    def scale(self, s: complex) -> "Symbol":
        s = complex(s)
        if s == 0:
            return Symbol(self.nvars)
        return Symbol(self.nvars, [PolyExpSymbol(_poly_scale(t.poly, s), t.exponent) for t in self.terms])

    def __mul__(self, other) -> "Symbol":
        """Pointwise product."""
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        other = self._coerce(other)
        return Symbol(self.nvars, [_term_mul(a, b) for a in self.terms for b in other.terms])

    __rmul__ = __mul__

    # calculus ----------------------------------------------------------
    def derivative(self, b: int) -> "Symbol":
        out = []
        for t in self.terms:
            poly, ex = _term_deriv(t, b)
            out.append(PolyExpSymbol(poly, ex))
        return Symbol(self.nvars, out)

    def directional(self, vec) -> "Symbol":
        out = Symbol(self.nvars)
        for b, c in enumerate(vec):
            if c != 0:
                out = out + self.derivative(b).scale(c)
        return out

    def substitute(self, M, v=None) -> "Symbol":
        """Return the symbol ``w -> f(M w + v)``."""
        M = np.asarray(M, dtype=complex)
        v = np.zeros(self.nvars, dtype=complex) if v is None else np.asarray(v, dtype=complex)
        return Symbol(self.nvars, [_term_substitute(t, M, v) for t in self.terms])

    def shift(self, v) -> "Symbol":
        """Return the translate ``w -> f(w + v)``."""
        return self.substitute(np.eye(self.nvars), v)

    # inspection --------------------------------------------------------
    def value(self, w) -> complex:
        w = np.asarray(w, dtype=float)
        return sum((t.value(w) for t in self.terms), 0j)

    def values(self, W) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        out = np.zeros(W.shape[0], dtype=complex)
        for t in self.terms:
            out += t.values(W)
        return out

    def norm(self) -> float:
        """Largest coefficient magnitude; zero iff the symbol vanishes identically."""
        return max((t.magnitude() for t in self.terms), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm() <= tol

    def is_pure_exponential(self) -> bool:
        if len(self.terms) != 1:
            return False
        t = self.terms[0]
        return len(t.poly) == 1 and sum(next(iter(t.poly))) == 0

    def constant_value(self) -> complex:
        """Value of a symbol known to be constant; raises otherwise."""
        if not self.terms:
            return 0j
        if len(self.terms) == 1:
            t = self.terms[0]
            if not np.any(t.S) and not np.any(t.l) and all(sum(k) == 0 for k in t.poly):
                return sum(t.poly.values(), 0j) * math.exp(t.kappa)
        raise ValueError("symbol is not constant")

    def is_constant(self) -> bool:
        try:
            self.constant_value()
        except ValueError:
            return False
        return True

    def to_json(self) -> list:
        return [t.to_json() for t in self.terms]

    @classmethod
    def from_json(cls, obj, nvars: Optional[int] = None) -> "Symbol":
        items = obj if isinstance(obj, list) else [obj]
        terms = [PolyExpSymbol.from_json(o) for o in items]
        if nvars is None:
            if not terms:
                raise ValueError("cannot infer the number of variables of an empty symbol")
            nvars = terms[0].nvars
        return cls(nvars, terms)

    def __repr__(self) -> str:
        return f"Symbol(nvars={self.nvars}, terms={len(self.terms)})"


@functools.lru_cache(maxsize=None)
def _projection(dim: int) -> np.ndarray:
    return np.random.default_rng(dim).random(dim) + 0.5


def _merge(nvars: int, terms: Iterable[PolyExpSymbol]) -> list:
    terms = [t for t in terms if t.poly]
    for t in terms:
        if t.nvars != nvars:
            raise ValueError("term has the wrong number of variables")
    m = len(terms)
    if m <= 1:
        return terms
    K = np.array([t.key() for t in terms])
    R = np.concatenate([K.real, K.imag], axis=1)
    # Near-equal keys have near-equal projections; only a window is searched.
    r = _projection(R.shape[1])
    proj = R @ r
    order = np.argsort(proj, kind="stable")
    sp = proj[order]
    width = _KEY_RTOL * (1.0 + np.max(np.abs(R))) * float(np.sum(r)) * 2.0
    lo = np.searchsorted(sp, proj - width, side="left")
    hi = np.searchsorted(sp, proj + width, side="right")
    rep = np.full(m, -1)
    out: list = []
    slot = {}
    for i in range(m):
        cand = order[lo[i]:hi[i]]
        cand = cand[(cand < i) & (rep[cand] == cand)] if cand.size > 1 else cand[:0]
        target = -1
        if cand.size:
            Kc = K[cand]
            close = np.all(np.abs(Kc - K[i]) <= _KEY_RTOL * (1.0 + np.abs(Kc)), axis=1)
            hit = np.flatnonzero(close)
            if hit.size:
                target = int(cand[hit[np.argmin(cand[hit])]])
        if target < 0:
            rep[i] = i
            slot[i] = len(out)
            out.append(terms[i])
            continue
        rep[i] = target
        u, t = out[slot[target]], terms[i]
        if u.kappa == t.kappa:
            poly = _poly_add(u.poly, t.poly)
            kap = u.kappa
        else:
            kap = max(u.kappa, t.kappa)
            poly = _poly_add(
                _poly_scale(u.poly, math.exp(u.kappa - kap)),
                _poly_scale(t.poly, math.exp(t.kappa - kap)),
            )
        out[slot[target]] = PolyExpSymbol(poly, QuadExponent(u.S, u.l, kap))
    return [t for t in out if t.poly]


def as_symbol(f, nvars: Optional[int] = None) -> Symbol:
    if isinstance(f, Symbol):
        return f
    if isinstance(f, PolyExpSymbol):
        return Symbol(f.nvars, [f])
    if nvars is None:
        raise ValueError("nvars is required to lift a scalar to a symbol")
    return Symbol.constant(f, nvars)


def eval_symbol(f, x, y=None) -> complex:
    """Evaluate a symbol at ``(x, y)``; pass ``y=None`` for symbols in one block of variables."""
    w = np.asarray(x, dtype=float) if y is None else np.concatenate([np.asarray(x, float), np.asarray(y, float)])
    if isinstance(f, (Symbol, PolyExpSymbol)):
        return f.value(w)
    return complex(f)


def symbol_residual(a, b) -> float:
    """Coefficient-level distance between two symbols."""
    a = as_symbol(a, getattr(b, "nvars", None))
    return (a - as_symbol(b, a.nvars)).norm()


# ---------------------------------------------------------------- Moyal star


def star_matrix(theta) -> np.ndarray:
    """K = -(i / 4 pi) theta, the pairing matrix of the star product."""
    return -1j / (4 * np.pi) * np.asarray(theta, dtype=float)


def _y_multi_indices(n: int, max_deg: int):
    for d in range(max_deg + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            mu = [0] * n
            for j in combo:
                mu[j] += 1
            yield tuple(mu)


def _is_affine_in_y(t: PolyExpSymbol, n: int) -> bool:
    syy = t.S[n:, n:]
    scale = 1.0 + float(np.max(np.abs(t.S), initial=0.0))
    return float(np.max(np.abs(syy), initial=0.0)) <= _AFFINE_TOL * scale


def _bopp(f: PolyExpSymbol, g: Symbol, K: np.ndarray, n: int) -> Symbol:
    """f * g for f with exponent affine in y (translation of g in y)."""
    N = 2 * n
    Kt = K.T
    C = Kt @ f.S[n:, :n]
    c0 = Kt @ f.l[n:]
    M = np.eye(N, dtype=complex)
    M[n:, :n] = C
    v = np.zeros(N, dtype=complex)
    v[n:] = c0
    exp_f = f.exponent

    ydeg = max((sum(k[n:]) for k in f.poly), default=0)
    derived: Dict[Tuple[int, ...], Symbol] = {(0,) * n: g}
    out = Symbol(N)
    for mu in _y_multi_indices(n, ydeg):
        dp = dict(f.poly)
        for j, e in enumerate(mu):
            for _ in range(e):
                dp = _poly_deriv(dp, n + j)
        if not dp:
            continue
        if mu not in derived:
            j = next(i for i, e in enumerate(mu) if e)
            prev = list(mu)
            prev[j] -= 1
            prev = tuple(prev)
            direction = np.zeros(N, dtype=complex)
            direction[n:] = K[j]
            derived[mu] = derived[prev].directional(direction)
        fact = math.prod(math.factorial(e) for e in mu)
        left = Symbol(N, [PolyExpSymbol(_poly_scale(dp, 1.0 / fact), exp_f)])
        out = out + left * derived[mu].substitute(M, v)
    return out


def moyal_star(f, g, theta) -> Symbol:
    """Exact Moyal product at hbar = -i on symbols over w = (x, y).

    Supported when, termwise, one factor has an exponent affine in y; the
    polynomial parts may be arbitrary (the y-series terminates).  With
    ``theta`` zero or ``None`` the pointwise product is returned.
    """
    if isinstance(f, (int, float, complex)) and isinstance(g, (int, float, complex)):
        return complex(f) * complex(g)
    nv = getattr(f, "nvars", None) or getattr(g, "nvars", None)
    f = as_symbol(f, nv)
    g = as_symbol(g, nv)
    if theta is None or not np.any(np.asarray(theta)):
        return f * g
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    if f.nvars != 2 * n or g.nvars != 2 * n:
        raise ValueError("theta does not match the symbol dimension")
    K = star_matrix(theta)
    collected: list = []
    for a in f.terms:
        for b in g.terms:
            if _is_affine_in_y(a, n):
                collected.extend(_bopp(a, Symbol(2 * n, [b]), K, n).terms)
            elif _is_affine_in_y(b, n):
                # f exp(<-K->) g equals g exp(<-K^T->) f
                collected.extend(_bopp(b, Symbol(2 * n, [a]), K.T, n).terms)
            else:
                raise MoyalNotClosed("both factors have exponents quadratic in y")
    return Symbol(2 * n, collected)


def star_inverse(j, theta) -> Symbol:
    """Star inverse of a pure exponential whose exponent is affine in y."""
    j = as_symbol(j)
    if not j.is_pure_exponential():
        raise MoyalNotClosed("star inverse is only available for pure exponentials")
    t = j.terms[0]
    if theta is not None and np.any(theta) and not _is_affine_in_y(t, np.asarray(theta).shape[0]):
        raise MoyalNotClosed("exponent is quadratic in y")
    c = next(iter(t.poly.values()))
    ex = QuadExponent(-t.S, -t.l, -t.kappa)
    inv = Symbol(j.nvars, [PolyExpSymbol({(0,) * j.nvars: 1.0 / c}, ex)])
    return inv


# ---------------------------------------------------------------- forms


def _sort_sign(idx: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, tuple(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class SymbolForm:
    """Differential form of degree 0, 1 or 2 with :class:`Symbol` coefficients.

    Keys are increasing index tuples into the coordinate list ``w``; for
    symbols on (x, y) the basis is ``dx_1..dx_n, dy_1..dy_n``.
    """

    __slots__ = ("degree", "nvars", "coeffs")

    def __init__(self, degree: int, nvars: int, coeffs: Optional[Mapping] = None):
        if degree > 2:
            raise DegreeOverflow("forms of degree above 2 are not represented")
        self.degree = int(degree)
        self.nvars = int(nvars)
        out: Dict[Tuple[int, ...], Symbol] = {}
        for key, c in (coeffs or {}).items():
            key = tuple(key)
            if len(key) != degree:
                raise ValueError("basis key has the wrong degree")
            sign, skey = _sort_sign(key)
            if sign == 0:
                continue
            c = as_symbol(c, nvars).scale(sign)
            out[skey] = out[skey] + c if skey in out else c
        self.coeffs = {k: v for k, v in sorted(out.items()) if v.terms}

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls, degree: int, nvars: int) -> "SymbolForm":
        return cls(degree, nvars)

    @classmethod
    def scalar(cls, f) -> "SymbolForm":
        f = as_symbol(f)
        return cls(0, f.nvars, {(): f})

    @classmethod
    def from_vector(cls, coeffs: Sequence, nvars: Optional[int] = None) -> "SymbolForm":
        nvars = len(coeffs) if nvars is None else nvars
        return cls(1, nvars, {(a,): as_symbol(c, nvars) for a, c in enumerate(coeffs) if _nonzero(c)})

    @classmethod
    def linear_one_form(cls, L, c) -> "SymbolForm":
        """The 1-form sum_b (sum_a w_a L[a, b] + c[b]) dw_b."""
        L = np.asarray(L, dtype=complex)
        c = np.asarray(c, dtype=complex)
        nv = c.size
        return cls(1, nv, {(b,): Symbol.linear(L[:, b], c[b]) for b in range(nv)})

    @classmethod
    def from_matrix(cls, N) -> "SymbolForm":
        """The constant 2-form dw^T N dw = sum_{a<b} (N_ab - N_ba) dw_a ^ dw_b."""
        N = np.asarray(N, dtype=complex)
        nv = N.shape[0]
        coeffs = {}
        for a in range(nv):
            for b in range(a + 1, nv):
                c = N[a, b] - N[b, a]
                if c != 0:
                    coeffs[(a, b)] = Symbol.constant(c, nv)
        return cls(2, nv, coeffs)

    # arithmetic --------------------------------------------------------
    def _check(self, other: "SymbolForm") -> None:
        if other.degree != self.degree or other.nvars != self.nvars:
            raise ValueError("forms differ in degree or dimension")

    def __add__(self, other: "SymbolForm") -> "SymbolForm":
        self._check(other)
        coeffs = dict(self.coeffs)
        for k, v in other.coeffs.items():
            coeffs[k] = coeffs[k] + v if k in coeffs else v
        return SymbolForm(self.degree, self.nvars, coeffs)

    def __neg__(self) -> "SymbolForm":
        return self.scale(-1.0)

    def __sub__(self, other: "SymbolForm") -> "SymbolForm":
        return self + (-other)

    def scale(self, s) -> "SymbolForm":
        return SymbolForm(self.degree, self.nvars, {k: v.scale(s) for k, v in self.coeffs.items()})

    def map(self, fn) -> "SymbolForm":
        return SymbolForm(self.degree, self.nvars, {k: fn(v) for k, v in self.coeffs.items()})

    def shift(self, v) -> "SymbolForm":
        return self.map(lambda c: c.shift(v))

    def coefficient(self, key) -> Symbol:
        sign, skey = _sort_sign(key)
        if sign == 0 or skey not in self.coeffs:
            return Symbol(self.nvars)
        return self.coeffs[skey].scale(sign)

    def norm(self) -> float:
        return max((c.norm() for c in self.coeffs.values()), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm() <= tol

    def constant_matrix(self) -> np.ndarray:
        """Antisymmetric C with form = sum_{a<b} C_ab dw_a ^ dw_b (constant 2-forms)."""
        if self.degree != 2:
            raise ValueError("constant_matrix needs a 2-form")
        C = np.zeros((self.nvars, self.nvars), dtype=complex)
        for (a, b), c in self.coeffs.items():
            C[a, b] = c.constant_value()
            C[b, a] = -C[a, b]
        return C

    def constant_vector(self) -> np.ndarray:
        if self.degree != 1:
            raise ValueError("constant_vector needs a 1-form")
        v = np.zeros(self.nvars, dtype=complex)
        for (a,), c in self.coeffs.items():
            v[a] = c.constant_value()
        return v

    def values(self, w) -> Dict[Tuple[int, ...], complex]:
        return {k: c.value(w) for k, c in self.coeffs.items()}

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "nvars": self.nvars,
            "coefficients": [{"basis": list(k), "symbol": v.to_json()} for k, v in self.coeffs.items()],
        }

    def __repr__(self) -> str:
        return f"SymbolForm(degree={self.degree}, nvars={self.nvars}, terms={len(self.coeffs)})"


def _nonzero(c) -> bool:
    if isinstance(c, (Symbol, PolyExpSymbol)):
        return True
    return complex(c) != 0


def form_residual(a: SymbolForm, b: SymbolForm) -> float:
    return (a - b).norm()


def wedge_star(a, b, theta=None) -> SymbolForm:
    """Wedge product whose coefficients are multiplied with the Moyal star."""
    if not isinstance(a, SymbolForm):
        a = SymbolForm.scalar(a)
    if not isinstance(b, SymbolForm):
        b = SymbolForm.scalar(b)
    deg = a.degree + b.degree
    if deg > 2:
        raise DegreeOverflow(f"wedge product of degree {deg}")
    nv = a.nvars
    coeffs: Dict[Tuple[int, ...], Symbol] = {}
    for ka, ca in a.coeffs.items():
        for kb, cb in b.coeffs.items():
            sign, key = _sort_sign(ka + kb)
            if sign == 0:
                continue
            prod = moyal_star(ca, cb, theta).scale(sign)
            coeffs[key] = coeffs[key] + prod if key in coeffs else prod
    return SymbolForm(deg, nv, coeffs)


def exterior_d(w) -> SymbolForm:
    """Exterior derivative of a symbol (0-form) or a 1-form."""
    if not isinstance(w, SymbolForm):
        w = SymbolForm.scalar(w)
    if w.degree >= 2:
        raise DegreeOverflow("exterior derivative of a 2-form would have degree 3")
    coeffs: Dict[Tuple[int, ...], Symbol] = {}
    for key, c in w.coeffs.items():
        for b in range(w.nvars):
            db = c.derivative(b)
            if not db.terms:
                continue
            sign, skey = _sort_sign((b,) + key)
            if sign == 0:
                continue
            db = db.scale(sign)
            coeffs[skey] = coeffs[skey] + db if skey in coeffs else db
    return SymbolForm(w.degree + 1, w.nvars, coeffs)


# ---------------------------------------------------------------- Dolbeault


def antiholomorphic_frame(T):
    """Matrices (P, Q, Pi) with dw^(0,1) = P dzbar, dzbar = Q dw and Pi = P Q.

    Coordinates are w = (x, y) with z = x + T y.
    """
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    D = T - T.conj()
    if abs(np.linalg.det(D)) < 1e-14 or np.linalg.cond(D) > 1e12:
        raise SingularT("T - conj(T) is not invertible")
    Dinv = np.linalg.inv(D)
    P = np.vstack([T @ Dinv, -Dinv])
    Q = np.hstack([np.eye(n), T.conj()])
    return P, Q, P @ Q


def _project(w: SymbolForm, Pi: np.ndarray) -> SymbolForm:
    nv = w.nvars
    if w.degree == 0:
        return w
    if w.degree == 1:
        coeffs = {}
        for b in range(nv):
            acc = Symbol(nv)
            for (a,), c in w.coeffs.items():
                if Pi[a, b] != 0:
                    acc = acc + c.scale(Pi[a, b])
            coeffs[(b,)] = acc
        return SymbolForm(1, nv, coeffs)
    coeffs = {}
    for a in range(nv):
        for b in range(a + 1, nv):
            acc = Symbol(nv)
            for (c, d), s in w.coeffs.items():
                # antisymmetric coefficient matrix: C_cd = s, C_dc = -s
                f = Pi[c, a] * Pi[d, b] - Pi[d, a] * Pi[c, b]
                if abs(f) > 0:
                    acc = acc + s.scale(f)
            coeffs[(a, b)] = acc
    return SymbolForm(2, nv, coeffs)


def dolbeault_project(w: SymbolForm, T, k: Optional[int] = None) -> SymbolForm:
    """The (0,k)-part of a k-form on (x, y), written back in the dx/dy basis."""
    if k is not None and k != w.degree:
        raise ValueError("k must equal the degree of the form")
    T = np.asarray(T, dtype=complex)
    if w.nvars != 2 * T.shape[0]:
        raise ValueError("form dimension does not match T")
    _, _, Pi = antiholomorphic_frame(T)
    return _project(w, Pi)


def holomorphic_project(w: SymbolForm, T) -> SymbolForm:
    """The (1,0)-part of a 1-form."""
    if w.degree != 1:
        raise ValueError("holomorphic_project is defined for 1-forms")
    _, _, Pi = antiholomorphic_frame(T)
    return _project(w, np.eye(w.nvars) - Pi)


def zero_two_matrix(w: SymbolForm, T) -> np.ndarray:
    """Antisymmetric N with (0,2)-part = 1/2 dzbar^T N dzbar for a constant 2-form."""
    P, _, _ = antiholomorphic_frame(T)
    C = w.constant_matrix()
    return P.T @ C @ P
