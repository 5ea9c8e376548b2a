"""Scenario-driven verification harness behind the ``verify`` command."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from . import gcs, holoside, modsyz, sympside
from .errors import HypothesisViolated, NCTorusError, ValidationError
from .matcore import (
    complex_from_json,
    is_antisymmetric,
    is_positive_definite,
    is_symmetric,
    matrix_to_json,
    max_abs,
    near_integer_matrix,
    vector_to_json,
)
from .symcalc import form_residual

CHECKS = (
    "cocycle",
    "connection",
    "curvature",
    "dual_curvature",
    "fm",
    "gcs",
    "gerbe",
    "iso",
    "moduli",
    "morphism",
    "sections",
    "syz",
    "tau1",
    "tau2",
)


@dataclass
class Scenario:
    n: int
    T: np.ndarray
    theta: np.ndarray
    Acal: np.ndarray
    A: np.ndarray
    p: np.ndarray
    q: np.ndarray
    p_prime: Optional[np.ndarray] = None
    q_prime: Optional[np.ndarray] = None
    tau: Optional[np.ndarray] = None
    tolerance: float = 1e-9
    samples: int = 16
    seed: int = 0
    checks: List[str] = field(default_factory=list)
    name: str = ""

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "n": self.n,
            "T": matrix_to_json(self.T),
            "theta": matrix_to_json(self.theta),
            "Acal": matrix_to_json(self.Acal),
            "A": matrix_to_json(self.A),
            "p": vector_to_json(self.p),
            "q": vector_to_json(self.q),
            "tolerance": self.tolerance,
            "samples": self.samples,
            "seed": self.seed,
            "checks": list(self.checks),
        }
        for key in ("p_prime", "q_prime"):
            v = getattr(self, key)
            if v is not None:
                out[key] = vector_to_json(v)
        if self.tau is not None:
            out["tau"] = matrix_to_json(self.tau)
        return out


# ---------------------------------------------------------------- loading


def _matrix(data: dict, key: str, n: int, default=None, complex_entries: bool = False) -> np.ndarray:
    if key not in data or data[key] is None:
        if default is None:
            raise ValidationError(key, "missing")
        return default
    try:
        if complex_entries:
            raw = data[key]
            if not isinstance(raw, list):
                raw = [[raw]]
            m = np.array([[complex_from_json(z) for z in row] for row in raw], dtype=complex)
        else:
            m = np.array(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(key, f"not a numeric matrix ({exc})") from None
    if m.shape != (n, n):
        raise ValidationError(key, f"expected shape ({n}, {n}), got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(key, "entries must be finite")
    return m


def _vector(data: dict, key: str, n: int, required: bool = True) -> Optional[np.ndarray]:
    if key not in data or data[key] is None:
        if required:
            return np.zeros(n)
        return None
    try:
        v = np.array(data[key], dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ValidationError(key, f"not a numeric vector ({exc})") from None
    if v.shape != (n,):
        raise ValidationError(key, f"expected length {n}, got {v.shape[0]}")
    return v


def scenario_from_dict(data: dict, name: str = "") -> Scenario:
    if not isinstance(data, dict):
        raise ValidationError("scenario", "must be a JSON object")
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("n", "missing or not an integer") from None
    if n < 1:
        raise ValidationError("n", "must be positive")
    T = _matrix(data, "T", n, 1j * np.eye(n), complex_entries=True)
    if not is_symmetric(T.imag) or not is_positive_definite(T.imag):
        raise ValidationError("T", "imaginary part must be symmetric positive definite")
    if abs(np.linalg.det(T)) <= 1e-12:
        raise ValidationError("T", "matrix is singular")
    theta = _matrix(data, "theta", n, np.zeros((n, n)))
    if not is_antisymmetric(theta):
        raise ValidationError("theta", "must be antisymmetric")
    acal = _matrix(data, "Acal", n, np.zeros((n, n)))
    if not is_symmetric(acal):
        raise ValidationError("Acal", "must be symmetric")
    A = _matrix(data, "A", n, np.eye(n))
    if not np.allclose(A, np.round(A)):
        raise ValidationError("A", "must have integer entries")
    tau = _matrix(data, "tau", n, None) if data.get("tau") is not None else None
    tol = data.get("tolerance", 1e-9)
    if not isinstance(tol, (int, float)) or not tol > 0:
        raise ValidationError("tolerance", "must be a positive number")
    samples = data.get("samples", 16)
    if not isinstance(samples, int) or samples < 1:
        raise ValidationError("samples", "must be a positive integer")
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ValidationError("seed", "must be an integer")
    checks = data.get("checks", [])
    if not isinstance(checks, list):
        raise ValidationError("checks", "must be a list of check names")
    checks = _expand_checks(checks)
    return Scenario(
        n, T, theta, acal, np.round(A), _vector(data, "p", n), _vector(data, "q", n),
        _vector(data, "p_prime", n, False), _vector(data, "q_prime", n, False),
        tau, float(tol), samples, seed, checks, str(data.get("name", name)),
    )


def _expand_checks(names) -> List[str]:
    out = set()
    for c in names:
        if c == "all":
            out.update(CHECKS)
        elif c in CHECKS:
            out.add(c)
        else:
            raise ValidationError("checks", f"unknown check {c!r}")
    return sorted(out)


def bundled_scenarios() -> List[str]:
    root = resources.files("nctorus") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(path) -> Scenario:
    """Read a scenario from ``path``, falling back to the bundled files."""
    p = Path(path)
    if p.exists():
        text = p.read_text()
    else:
        res = resources.files("nctorus") / "scenarios" / p.name
        if not res.is_file():
            raise FileNotFoundError(f"no scenario at {path} and no bundled scenario {p.name}")
        text = res.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError("scenario", f"invalid JSON: {exc}") from None
    return scenario_from_dict(data, p.stem)


# ---------------------------------------------------------------- checks


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_residual: float
    details: Dict[str, object] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed, "max_residual": _num(self.max_residual), "details": _clean(self.details)}


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else str(x)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _ok(res: float, sc: Scenario, scale: float = 1.0) -> bool:
    return res <= sc.tolerance * max(1.0, scale)


def check_gcs(sc: Scenario) -> CheckResult:
    J = gcs.build_IT(sc.T)
    d = {"square": J.square_residual(), "pairing": J.pairing_residual()}
    for nm in ("gcs_mirror", "gcs_factorization"):
        d[nm] = gcs.verify_identity(nm, {"T": sc.T}).max_entry_residual
    mirrored = gcs.apply_transform(J, gcs.make_transform("mirror", sc.n))
    d["mirror_square"] = mirrored.square_residual()
    d["mirror_pairing"] = mirrored.pairing_residual()
    worst = max(d.values())
    return CheckResult("gcs", _ok(worst, sc), worst, d)


def check_fm(sc: Scenario) -> CheckResult:
    params = {"T": sc.T, "theta": sc.theta}
    d = {nm: gcs.verify_identity(nm, params).max_entry_residual for nm in ("fm_mirror_compat", "fm_as_bfield")}
    d["restriction"] = sympside.restriction_consistency(sc.A, sc.theta).max_residual
    if abs(np.linalg.det(sc.A)) > 0.5:
        d["gerbe_pullback"] = sympside.fm_pullback_check(sc.A, sc.theta).max_residual
    worst = max(d.values())
    return CheckResult("fm", _ok(worst, sc), worst, d)


def _factor(sc: Scenario):
    return holoside.make_factor("nc_twisted", sc.A, sc.theta, sc.Acal, T=sc.T)


def check_cocycle(sc: Scenario) -> CheckResult:
    rep = holoside.check_cocycle(_factor(sc))
    imat = rep.integrality_matrix
    d = {"integral": near_integer_matrix(imat), "integrality_distance": float(max_abs(imat - np.round(imat)))}
    d.update(rep.residuals)
    return CheckResult("cocycle", rep.passed, rep.max_residual, d)


def check_connection(sc: Scenario) -> CheckResult:
    omega = holoside.make_connection("nc_twisted", sc.A, sc.p, sc.q, sc.T, sc.theta, sc.Acal)
    rep = holoside.check_compatibility(_factor(sc), omega)
    return CheckResult("connection", rep.passed, rep.max_residual, dict(rep.residuals))


def check_curvature(sc: Scenario) -> CheckResult:
    omega = holoside.make_connection("nc_twisted", sc.A, sc.p, sc.q, sc.T, sc.theta, sc.Acal)
    Om = holoside.curvature(omega, sc.theta)
    closed = holoside.curvature_closed_form("nc_twisted", sc.A, sc.theta, sc.Acal)
    res = form_residual(Om, closed)
    obs = holoside.holomorphicity_obstruction(Om, sc.T)
    return CheckResult("curvature", _ok(res, sc, closed.norm()), res, {"closed_form": res, "obstruction_vanishes": obs.vanishes})


def check_iso(sc: Scenario) -> CheckResult:
    d: Dict[str, object] = {}
    try:
        phi = holoside.make_iso("phi_theta_A", sc.Acal, sc.theta, sc.A)
        theta = sc.theta
        d["variant"] = "phi_theta_A"
    except HypothesisViolated:
        phi = holoside.make_iso("phi_A", sc.Acal)
        theta = np.zeros_like(sc.theta)
        d["variant"] = "phi_A (theta set to zero: Acal theta Acal != O)"
    src = holoside.make_bundle("nc", sc.A, sc.p, sc.q, sc.T, theta, check=False)
    dst = holoside.make_bundle("nc_twisted", sc.A, sc.p, sc.q, sc.T, theta, sc.Acal, check=False)
    rep = holoside.verify_morphism(phi, src, dst)
    d.update(rep.residuals)
    return CheckResult("iso", rep.passed, rep.max_residual, d)


def _offset_points(sc: Scenario):
    """(target, expected) pairs: the scenario's own target, a lattice shift and an off-lattice shift."""
    n = sc.n
    base = np.concatenate([sc.p, sc.q])
    out = []
    if sc.p_prime is not None and sc.q_prime is not None:
        out.append(("given", np.concatenate([sc.p_prime, sc.q_prime]), None))
    B = modsyz.holo_lattice(sc.A, sc.Acal, sc.theta).basis
    out.append(("lattice", base + B[:, 0] - 2 * B[:, -1], True))
    off = base.copy()
    off[0] += 0.5
    out.append(("half_shift", off, False))
    return out


def check_morphism(sc: Scenario) -> CheckResult:
    n = sc.n
    d: Dict[str, object] = {}
    worst = 0.0
    ok = True
    for label, target, expected in _offset_points(sc):
        x = modsyz.moduli_point(sc.p, sc.q, "holo", sc.A, sc.Acal, sc.theta)
        y = modsyz.moduli_point(target[:n], target[n:], "holo", sc.A, sc.Acal, sc.theta)
        equiv = modsyz.moduli_equiv(x, y)
        try:
            phi = holoside.solve_hom(sc.A, sc.Acal, sc.theta, (sc.p, sc.q), (target[:n], target[n:]), 3, sc.T)
        except RuntimeError as exc:
            d[f"{label}_error"] = str(exc)
            ok = False
            continue
        found = phi is not None
        d[f"{label}_found"] = found
        d[f"{label}_equivalent"] = equiv
        ok = ok and found == equiv and (expected is None or expected == equiv)
    return CheckResult("morphism", ok, worst, d)


def check_moduli(sc: Scenario) -> CheckResult:
    n = sc.n
    d: Dict[str, object] = {}
    ok = True
    for label, target, expected in _offset_points(sc):
        x = modsyz.moduli_point(sc.p, sc.q, "holo", sc.A, sc.Acal, sc.theta)
        y = modsyz.moduli_point(target[:n], target[n:], "holo", sc.A, sc.Acal, sc.theta)
        eq = modsyz.moduli_equiv(x, y)
        d[f"holo_{label}"] = eq
        if expected is not None:
            ok = ok and eq == expected
    rng = np.random.default_rng(sc.seed)
    k = rng.integers(-2, 3, size=2 * n)
    xs = modsyz.moduli_point(sc.p, sc.q, "symp", sc.A, sc.Acal, sc.theta)
    ys = modsyz.moduli_point(sc.p + k[:n], sc.q + k[n:], "symp", sc.A, sc.Acal, sc.theta)
    zs = modsyz.moduli_point(sc.p + 0.5, sc.q, "symp", sc.A, sc.Acal, sc.theta)
    d["symp_integer_shift"] = modsyz.moduli_equiv(xs, ys)
    d["symp_half_shift"] = modsyz.moduli_equiv(xs, zs)
    ok = ok and d["symp_integer_shift"] and not d["symp_half_shift"]
    c = modsyz.canonical_representative(xs)
    res = float(max_abs(modsyz.canonical_representative(c).vector - c.vector))
    d["canonical_idempotent"] = res
    ok = ok and res <= 1e-12
    return CheckResult("moduli", bool(ok), res, d)


def check_syz(sc: Scenario) -> CheckResult:
    n = sc.n
    rng = np.random.default_rng(sc.seed)
    worst = 0.0
    pts = [np.concatenate([sc.p, sc.q])] + [rng.normal(size=2 * n) for _ in range(sc.samples)]
    for v in pts:
        x = modsyz.moduli_point(v[:n], v[n:], "symp", sc.A, sc.Acal, sc.theta)
        back = modsyz.syz_map(modsyz.syz_map(x))
        worst = max(worst, float(max_abs(back.vector - x.vector)))
        h = modsyz.moduli_point(v[:n], v[n:], "holo", sc.A, sc.Acal, sc.theta)
        worst = max(worst, float(max_abs(modsyz.syz_map(modsyz.syz_map(h)).vector - h.vector)))
    coset_fail = 0
    x = modsyz.moduli_point(sc.p, sc.q, "symp", sc.A, sc.Acal, sc.theta)
    fx = modsyz.syz_map(x)
    for _ in range(sc.samples):
        k = rng.integers(-2, 3, size=2 * n)
        y = modsyz.moduli_point(sc.p + k[:n], sc.q + k[n:], "symp", sc.A, sc.Acal, sc.theta)
        coset_fail += not modsyz.moduli_equiv(fx, modsyz.syz_map(y))
    d = {"roundtrip": worst, "coset_failures": coset_fail}
    return CheckResult("syz", worst <= 1e-10 and coset_fail == 0, worst, d)


def check_sections(sc: Scenario) -> CheckResult:
    A = sc.A
    if not (np.allclose(sc.T, 1j * np.eye(sc.n)) and is_symmetric(A) and is_positive_definite(A)):
        return CheckResult("sections", True, 0.0, {"skipped": "needs T = iI and A symmetric positive definite"})
    s = holoside.theta_section(A, sc.p, sc.q, N=10)
    rep = holoside.verify_section(s, samples=sc.samples, tol=max(sc.tolerance, 1e-8), seed=sc.seed)
    count = modsyz.intersection_points(A, sc.p).count
    d = dict(rep.residuals)
    d["dimension"] = s.dimension
    d["intersections"] = count
    det = int(round(np.linalg.det(A)))
    ok = rep.passed and s.dimension == det == count
    return CheckResult("sections", ok, rep.max_residual, d)


def check_gerbe(sc: Scenario) -> CheckResult:
    g = sympside.make_gerbe("theta_lagrangian", A=sc.A, theta=sc.theta)
    rep = sympside.check_gerbe(g)
    d: Dict[str, object] = dict(rep.residuals)
    cons = sympside.restriction_consistency(sc.A, sc.theta)
    d["restriction"] = cons.max_residual
    worst = max(rep.max_residual, cons.max_residual)
    ok = rep.passed and cons.passed
    mirror = sympside.make_mirror(sc.T, "nc", sc.theta)
    if sympside.fukaya_object_check(sc.A, T=sc.T):
        per = sympside.b_restriction_periods(sc.A, mirror)
        d["periods_integral"] = per.integral
        expect = near_integer_matrix(sc.A.T @ sc.theta @ sc.A)
        d["alpha_trivial"] = bool(max_abs(g.alpha - 1.0) <= 1e-9)
        ok = ok and per.integral == expect and d["alpha_trivial"] == expect
    else:
        d["periods_integral"] = "skipped: A T not symmetric"
    return CheckResult("gerbe", bool(ok), worst, d)


def check_dual_curvature(sc: Scenario) -> CheckResult:
    sys_ = sympside.make_twisted_local_system(sc.A, sc.p, sc.q, sc.Acal, sc.theta, enforce_integrality=False)
    coc = sympside.check_twisted_cocycle(sys_)
    shift = sympside.check_connection_shift(sys_)
    mirror = sympside.make_mirror(sc.T, "nc", sc.theta)
    d: Dict[str, object] = {"cocycle": coc.max_residual, "connection_shift": shift.max_residual}
    ok = coc.passed and shift.passed
    if sympside.fukaya_object_check(sc.A, T=sc.T):
        dc = sympside.dual_curvature(sys_, mirror=mirror)
        d.update(dc.residuals)
        ok = ok and dc.generalized_condition_pass and dc.residuals["closed_form"] <= 1e-12
    else:
        dc = sympside.dual_curvature(sys_)
        d["closed_form"] = dc.residuals["closed_form"]
        d["b_condition"] = "skipped: A T not symmetric"
        ok = ok and dc.residuals["closed_form"] <= 1e-12
    worst = max(v for v in d.values() if isinstance(v, float))
    return CheckResult("dual_curvature", bool(ok), worst, d)


def _gerby_check(sc: Scenario, kind: str) -> CheckResult:
    tau = np.zeros((sc.n, sc.n)) if sc.tau is None else sc.tau
    if kind == "tau1":
        tau = 0.5 * (tau - tau.T)
    fk = "gerby_" + kind
    factor = holoside.make_factor(fk, sc.A, tau=tau, T=sc.T)
    d: Dict[str, object] = {}
    coc = holoside.check_cocycle(factor)
    d["cocycle"] = coc.max_residual
    omega = holoside.make_connection(fk, sc.A, sc.p, sc.q, sc.T)
    comp = holoside.check_compatibility(factor, omega)
    d["connection"] = comp.max_residual
    Om = holoside.curvature(omega, None, holoside.gerbe_two_form(factor))
    closed = holoside.curvature_closed_form(fk, sc.A, T=sc.T, tau=tau)
    d["curvature"] = form_residual(Om, closed)
    g = sympside.make_gerbe(kind, tau=tau, T=sc.T)
    d["gerbe"] = sympside.check_gerbe(g).max_residual
    ident = gcs.verify_identity(f"{kind}_preserve_iff", {"T": sc.T, "seed": sc.seed})
    d["preserve_iff_family"] = ident.passed
    own = gcs.verify_identity(f"{kind}_preserve_iff", {"T": sc.T, "tau": tau})
    d["preserve_iff_scenario"] = own.passed
    ok = coc.passed and comp.passed and _ok(d["curvature"], sc, closed.norm()) and d["gerbe"] <= 1e-12
    ok = ok and ident.passed and own.passed
    if sympside.fukaya_object_check(sc.A, T=sc.T):
        obs = holoside.holomorphicity_obstruction(Om, sc.T)
        null = max_abs(tau) <= 1e-12 if kind == "tau1" else is_symmetric(tau.T @ sc.T, 1e-12)
        d["obstruction_vanishes"] = obs.vanishes
        ok = ok and obs.vanishes == bool(null)
    worst = max(v for v in d.values() if isinstance(v, float))
    return CheckResult(kind, bool(ok), worst, d)


def check_tau1(sc: Scenario) -> CheckResult:
    return _gerby_check(sc, "tau1")


def check_tau2(sc: Scenario) -> CheckResult:
    return _gerby_check(sc, "tau2")


RUNNERS: Dict[str, Callable[[Scenario], CheckResult]] = {
    "cocycle": check_cocycle,
    "connection": check_connection,
    "curvature": check_curvature,
    "dual_curvature": check_dual_curvature,
    "fm": check_fm,
    "gcs": check_gcs,
    "gerbe": check_gerbe,
    "iso": check_iso,
    "moduli": check_moduli,
    "morphism": check_morphism,
    "sections": check_sections,
    "syz": check_syz,
    "tau1": check_tau1,
    "tau2": check_tau2,
}


def run_scenario(scenario, checks: Optional[List[str]] = None) -> dict:
    """Run the requested checks and assemble the report dictionary."""
    sc = scenario if isinstance(scenario, Scenario) else load_scenario(scenario)
    names = sc.checks if checks is None else _expand_checks(checks)
    results = []
    for name in sorted(names):
        try:
            r = RUNNERS[name](sc)
        except NCTorusError as exc:
            r = CheckResult(name, False, float("inf"), {"error": f"{type(exc).__name__}: {exc}"})
        results.append(r.to_json())
    sc_json = sc.to_json()
    sc_json["checks"] = sorted(names)
    return {"scenario": sc_json, "results": results, "pass": all(r["pass"] for r in results)}


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def summary_table(report: dict) -> str:
    lines = [f"{'check':<16}{'result':<8}max_residual"]
    for r in report["results"]:
        res = r["max_residual"]
        res = f"{res:.3e}" if isinstance(res, float) else str(res)
        lines.append(f"{r['name']:<16}{'PASS' if r['pass'] else 'FAIL':<8}{res}")
    lines.append(f"overall: {'PASS' if report['pass'] else 'FAIL'}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="verify", description="Run verification checks on a torus scenario.")
    ap.add_argument("scenario", help="scenario JSON file (or the name of a bundled scenario)")
    ap.add_argument("--check", action="append", dest="checks", metavar="NAME", help="check to run; repeatable; overrides the file")
    ap.add_argument("--tol", type=float, help="override the scenario tolerance")
    ap.add_argument("--seed", type=int, help="override the random seed")
    ap.add_argument("--samples", type=int, help="override the sample count")
    ap.add_argument("--out", help="write the JSON report here")
    ap.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario)
        if args.tol is not None:
            if not args.tol > 0:
                raise ValidationError("tolerance", "must be a positive number")
            sc.tolerance = args.tol
        if args.seed is not None:
            sc.seed = args.seed
        if args.samples is not None:
            if args.samples < 1:
                raise ValidationError("samples", "must be a positive integer")
            sc.samples = args.samples
        report = run_scenario(sc, args.checks)
    except ValidationError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    text = report_json(report)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text if args.json else summary_table(report))
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
