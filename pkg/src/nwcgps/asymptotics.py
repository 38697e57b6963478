"""Tail regime classification and leading-order asymptotics of P(N2 = n)."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalError
from .kernel import Kernel
from .model import ModelParams, stability_check
from .resultants import poly_P_X, poly_Q_X, poly_Q_Y, xi_roots
from .rh_solver import RHSolver

CASE_B_TOL = 1e-10
AMBIGUITY_TOL = 1e-10


@dataclass(frozen=True)
class TailEstimate:
    case_tag: str
    decay_base: float
    power_exponent: float
    prefactor: float
    queue: int = 2
    warnings: tuple = ()
    alternative: "TailEstimate | None" = None

    def __call__(self, n):
        return tail_eval(self, n)


@dataclass(frozen=True)
class Classification:
    case_tag: str
    ambiguous: bool
    q_y_at_sqrt: float


@dataclass(frozen=True)
class RemovableCheck:
    removable: bool
    combination: float
    closed_form: float | None = field(default=None)


def _classify(params: ModelParams, force_phi1_above=False) -> Classification:
    k = Kernel(params)
    amb = abs(k.f1 - k.r1) <= AMBIGUITY_TOL * max(1.0, k.r1)
    if k.f1 < k.r1 and not (force_phi1_above and amb):
        return Classification("d", amb, float("nan"))
    s = np.sqrt(k.f1 / k.r1)
    q = poly_Q_Y(k)
    val = float(q(s))
    if abs(val) < CASE_B_TOL * q.norm_at(s):
        tag = "b"
    else:
        tag = "a" if val < 0 else "c"
    return Classification(tag, amb, val)


def classify_case(params: ModelParams) -> str:
    """Tail regime of N2: 'a', 'b', 'c' or 'd'."""
    return _classify(params).case_tag


def classify_case_detail(params: ModelParams) -> Classification:
    return _classify(params)


def combination_closed_form(params: ModelParams) -> float:
    """phi2 times the case (d) prefactor, the residue-type combination at y = phi2/rho2."""
    k = Kernel(params)
    f1, f2, m1, m2, r1, r2 = k.f1, k.f2, k.m1, k.m2, k.r1, k.r2
    return f2 * (r1 - f1) * (f2 - r2) * ((1 - f1) * m1 + (1 - f2) * m2) / (
        (1 - f1) * (f2 * (r1 - f1) * m1 + (1 - f2) * (f2 - r2) * m2))


def removable_singularity_check(params: ModelParams, solver: RHSolver | None = None) -> RemovableCheck:
    """phi2 P(1,0) - (1-phi2) P(0, phi2/rho2) + (1-phi2) P00, zero iff phi2/rho2 is removable."""
    k = Kernel(params)
    if k.f2 <= k.r2:
        return RemovableCheck(True, 0.0, None)
    s = solver or RHSolver(params)
    y0 = k.f2 / k.r2
    val = k.f2 * s.P10 - (1 - k.f2) * s.P0y(y0) + (1 - k.f2) * s.P00
    comb = float(np.real(val))
    if k.f1 < k.r1:
        return RemovableCheck(False, comb, combination_closed_form(params))
    return RemovableCheck(True, comb, None)


def r_at_xi(solver: RHSolver, xi: float, check_fd: bool = True) -> float:
    """The residue factor r(xi+) of alpha_Y at its pole xi+."""
    k = solver.k
    X = float(np.real(k.X_star(xi)))
    dX = float(np.real(k.X_star_dy(xi)))
    if check_fd:
        h = 1e-6 * xi
        fd = float(np.real(k.X_star(xi + h) - k.X_star(xi - h))) / (2 * h)
        if abs(fd - dX) > 1e-5 * max(1.0, abs(dX)):
            warnings.warn(f"dX*/dy at xi+: implicit {dX} vs finite difference {fd}",
                          RuntimeWarning, stacklevel=2)
    yr = solver.R ** 2 / xi
    num = k.h3(X, yr) * k.h2(X, xi)
    den = k.h2(X, yr) * (k.h3_dx(X, xi) * dX + k.h3_dy(X, xi))
    return float(num / den)


def modulus_identity_residual(params: ModelParams, m: int = 50) -> float:
    """max relative gap in |h3(X*(y+0i), y)|^2 = (phi1/rho1)(y-1)Q_X(y) on (y3, y4)."""
    k = Kernel(params)
    bp = k.branch_points
    y = np.linspace(bp.y3, bp.y4, m + 2)[1:-1]
    X = k.X_star_onesided(y, "above")
    lhs = np.abs(k.h3(X, y)) ** 2
    rhs = k.f1 / k.r1 * (y - 1) * poly_Q_X(k)(y)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-300)))


def _kappa(k: Kernel, P00: float) -> float:
    return k.f2 ** 2 * k.m2 ** 2 * (1 - k.f2) * ((1 - k.f1) * k.m1 + (1 - k.f2) * k.m2) * P00


def _estimate(params: ModelParams, tag: str, solver: RHSolver | None) -> TailEstimate:
    k = Kernel(params)
    bp = k.branch_points
    notes = []
    if tag == "d":
        base = k.r2 / k.f2
        C = combination_closed_form(params) / k.f2
        return TailEstimate("d", base, 0.0, C, warnings=tuple(notes))
    s = solver or RHSolver(params)
    if tag == "a":
        xi, _ = xi_roots(k)
        r = r_at_xi(s, xi)
        phi = float(np.real(s.varphi_Y(xi)))
        C = -k.f2 * (1 - k.f2) * s.P00 * r * phi / (xi * (1 - k.f1 - k.f2) * (k.f2 - k.r2 * xi))
        return TailEstimate("a", 1.0 / xi, 0.0, float(C), warnings=tuple(notes))
    y1, y2, y3, y4 = map(float, bp.y)
    resid = modulus_identity_residual(params)
    if resid > 1e-8:
        raise NumericalError(f"modulus identity on [y3, y4] fails (relative gap {resid:.3e})")
    kap = _kappa(k, s.P00)
    phi = float(np.real(s.varphi_Y_pv(y3)))
    root = np.sqrt(y3 * (y3 - y1) * (y3 - y2) * (y4 - y3))
    PX = poly_P_X(k)(k.f2 / (k.r2 * y3))
    common = k.l2 * kap * (k.r2 * y3 ** 2 - k.f2) * phi * root / (k.r2 * (k.r2 * y3 - k.f2) * PX)
    if tag == "b":
        C = common / (2 * np.sqrt(np.pi) * y3 ** 3 * poly_Q_X(k).deriv(y3))
        return TailEstimate("b", 1.0 / y3, -0.5, float(C), warnings=tuple(notes))
    C = common / (4 * np.sqrt(np.pi) * y3 ** 2 * poly_Q_X(k)(y3))
    return TailEstimate("c", 1.0 / y3, -1.5, float(C), warnings=tuple(notes))


def tail_estimate(params: ModelParams, queue: int = 2, solver: RHSolver | None = None) -> TailEstimate:
    """Leading-order estimate prefactor * n**power * base**n of P(N_queue = n)."""
    if queue == 1:
        est = tail_estimate(params.swapped(), 2)
        alt = replace(est.alternative, queue=1) if est.alternative else None
        return replace(est, queue=1, alternative=alt)
    if queue != 2:
        raise ValueError("queue must be 1 or 2")
    verdict = stability_check(params)
    if not verdict.stable:
        raise ValueError("tail estimates require strictly stable parameters")
    cls = _classify(params)
    if not cls.ambiguous:
        return _estimate(params, cls.case_tag, solver)
    # phi1 = rho1 within tolerance: report both readings
    other = _classify(params, force_phi1_above=True).case_tag
    first = _estimate(params, "d", solver) if cls.case_tag == "d" else _estimate(params, cls.case_tag, solver)
    alt_tag = other if cls.case_tag == "d" else "d"
    try:
        alt = _estimate(params, alt_tag, solver)
    except Exception as exc:  # the alternative reading may be numerically degenerate
        alt = None
        alt_note = f"alternative case {alt_tag} unavailable: {exc}"
    else:
        alt_note = f"alternative case {alt_tag} reported"
    note = f"phi1 = rho1 within {AMBIGUITY_TOL}; case assignment ambiguous; {alt_note}"
    return replace(first, warnings=first.warnings + (note,), alternative=alt)


def tail_eval(estimate: TailEstimate, n):
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("n must be >= 1")
    return estimate.prefactor * n ** estimate.power_exponent * estimate.decay_base ** n


def construct_case_b(params: ModelParams) -> ModelParams:
    """Adjust lambda2 so that Q_Y(sqrt(phi1/rho1)) = 0, keeping everything else fixed."""
    def g(l2):
        return float(poly_Q_Y(replace(params, lambda2=l2))(np.sqrt(params.phi1 / (params.lambda1 / Kernel(params).m1))))

    lo, hi = 1e-9 * params.lambda2, params.lambda2
    grid = np.geomspace(1e-6, 50.0, 400) * params.lambda2
    vals = [g(v) for v in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa * fb < 0:
            lo, hi = a, b
            break
    else:
        raise ValueError("no lambda2 puts these parameters in case b")
    l2 = brentq(g, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    out = replace(params, lambda2=l2)
    if not stability_check(out).stable:
        raise ValueError("the case-b lambda2 makes the system unstable")
    return out
