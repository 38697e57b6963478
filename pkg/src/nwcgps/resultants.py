"""Closed-form resultant quadratics and the pole bookkeeping of the boundary functions."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .kernel import Kernel
from .model import ModelParams

ROOT_TIE_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticPoly:
    """a*t**2 + b*t + c"""
    a: float
    b: float
    c: float

    def __call__(self, t):
        return (self.a * t + self.b) * t + self.c

    def deriv(self, t):
        return 2 * self.a * t + self.b

    @property
    def discriminant(self) -> float:
        return self.b * self.b - 4 * self.a * self.c

    def norm_at(self, t) -> float:
        t = abs(t)
        return abs(self.a) * t * t + abs(self.b) * t + abs(self.c)

    def roots(self) -> np.ndarray:
        """Both roots (complex pair if the discriminant is negative), cancellation-free."""
        a, b, c = self.a, self.b, self.c
        if a == 0:
            return np.array([-c / b])
        d = self.discriminant
        if d < 0:
            re, im = -b / (2 * a), np.sqrt(-d) / (2 * abs(a))
            return np.array([re - 1j * im, re + 1j * im])
        q = -0.5 * (b + np.copysign(np.sqrt(d), b))
        if q == 0:
            return np.array([0.0, 0.0])
        return np.sort(np.array([q / a, c / q]))


def _k(p):
    return p if isinstance(p, Kernel) else Kernel(p)


def poly_R_Y(params) -> QuadraticPoly:
    k = _k(params)
    f1, f2, m1, m2, l1, l2 = k.f1, k.f2, k.m1, k.m2, k.l1, k.l2
    g = f2 * m2 - (1 - f1) * m1
    return QuadraticPoly((1 - f2) * l1 * g,
                         ((1 - f1) * (1 - f2) * (l1 + l2) - f1 * g) * m1,
                         -f1 * (1 - f1) * m1 * m1)


def poly_R_X(params) -> QuadraticPoly:
    return poly_R_Y(_k(params).params.swapped())


def poly_P_X(params) -> QuadraticPoly:
    """Res_x(h1, h2)(y) = mu1 y (y - 1) P_X(y)."""
    k = _k(params)
    f1, f2, m1, m2, l1, l2 = k.f1, k.f2, k.m1, k.m2, k.l1, k.l2
    return QuadraticPoly(l2 * (1 - f1) * (f2 * m2 - (1 - f1) * m1),
                         -f2 * m2 * ((1 - f1) * (l1 + l2) - m1 * (1 - f1) + m2 * f2),
                         f2 * f2 * m2 * m2)


def poly_Q_X(params) -> QuadraticPoly:
    """Res_x(h1, h3)(y) = -phi1 mu1 y (y - 1) Q_X(y)."""
    k = _k(params)
    f1, f2, m1, m2, l1, l2 = k.f1, k.f2, k.m1, k.m2, k.l1, k.l2
    A = f1 * m1 - (1 - f2) * m2
    return QuadraticPoly(l2 * A, ((1 - f2) * (l1 + l2) - A) * m2, -(1 - f2) * m2 * m2)


def poly_P_Y(params) -> QuadraticPoly:
    """Res_y(h1, h2)(x) = -phi2 mu2 x (x - 1) P_Y(x)."""
    k = _k(params)
    f1, f2, m1, m2, l1, l2 = k.f1, k.f2, k.m1, k.m2, k.l1, k.l2
    g = f2 * m2 - (1 - f1) * m1
    return QuadraticPoly(l1 * g, ((1 - f1) * (l1 + l2) - g) * m1, -(1 - f1) * m1 * m1)


def poly_Q_Y(params) -> QuadraticPoly:
    """Res_y(h1, h3)(x) = mu2 x (x - 1) Q_Y(x)."""
    k = _k(params)
    f1, f2, m1, m2, l1, l2 = k.f1, k.f2, k.m1, k.m2, k.l1, k.l2
    return QuadraticPoly(l1 * (1 - f2) * (f1 * m1 - (1 - f2) * m2),
                         -f1 * m1 * ((1 - f2) * (l1 + l2) - m2 * (1 - f2) + m1 * f1),
                         f1 * f1 * m1 * m1)


def xi_roots(params):
    """(xi_plus, xi_minus): xi_plus is the positive root of Q_X with smallest modulus."""
    roots = poly_Q_X(params).roots()
    roots = np.real_if_close(roots)
    pos = sorted((float(r) for r in roots if np.isreal(r) and r > 0), key=abs)
    if not pos:
        raise ValueError("Q_X has no positive root")
    xp = pos[0]
    rest = [float(np.real(r)) for r in roots]
    rest.remove(min(rest, key=lambda r: abs(r - xp)))
    return xp, (rest[0] if rest else float("nan"))


def y_roots(params):
    """Roots of P_X; a complex pair when its discriminant is negative."""
    p = poly_P_X(params)
    r = p.roots()
    return r, bool(p.discriminant < 0)


@dataclass(frozen=True)
class PoleReport:
    xi_plus: float
    xi_minus: float
    y_plus: complex
    y_minus: complex
    y_roots_complex: bool
    has_pole_in_annulus: bool
    rho_Y: float
    q_y_at_sqrt: float
    scan_agrees: bool


def h3_sign_change_scan(kernel: Kernel, m: int = 2000):
    """Zeros of h3(X*(y), y) on (R, y3) located by a sign-change scan."""
    bp = kernel.branch_points
    # uniform grid plus points clustered at y3, where xi+ can sit arbitrarily close
    near_y3 = bp.y3 - (bp.y3 - kernel.R) * np.geomspace(1e-3, 1e-10, 30)
    y = np.concatenate([np.linspace(kernel.R, bp.y3, m + 2)[1:-1], near_y3])
    y = np.unique(y[(y > kernel.R) & (y < bp.y3)])
    v = kernel.h3(kernel.X_star(y + 0j), y).real
    if kernel.f1 > kernel.r1:
        # X*(1) = 1 here, so h3(X*(y), y) has the trivial factor (y - 1)
        v = v / (y - 1)
    idx = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    return [0.5 * (y[i] + y[i + 1]) for i in idx]


def locate_poles(params, branch_points=None) -> PoleReport:
    k = _k(params)
    bp = branch_points or k.branch_points
    xp, xm = xi_roots(k)
    yr, cplx = y_roots(k)
    if k.f1 > k.r1:
        q = float(poly_Q_Y(k)(np.sqrt(k.f1 / k.r1)))
    else:
        q = float("nan")
    has = bool(k.f1 > k.r1 and q < 0)
    scan = h3_sign_change_scan(k)
    agrees = has == (len(scan) > 0)
    if has and scan:
        agrees = agrees and abs(scan[0] - xp) < 1e-3 * xp
    agrees = bool(agrees)
    if not agrees:
        warnings.warn(f"pole test disagrees with the h3 scan: Q_Y test={has}, scan zeros={scan}",
                      RuntimeWarning, stacklevel=2)
    yp, ym = (complex(yr[-1]), complex(yr[0])) if len(yr) == 2 else (complex(yr[0]), complex("nan"))
    return PoleReport(xp, xm, yp, ym, cplx, has, xp if has else bp.y3, q, agrees)
