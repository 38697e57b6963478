"""Kernel polynomials h1..h4, branch points and the algebraic functions X*, X_*, Y*, Y_*."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import OnCut, OrderingViolation, PoleAtZero, PoleEncountered
from .model import ModelParams, derive_rates

CUT_TOL = 1e-12


@dataclass(frozen=True)
class BranchPoints:
    y1: float
    y2: float
    y3: float
    y4: float
    x1: float
    x2: float
    x3: float
    x4: float

    @property
    def y(self) -> np.ndarray:
        return np.array([self.y1, self.y2, self.y3, self.y4])

    @property
    def x(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3, self.x4])


def _quartic_roots(lam_self, phimu_self, lam_other, phimu_other, S):
    # roots of (lam_self w^2 - S w + phimu_self)^2 - 4 lam_other phimu_other w^2, in increasing order
    c = 2.0 * np.sqrt(lam_other * phimu_other)
    out = []
    for b in (S + c, S - c):
        disc = b * b - 4.0 * lam_self * phimu_self
        if disc < 0:
            raise OrderingViolation(f"complex branch points (discriminant {disc:.3e})")
        sq = np.sqrt(disc)
        big = (b + sq) / (2.0 * lam_self)
        out.append((phimu_self / (lam_self * big), big))
    (r1, r4), (r2, r3) = out
    return np.array([r1, r2, r3, r4])


class Kernel:
    """Coefficient tables and evaluators for one parameter set.

    Functions of ``y`` (the ``X`` family, ``rho2``) and of ``x`` (the ``Y`` family,
    ``rho1``) accept scalars or arrays and return complex values.
    """

    def __init__(self, params: ModelParams):
        self.params = params
        d = derive_rates(params)
        self.rates = d
        self.l1, self.l2 = params.lambda1, params.lambda2
        self.f1, self.f2 = params.phi1, params.phi2
        self.m1, self.m2 = d.mu1, d.mu2
        self.r1, self.r2 = d.rho1, d.rho2
        self.a1 = self.f1 * self.m1
        self.a2 = self.f2 * self.m2
        self.S = self.l1 + self.l2 + self.a1 + self.a2
        self.R = float(np.sqrt(self.f2 / self.r2))
        self.Rx = float(np.sqrt(self.f1 / self.r1))

    def swapped(self) -> "Kernel":
        return Kernel(self.params.swapped())

    # polynomials ------------------------------------------------------------
    def h1(self, x, y):
        return (-self.l1 * x * x * y - self.l2 * x * y * y + self.S * x * y
                - self.a1 * y - self.a2 * x)

    def h2(self, x, y):
        return self.a2 * x * (y - 1) - (1 - self.f1) * self.m1 * y * (x - 1)

    def h3(self, x, y):
        return self.a1 * y * (x - 1) - (1 - self.f2) * self.m2 * x * (y - 1)

    def h4(self, x, y):
        return (1 - self.f1) * self.m1 * y * (x - 1) + (1 - self.f2) * self.m2 * x * (y - 1)

    def eval_h(self, which: int, x, y):
        try:
            return (self.h1, self.h2, self.h3, self.h4)[which - 1](x, y)
        except IndexError:
            raise ValueError(f"which must be 1..4, got {which}") from None

    def h1_dx(self, x, y):
        return -2 * self.l1 * x * y - self.l2 * y * y + self.S * y - self.a2

    def h1_dy(self, x, y):
        return -self.l1 * x * x - 2 * self.l2 * x * y + self.S * x - self.a1

    def h3_dx(self, x, y):
        return self.a1 * y - (1 - self.f2) * self.m2 * (y - 1)

    def h3_dy(self, x, y):
        return self.a1 * (x - 1) - (1 - self.f2) * self.m2 * x

    def identity_residual(self, x, y):
        """(1-phi2)h2 + (1-phi1)h3 + (1-phi1-phi2)h4, zero as a polynomial."""
        return ((1 - self.f2) * self.h2(x, y) + (1 - self.f1) * self.h3(x, y)
                + (1 - self.f1 - self.f2) * self.h4(x, y))

    def delta1(self, x):
        """Discriminant of h1(x, .) as a quadratic in y."""
        b = self.l1 * x * x - self.S * x + self.a1
        return b * b - 4 * self.l2 * self.a2 * x * x

    def delta2(self, y):
        """Discriminant of h1(., y) as a quadratic in x."""
        b = self.l2 * y * y - self.S * y + self.a2
        return b * b - 4 * self.l1 * self.a1 * y * y

    def delta1_coeffs(self) -> np.ndarray:
        """Coefficients of delta1, highest degree first."""
        q = np.array([self.l1, -self.S, self.a1])
        return np.polysub(np.polymul(q, q), [4 * self.l2 * self.a2, 0, 0])

    def delta2_coeffs(self) -> np.ndarray:
        q = np.array([self.l2, -self.S, self.a2])
        return np.polysub(np.polymul(q, q), [4 * self.l1 * self.a1, 0, 0])

    # branch points ----------------------------------------------------------
    @cached_property
    def branch_points(self) -> BranchPoints:
        return branch_points(self)

    @cached_property
    def _yb(self):
        return self.branch_points.y

    @cached_property
    def _xb(self):
        return self.branch_points.x

    # square-root branches ---------------------------------------------------
    def _check_cut(self, w, roots, name):
        w = np.asarray(w)
        scale = np.maximum(1.0, np.abs(w))
        near_axis = np.abs(w.imag) <= CUT_TOL * scale
        re = w.real
        on = near_axis & (((re >= roots[0] - CUT_TOL) & (re <= roots[1] + CUT_TOL))
                          | ((re >= roots[2] - CUT_TOL) & (re <= roots[3] + CUT_TOL)))
        if np.any(on):
            bad = np.atleast_1d(w)[np.atleast_1d(on)][0]
            raise OnCut(f"{name}={bad} lies on a branch cut; use the one-sided variant")

    @staticmethod
    def _sqrt4(w, roots, lam):
        w = np.asarray(w, dtype=complex)
        return (lam * np.sqrt(w - roots[0]) * np.sqrt(w - roots[1])
                * np.sqrt(w - roots[2]) * np.sqrt(w - roots[3]))

    def sqrt_branch_2(self, y, check=True):
        """The branch of sqrt(delta2) analytic off [y1,y2] and [y3,y4], positive at 0."""
        if check:
            self._check_cut(np.asarray(y, dtype=complex), self._yb, "y")
        return self._sqrt4(y, self._yb, self.l2)

    def sqrt_branch_1(self, x, check=True):
        if check:
            self._check_cut(np.asarray(x, dtype=complex), self._xb, "x")
        return self._sqrt4(x, self._xb, self.l1)

    @staticmethod
    def _onesided(w, roots, lam, side):
        w = np.asarray(w, dtype=float)
        inside = ((w > roots[0]) & (w < roots[1])) | ((w > roots[2]) & (w < roots[3]))
        if not np.all(inside):
            raise ValueError("one-sided limits are only defined strictly inside a cut")
        if side not in ("above", "below"):
            raise ValueError(f"side must be 'above' or 'below', got {side!r}")
        s = 1.0 if side == "above" else -1.0
        val = lam * np.ones_like(w, dtype=complex)
        for rk in roots:
            d = w - rk
            # principal sqrt of d +/- i0: real for d > 0, +/- i sqrt(-d) otherwise
            val = val * np.where(d > 0, np.sqrt(np.abs(d)) + 0j, s * 1j * np.sqrt(np.abs(d)))
        return val

    def sqrt_branch_2_onesided(self, y, side):
        return self._onesided(y, self._yb, self.l2, side)

    def sqrt_branch_1_onesided(self, x, side):
        return self._onesided(x, self._xb, self.l1, side)

    # kernel roots -----------------------------------------------------------
    @staticmethod
    def _roots(w, b, rr, lam_self, phimu_self, plus):
        # the two roots are (b +/- rr)/(2 lam_self w); their product is phimu_self/lam_self.
        # Use whichever expression avoids cancellation.
        num = b + rr if plus else b - rr
        other = b - rr if plus else b + rr
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = num / (2 * lam_self * w)
            recip = 2 * phimu_self * w / other
        return np.where(np.abs(num) >= np.abs(other), direct, recip)

    def _bY(self, y):
        y = np.asarray(y, dtype=complex)
        return -self.l2 * y * y + self.S * y - self.a2

    def _bX(self, x):
        x = np.asarray(x, dtype=complex)
        return -self.l1 * x * x + self.S * x - self.a1

    def X_star(self, y, rr=None):
        """Root of h1(., y) continuing the small root; analytic off the y-cuts, X*(0) = 0."""
        y = np.asarray(y, dtype=complex)
        if rr is None:
            rr = self.sqrt_branch_2(y)
        return self._roots(y, self._bY(y), rr, self.l1, self.a1, plus=True)

    def X_substar(self, y, rr=None):
        y = np.asarray(y, dtype=complex)
        if np.any(y == 0):
            raise PoleAtZero("X_substar has a pole at y = 0")
        if rr is None:
            rr = self.sqrt_branch_2(y)
        return self._roots(y, self._bY(y), rr, self.l1, self.a1, plus=False)

    def Y_star(self, x, rr=None):
        x = np.asarray(x, dtype=complex)
        if rr is None:
            rr = self.sqrt_branch_1(x)
        return self._roots(x, self._bX(x), rr, self.l2, self.a2, plus=True)

    def Y_substar(self, x, rr=None):
        x = np.asarray(x, dtype=complex)
        if np.any(x == 0):
            raise PoleAtZero("Y_substar has a pole at x = 0")
        if rr is None:
            rr = self.sqrt_branch_1(x)
        return self._roots(x, self._bX(x), rr, self.l2, self.a2, plus=False)

    def X_star_onesided(self, y, side):
        return self.X_star(np.asarray(y, dtype=complex), self.sqrt_branch_2_onesided(y, side))

    def Y_star_onesided(self, x, side):
        return self.Y_star(np.asarray(x, dtype=complex), self.sqrt_branch_1_onesided(x, side))

    def X_star_dy(self, y):
        """Derivative of X* by implicit differentiation of h1(X*(y), y) = 0."""
        X = self.X_star(y)
        return -self.h1_dy(X, y) / self.h1_dx(X, y)

    def conformal_roundtrip_check(self, y):
        y = np.asarray(y, dtype=complex)
        return np.abs(self.Y_star(self.X_star(y)) - y)


def branch_points(kernel_or_params) -> BranchPoints:
    k = kernel_or_params if isinstance(kernel_or_params, Kernel) else Kernel(kernel_or_params)
    y = _quartic_roots(k.l2, k.a2, k.l1, k.a1, k.S)
    x = _quartic_roots(k.l1, k.a1, k.l2, k.a2, k.S)
    tol = 1e-12
    ok_y = 0 < y[0] < y[1] <= 1 + tol and 1 - tol <= y[2] < y[3]
    ok_x = 0 < x[0] < x[1] <= 1 + tol and 1 - tol <= x[2] < x[3]
    if not (ok_y and ok_x):
        raise OrderingViolation(f"branch point ordering violated: y={y}, x={x}")
    for roots, coeffs in ((y, k.delta2_coeffs()), (x, k.delta1_coeffs())):
        scale = np.polyval(np.abs(coeffs), np.abs(roots))
        if np.any(np.abs(np.polyval(coeffs, roots)) > 1e-10 * scale):
            raise OrderingViolation("branch points fail the discriminant residual check")
    return BranchPoints(*map(float, y), *map(float, x))


class BoundaryRelations:
    """Evaluators for P(x, 1) and P(1, y) built from the boundary generating functions.

    ``Px0_at`` and ``P0y_at`` are callables returning complex values. The point
    x = phi1/rho1 (resp. y = phi2/rho2) is a zero of the denominator; when the numerator
    vanishes there too the value is recovered from the mean over a small circle.
    """

    def __init__(self, kernel: Kernel, P00, P10, P01, Px0_at, P0y_at,
                 x_pole_removable=True, y_pole_removable=True):
        self.k = kernel
        self.P00, self.P10, self.P01 = P00, P10, P01
        self.Px0_at, self.P0y_at = Px0_at, P0y_at
        self.x_pole_removable = x_pole_removable
        self.y_pole_removable = y_pole_removable

    def _raw_P1y(self, y):
        k = self.k
        num = k.f2 * self.P10 - (1 - k.f2) * self.P0y_at(y) + (1 - k.f2) * self.P00
        return num / (k.f2 - k.r2 * y)

    def _raw_Px1(self, x):
        k = self.k
        num = k.f1 * self.P01 - (1 - k.f1) * self.Px0_at(x) + (1 - k.f1) * self.P00
        return num / (k.f1 - k.r1 * x)

    @staticmethod
    def _guarded(raw, w, pole, removable, name, radius=1e-3, m=32):
        w = np.asarray(w, dtype=complex)
        near = np.abs(w - pole) < 1e-6 * max(1.0, pole)
        if not np.any(near):
            return raw(w)
        if not removable:
            raise PoleEncountered(f"{name} has a pole at {pole}")
        out = np.array(raw(np.where(near, 0.5, w)), dtype=complex)
        circle = radius * np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
        for idx in zip(*np.nonzero(np.atleast_1d(near))):
            c = np.atleast_1d(w)[idx]
            np.atleast_1d(out)[idx] = np.mean(raw(c + circle))
        return out if out.ndim else out[()]

    def P1y(self, y):
        pole = self.k.f2 / self.k.r2
        return self._guarded(self._raw_P1y, y, pole, self.y_pole_removable, "P(1,y)")

    def Px1(self, x):
        pole = self.k.f1 / self.k.r1
        return self._guarded(self._raw_Px1, x, pole, self.x_pole_removable, "P(x,1)")


def boundary_relations(kernel, P00, P10, P01, Px0_at, P0y_at, **kw) -> BoundaryRelations:
    return BoundaryRelations(kernel, P00, P10, P01, Px0_at, P0y_at, **kw)
