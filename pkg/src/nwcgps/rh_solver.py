"""Riemann-Hilbert solution for the boundary generating functions.

The Cauchy-type integral defining phi_Y runs over [x1, x2]. With the substitution
x = x1 + (x2 - x1)(1 - cos t)/2 the integrand becomes an odd, 2*pi-periodic analytic
function of t times a cotangent kernel, so the periodic trapezoidal rule converges
geometrically. A root of h1(., y) close to the segment shows up as a pole of the
cotangent near the real t axis; it is subtracted exactly, which also yields the
principal value and both boundary values on the circle |y| = sqrt(phi2/rho2).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (AtPole, BranchAmbiguity, MultipleSingularities, NearSingularity,
                     NonConvergence, PhaseAliasing, PoleOfAlpha, UnstableSystemError,
                     KernelZero, OnCut)
from .kernel import Kernel, boundary_relations
from .model import ModelParams, stability_check
from .resultants import locate_poles, poly_R_Y

# roots of h1(., y) with |Im t| below this are subtracted from the integrand
NEAR_STRIP = 0.5
# |y| within this relative distance of R counts as on the circle
CIRCLE_TOL = 1e-13


@dataclass(frozen=True)
class QuadratureConfig:
    tol: float = 1e-12
    min_nodes: int = 64
    max_nodes: int = 1 << 16
    batch: int = 256


@dataclass(frozen=True)
class GFValue:
    value: complex
    region: str  # inside_disk | outside_disk | boundary


def taylor_coefficients(f, n: int, radius: float = 0.5, points: int = 128) -> np.ndarray:
    """First ``n`` Taylor coefficients of ``f`` at 0 from a trapezoidal Cauchy integral."""
    points = max(points, 2 * n)
    z = radius * np.exp(2j * np.pi * np.arange(points) / points)
    c = np.fft.fft(np.asarray(f(z), dtype=complex)) / points
    return c[:n] / radius ** np.arange(n)


def cauchy_derivative(f, z0: complex, radius: float, points: int = 64) -> complex:
    z = radius * np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)
    return complex(np.mean(np.asarray(f(z0 + z)) / z))


class RHSolver:
    """Solution of the boundary value problem for one stable parameter set."""

    def __init__(self, params: ModelParams, quad: QuadratureConfig | None = None):
        verdict = stability_check(params)
        if not verdict.stable:
            raise UnstableSystemError(
                f"parameters are not strictly stable (lhs1={verdict.lhs1:.6g}, lhs2={verdict.lhs2:.6g})")
        self.params = params
        self.quad = quad or QuadratureConfig()
        self.k = Kernel(params)
        self.bp = self.k.branch_points
        self.RY = poly_R_Y(self.k)
        self.R = self.k.R
        self._nodes = {}
        self.pv_used = False

    # ---------------------------------------------------------------- Theta_Y
    def _x_of_t(self, t):
        x1, x2 = self.bp.x1, self.bp.x2
        return x1 + (x2 - x1) * (1 - np.cos(t)) / 2

    def _theta_t(self, t):
        """Theta_Y(x(t)), continued analytically in t (odd and 2*pi-periodic)."""
        k = self.k
        x1, x2, x3, x4 = self.bp.x
        x = self._x_of_t(t)
        sq = k.l1 * (x2 - x1) / 2 * np.sin(t) * np.sqrt((x3 - x) * (x4 - x))
        kk = k.m1 * (k.f1 + k.f2 - 1)
        D = kk * (k.l1 * x * x - k.S * x + k.a1) - 2 * self.RY(x)
        return np.arctan(kk * sq / D), D

    def _G(self, t):
        # (lambda1 x^2 - phi1 mu1) Theta_Y(x) / x along the substituted path
        x = self._x_of_t(t)
        th, _ = self._theta_t(t)
        return (self.k.l1 * x * x - self.k.a1) * th / x

    def theta_Y(self, x):
        """Theta_Y on [x1, x2], principal arctan with the positivity check on the denominator."""
        k = self.k
        x = np.asarray(x, dtype=float)
        x1, x2 = self.bp.x1, self.bp.x2
        if np.any((x < x1 - 1e-12) | (x > x2 + 1e-12)):
            raise ValueError("theta_Y is defined on [x1, x2]")
        kk = k.m1 * (k.f1 + k.f2 - 1)
        D = kk * (k.l1 * x * x - k.S * x + k.a1) - 2 * self.RY(x)
        if np.any(D <= 0):
            raise BranchAmbiguity("denominator of Theta_Y is not positive on [x1, x2]")
        num = kk * np.sqrt(np.maximum(-k.delta1(x), 0.0))
        return np.arctan(num / D)

    def theta_Y_arg(self, x):
        """Theta_Y from its definition as an argument, using the upper-side limit of Y*."""
        k = self.k
        x = np.asarray(x, dtype=float)
        z = k.l2 * k.m1 * x * (1 - k.f1 - k.f2) * k.Y_star_onesided(x, "above") - self.RY(x)
        return np.angle(z)

    # ---------------------------------------------------------------- nodes
    def _node_data(self, n):
        if n not in self._nodes:
            h = 2 * np.pi / n
            t = -np.pi + (np.arange(n) + 0.5) * h
            th, D = self._theta_t(t)
            if np.any(D <= 0):
                raise BranchAmbiguity("denominator of Theta_Y is not positive on [x1, x2]")
            x = self._x_of_t(t)
            G = (self.k.l1 * x * x - self.k.a1) * th / x
            self._nodes[n] = (t, x, G, h)
        return self._nodes[n]

    # ---------------------------------------------------------------- log phi_Y
    def _h1_roots(self, y):
        # roots of h1(., y) = -l1 y x^2 + b x - a1 y
        k = self.k
        a = -k.l1 * y
        b = -k.l2 * y * y + k.S * y - k.a2
        c = -k.a1 * y
        d = np.sqrt(b * b - 4 * a * c)
        d = np.where((np.conj(b) * d).real >= 0, d, -d)
        q = -0.5 * (b + d)
        return q / a, c / q

    def _t_hat(self, r):
        x1, x2 = self.bp.x1, self.bp.x2
        return np.arccos(1 - 2 * (r - x1) / (x2 - x1) + 0j)

    def _sub_value(self, Kfun, Knodes, t, h, th):
        """0.5*h*sum (K(t_j) - K(th)) cot((t_j - th)/2) with a guard for nodes close to th."""
        Kh = Kfun(np.array([th]))[0]
        diff = t - th
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = (Knodes - Kh) / np.tan(diff / 2)
        wrapped = np.abs(np.angle(np.exp(1j * diff.real))) + np.abs(diff.imag)
        close = wrapped < 1e-6
        if np.any(close):
            dK = cauchy_derivative(Kfun, th, 1e-2, 32)
            vals = np.where(close, 2 * dK, vals)
        return 0.5 * h * vals.sum(), Kh

    def _log_phi_one(self, y, n, side):
        """Integral I(y) with ``n`` trapezoid nodes; returns (value, used_pv)."""
        if y == 0:
            return 0j, False
        k = self.k
        t, x, G, h = self._node_data(n)
        x1, x2 = self.bp.x1, self.bp.x2
        ra, rb = self._h1_roots(y)
        ta, tb = self._t_hat(ra), self._t_hat(rb)
        near = [abs(ta.imag) < NEAR_STRIP, abs(tb.imag) < NEAR_STRIP]
        jac = (x2 - x1) / 2 * np.sin(t)
        on_circle = abs(abs(y) - self.R) <= CIRCLE_TOL * self.R
        if not any(near):
            f = y / np.pi * G / k.h1(x, y) * jac
            return 0.5 * h * f.sum(), False

        def sigma(th, r_is_a):
            if not on_circle:
                return np.sign(th.imag)
            if side is None:
                return 0.0
            # side value: sign that Im t_hat takes just inside / outside the circle
            yy = y * (1 - 1e-7) if side == "inside" else y * (1 + 1e-7)
            ra2, rb2 = self._h1_roots(yy)
            r2 = ra2 if abs(ra2 - (ra if r_is_a else rb)) < abs(rb2 - (ra if r_is_a else rb)) else rb2
            return np.sign(self._t_hat(r2).imag)

        if on_circle:
            tr = [ta, tb]
            inseg = [abs(tv.imag) < 1e-7 and -1e-9 <= tv.real <= np.pi + 1e-9 for tv in tr]
            if all(inseg):
                raise MultipleSingularities("both roots of h1(., y) lie on [x1, x2]")
        pref = -1.0 / (np.pi * k.l1)
        if near[0] and near[1]:
            # partial fractions; each simple pole subtracted separately
            out = 0j
            for r, th, sgn, is_a in ((ra, ta, 1.0, True), (rb, tb, -1.0, False)):
                Kf = lambda tt: self._G(tt)
                s, Kh = self._sub_value(Kf, G, t, h, th)
                out += sgn * (s + 1j * np.pi * sigma(th, is_a) * Kh)
            return pref * out / (ra - rb), on_circle
        if near[0]:
            r, s_, th, is_a = ra, rb, ta, True
        else:
            r, s_, th, is_a = rb, ra, tb, False
        Kf = lambda tt: pref * self._G(tt) / (self._x_of_t(tt) - s_)
        Knodes = pref * G / (x - s_)
        s, Kh = self._sub_value(Kf, Knodes, t, h, th)
        return s + 1j * np.pi * sigma(th, is_a) * Kh, on_circle

    def log_varphi_Y(self, y, side=None, pv=False):
        """The exponent I(y) of phi_Y.

        On the circle |y| = R the integral is singular: ``side`` ('inside' or 'outside')
        selects a boundary value and ``pv=True`` the principal value.
        """
        if side not in (None, "inside", "outside"):
            raise ValueError(f"side must be None, 'inside' or 'outside', got {side!r}")
        y = np.asarray(y, dtype=complex)
        flat = y.ravel()
        on = np.abs(np.abs(flat) - self.R) <= CIRCLE_TOL * self.R
        if np.any(on) and side is None and not pv:
            raise NearSingularity("y lies on the circle |y| = sqrt(phi2/rho2); choose a side or pv=True")
        out = np.empty(flat.shape, dtype=complex)
        q = self.quad
        for i, yi in enumerate(flat):
            prev = None
            n = q.min_nodes
            while True:
                val, used = self._log_phi_one(complex(yi), n, side)
                if prev is not None and abs(val - prev) <= q.tol * max(1.0, abs(val)):
                    break
                if n >= q.max_nodes:
                    raise NonConvergence(f"phi_Y quadrature did not converge at y={yi}")
                prev, n = val, 2 * n
            if used:
                self.pv_used = True
            out[i] = val
        return out.reshape(y.shape) if y.ndim else out[0]

    def varphi_Y(self, y, side=None):
        return np.exp(self.log_varphi_Y(y, side=side))

    def varphi_Y_pv(self, y):
        """exp of the principal value integral; equals varphi_Y off the circle."""
        return np.exp(self.log_varphi_Y(y, pv=True))

    # ---------------------------------------------------------------- alpha_Y
    def _alpha_parts(self, y):
        k = self.k
        y = np.asarray(y, dtype=complex)
        X = k.X_star(y)
        a = 1 - k.f1 - k.f2
        num = -k.m1 * a * k.a2 * X + y * self.RY(X)
        den = y * (-k.l2 * k.m1 * X * a * y + self.RY(X))
        return num, den, X

    def alpha_Y(self, y, form="rational"):
        y = np.asarray(y, dtype=complex)
        if np.any(y == 0):
            raise PoleOfAlpha("alpha_Y is not defined at y = 0")
        k = self.k
        if form == "rational":
            num, den, X = self._alpha_parts(y)
            scale = np.abs(num) + 1e-300
        elif form == "factored":
            X = k.X_star(y)
            yr = self.R ** 2 / y
            num = k.h3(X, yr) * k.h2(X, y)
            den = k.h2(X, yr) * k.h3(X, y)
            scale = np.abs(num) + 1e-300
        else:
            raise ValueError(f"unknown form {form!r}")
        if np.any(np.abs(den) < 1e-14 * scale):
            raise PoleOfAlpha("alpha_Y has a pole at the requested point")
        return num / den

    def alpha_denominator_contour(self, n: int = 2048):
        """Points -l2 mu1 X*(y)(1-phi1-phi2) y + R_Y(X*(y)) for y on the circle."""
        y = self.R * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
        _, den, _ = self._alpha_parts(y)
        return den / y

    def index_winding(self, n: int = 2048) -> int:
        y = self.R * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
        ph = np.angle(self.alpha_Y(y))
        jumps = np.diff(np.unwrap(np.append(ph, ph[0])))
        if np.any(np.abs(jumps) > np.pi / 2):
            raise PhaseAliasing(f"phase of alpha_Y jumps by more than pi/2 with n={n}")
        return int(round(jumps.sum() / (2 * np.pi)))

    # ---------------------------------------------------------------- P(0,0) and boundary GFs
    @cached_property
    def poles(self):
        return locate_poles(self.k, self.bp)

    @property
    def case_phi2_vs_rho2(self) -> str:
        return "phi2>rho2" if self.k.f2 > self.k.r2 else "phi2<=rho2"

    @cached_property
    def P00(self) -> float:
        k = self.k
        phi1 = self.varphi_Y(1.0, side="inside" if abs(1 - self.R) <= CIRCLE_TOL * self.R else None)
        if k.f2 > k.r2:
            val = (1 - k.r1 - (1 - k.f1) / k.f2 * k.r2) / phi1
        else:
            val = k.f1 * (1 - (1 - k.f2) / k.f1 * k.r1 - k.r2) / ((1 - k.f2) * phi1)
        return float(np.real(val))

    @property
    def P10(self) -> float:
        k = self.k
        return (-k.f1 + (1 - k.f2) * k.r1 + k.f1 * k.r2 + (1 - k.f2) * self.P00) / (1 - k.f1 - k.f2)

    @property
    def P01(self) -> float:
        k = self.k
        return (-k.f2 + (1 - k.f1) * k.r2 + k.f2 * k.r1 + (1 - k.f1) * self.P00) / (1 - k.f1 - k.f2)

    def _coef(self):
        k = self.k
        a = 1 - k.f1 - k.f2
        return -k.f2 * self.P00 / a, (1 - k.f1) * self.P00 / a

    def region(self, y) -> np.ndarray:
        m = np.abs(np.asarray(y, dtype=complex))
        return np.where(np.abs(m - self.R) <= CIRCLE_TOL * self.R, "boundary",
                        np.where(m < self.R, "inside_disk", "outside_disk"))

    def F_Y(self, y):
        """The sectionally analytic function -phi2 P00/(1-phi1-phi2) * phi_Y(y) (off the circle)."""
        A, _ = self._coef()
        return A * self.varphi_Y(y)

    def P0y(self, y):
        """P(0, y), meromorphic in C minus [y3, y4]."""
        y = np.asarray(y, dtype=complex)
        flat = y.ravel()
        A, B = self._coef()
        bp = self.bp
        cut = (np.abs(flat.imag) <= 1e-12 * np.maximum(1, np.abs(flat))) & \
              (flat.real >= bp.y3 - 1e-12) & (flat.real <= bp.y4 + 1e-12)
        if np.any(cut):
            raise OnCut("P(0, y) is not defined on [y3, y4]")
        if self.poles.has_pole_in_annulus:
            xp = self.poles.xi_plus
            if np.any(np.abs(flat - xp) < 1e-10 * xp):
                raise AtPole(f"P(0, y) has a pole at xi_plus = {xp}")
        reg = self.region(flat)
        out = np.empty(flat.shape, dtype=complex)
        ins = reg == "inside_disk"
        if np.any(ins):
            out[ins] = A * self.varphi_Y(flat[ins]) + B
        bnd = reg == "boundary"
        if np.any(bnd):
            out[bnd] = A * self.varphi_Y(flat[bnd], side="inside") + B
        outs = reg == "outside_disk"
        if np.any(outs):
            try:
                al = self.alpha_Y(flat[outs])
            except PoleOfAlpha as e:
                raise AtPole(str(e)) from None
            out[outs] = A * al * self.varphi_Y(flat[outs]) + B
        return out.reshape(y.shape) if y.ndim else out[0]

    def evaluate_P0y(self, y) -> GFValue:
        return GFValue(complex(self.P0y(complex(y))), str(self.region(complex(y))))

    @cached_property
    def swapped_solver(self) -> "RHSolver":
        return RHSolver(self.params.swapped(), self.quad)

    def Px0(self, x):
        """P(x, 0) from the same construction with the queue labels exchanged."""
        return self.swapped_solver.P0y(x)

    def Pxy(self, x, y):
        k = self.k
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        x, y = np.broadcast_arrays(x, y)
        h1 = k.h1(x, y)
        scale = k.S * (1 + np.abs(x)) ** 2 * (1 + np.abs(y)) ** 2
        if np.any(np.abs(h1) < 1e-13 * scale):
            raise KernelZero("h1(x, y) vanishes; use the boundary relations instead")
        return (k.h2(x, y) * self.Px0(x) + k.h3(x, y) * self.P0y(y) + k.h4(x, y) * self.P00) / h1

    @cached_property
    def boundary(self):
        k = self.k
        y_removable = not (k.f1 < k.r1 and k.f2 > k.r2)
        x_removable = not (k.f2 < k.r2 and k.f1 > k.r1)
        return boundary_relations(k, self.P00, self.P10, self.P01, self.Px0, self.P0y,
                                  x_pole_removable=x_removable, y_pole_removable=y_removable)

    def P1y(self, y):
        return self.boundary.P1y(y)

    def Px1(self, x):
        return self.boundary.Px1(x)

    def boundary_condition_residual(self, y):
        """Re(i * h3/h2 * (P(0,y) - (1-phi1)P00/(1-phi1-phi2))) on the circle."""
        k = self.k
        y = np.asarray(y, dtype=complex)
        X = k.X_star(y)
        _, B = self._coef()
        return np.real(1j * k.h3(X, y) / k.h2(X, y) * (self.P0y(y) - B))

    def mean_N2(self) -> float:
        """E[N2] as the derivative of P(1, y) at y = 1."""
        return self._mean(self.P1y, self.k.f2 / self.k.r2, self.poles.rho_Y, not self.boundary.y_pole_removable)

    def mean_N1(self) -> float:
        s = self.swapped_solver
        return s._mean(s.P1y, s.k.f2 / s.k.r2, s.poles.rho_Y, not s.boundary.y_pole_removable)

    @staticmethod
    def _mean(f, special, rho, is_pole):
        limit = rho - 1
        if is_pole:
            limit = min(limit, special - 1)
        rad = 0.4 * limit
        d = abs(special - 1)
        if not is_pole and 0.7 * rad < d < 1.3 * rad:
            rad = 0.5 * d if d > 0.1 * limit else min(0.4 * limit, 2 * d + 0.1 * limit)
        return float(np.real(cauchy_derivative(f, 1.0, rad, 64)))

    def taylor_P0y(self, n: int, radius: float = 0.5) -> np.ndarray:
        return taylor_coefficients(self.P0y, n, radius).real

    def taylor_P1y(self, n: int, radius: float = 0.5) -> np.ndarray:
        return taylor_coefficients(self.P1y, n, radius).real

    def joint_coefficients(self, n: int, radius: float = 0.5, points: int = 32) -> np.ndarray:
        """p(n1, n2) for n1, n2 < n via a double trapezoidal Cauchy integral."""
        z = radius * np.exp(2j * np.pi * (np.arange(points) + 0.25) / points)
        w = radius * np.exp(2j * np.pi * (np.arange(points) + 0.6) / points)
        X, Y = np.meshgrid(z, w, indexing="ij")
        vals = self.Pxy(X, Y)
        j = np.arange(n)
        ez = np.exp(-2j * np.pi * np.outer(j, np.arange(points) + 0.25) / points)
        ew = np.exp(-2j * np.pi * np.outer(j, np.arange(points) + 0.6) / points)
        c = ez @ vals @ ew.T / points ** 2
        return (c / np.outer(radius ** j, radius ** j)).real


def compute_P00(params: ModelParams) -> float:
    return RHSolver(params).P00
