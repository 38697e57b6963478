import numpy as np
import pytest

from helpers import CANONICAL, CASE_D_SMALL, construct_params
from nwcgps.errors import AtPole, KernelZero, NearSingularity, OnCut, PoleOfAlpha, UnstableSystemError
from nwcgps.model import ModelParams
from nwcgps.oracle import marginal_pmf
from nwcgps.rh_solver import QuadratureConfig, RHSolver, compute_P00, taylor_coefficients

SYMMETRIC = ModelParams(0.3, 0.3, 1.0, 1.0, 1.0, 0.7, 0.7)


def test_rejects_unstable():
    with pytest.raises(UnstableSystemError):
        RHSolver(ModelParams(0.9, 0.9, 1, 1, 1, 0.7, 0.6))


# ---------------------------------------------------------------- Theta_Y

def test_theta_vanishes_at_endpoints(solver):
    bp = solver.bp
    assert solver.theta_Y(bp.x1) == pytest.approx(0, abs=1e-7)
    assert solver.theta_Y(bp.x2) == pytest.approx(0, abs=1e-7)


def test_theta_range(solver):
    x = np.linspace(solver.bp.x1, solver.bp.x2, 101)
    th = solver.theta_Y(x)
    assert np.all(th >= 0) and np.all(th < np.pi / 2)


def test_theta_matches_argument_definition(solver):
    bp = solver.bp
    for x in (0.5 * (bp.x1 + bp.x2), bp.x1 + 0.1 * (bp.x2 - bp.x1), bp.x2 - 0.05 * (bp.x2 - bp.x1)):
        assert solver.theta_Y(x) == pytest.approx(solver.theta_Y_arg(x), abs=1e-10)


def test_theta_outside_segment_rejected(solver):
    with pytest.raises(ValueError):
        solver.theta_Y(solver.bp.x2 + 0.1)


def test_theta_vanishes_near_work_conserving_limit():
    s = RHSolver(construct_params(0.2, 0.3, excess=1e-9))
    x = np.linspace(s.bp.x1, s.bp.x2, 51)
    assert np.max(np.abs(s.theta_Y(x))) < 1e-8


# ---------------------------------------------------------------- phi_Y

def test_varphi_at_zero(solver):
    assert solver.varphi_Y(0.0) == 1


def test_varphi_at_one_two_tolerances():
    a = RHSolver(CANONICAL, QuadratureConfig(tol=1e-8)).varphi_Y(1.0)
    b = RHSolver(CANONICAL, QuadratureConfig(tol=1e-13)).varphi_Y(1.0)
    assert abs(a - b) < 1e-8
    assert b.real > 0 and abs(b.imag) < 1e-14


def test_varphi_trivial_near_work_conserving_limit():
    s = RHSolver(construct_params(0.2, 0.3, excess=1e-9))
    rng = np.random.default_rng(0)
    y = list(rng.uniform(-2, 2, 10) + 1j * rng.uniform(-2, 2, 10)) + [1.0, 0.5, 3.0]
    y = [w for w in y if abs(abs(w) - s.R) > 1e-3]
    assert np.max(np.abs(s.varphi_Y(np.array(y)) - 1)) < 1e-7


def test_near_singularity_on_circle(solver):
    with pytest.raises(NearSingularity):
        solver.log_varphi_Y(solver.R * np.exp(0.3j))
    with pytest.raises(ValueError):
        solver.log_varphi_Y(0.5, side="left")


def test_pv_is_mean_of_side_limits():
    s = RHSolver(SYMMETRIC)
    y = s.R * np.exp(0.7j)
    pv = s.log_varphi_Y(y, pv=True)
    for d in (1e-5, 1e-6, 1e-7):
        avg = 0.5 * (s.log_varphi_Y(y * (1 + d)) + s.log_varphi_Y(y * (1 - d)))
        assert abs(avg - pv) < 1e-6 * max(1.0, 1e5 * d)
    assert s.pv_used


def test_pv_refinement_converges_linearly():
    s = RHSolver(SYMMETRIC)
    y = s.R * np.exp(1.1j)
    pv = s.log_varphi_Y(y, pv=True)
    errs = []
    for d in (1e-2, 5e-3, 2.5e-3, 1.25e-3):
        avg = 0.5 * (s.log_varphi_Y(y * (1 + d)) + s.log_varphi_Y(y * (1 - d)))
        errs.append(abs(avg - pv))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    # simple pole: the averaged one-sided values converge at least linearly in delta
    assert np.all(ratios > 1.8)


def test_side_values_differ_by_jump_on_circle(solver):
    y = solver.R * np.exp(0.4j)
    ins = solver.log_varphi_Y(y, side="inside")
    out = solver.log_varphi_Y(y, side="outside")
    near_in = solver.log_varphi_Y(y * (1 - 1e-8))
    near_out = solver.log_varphi_Y(y * (1 + 1e-8))
    assert abs(ins - near_in) < 1e-6
    assert abs(out - near_out) < 1e-6


def test_pv_at_y3_is_finite(solver):
    v = solver.varphi_Y_pv(solver.bp.y3)
    assert np.isfinite(v) and v.real > 0


# ---------------------------------------------------------------- alpha_Y

def test_alpha_unimodular_on_circle(solver):
    y = solver.R * np.exp(2j * np.pi * (np.arange(200) + 0.5) / 200)
    assert np.max(np.abs(np.abs(solver.alpha_Y(y)) - 1)) < 1e-9


def test_alpha_forms_agree(solver):
    rng = np.random.default_rng(11)
    y = rng.uniform(-4, 4, 100) + 1j * rng.uniform(0.05, 4, 100)
    a = solver.alpha_Y(y)
    b = solver.alpha_Y(y, form="factored")
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-9


def test_alpha_errors(solver):
    with pytest.raises(PoleOfAlpha):
        solver.alpha_Y(0.0)
    with pytest.raises(PoleOfAlpha):
        solver.alpha_Y(solver.poles.xi_plus)
    with pytest.raises(ValueError):
        solver.alpha_Y(1.0, form="other")


def test_alpha_at_one_when_phi2_below_rho2():
    p = CASE_D_SMALL.swapped()
    s = RHSolver(p)
    k = s.k
    assert k.f2 < k.r2
    expected = (1 - k.f2) / k.f1 * (1 - k.r1 - (1 - k.f1) * k.r2 / k.f2) / (
        1 - (1 - k.f2) * k.r1 / k.f1 - k.r2)
    assert s.alpha_Y(1.0).real == pytest.approx(expected, rel=1e-12)


def test_index_and_contour(solver):
    assert solver.index_winding(2048) == 0
    assert np.max(solver.alpha_denominator_contour(2048).real) < 0


# ---------------------------------------------------------------- P00

def test_P00_frozen(solver):
    assert solver.P00 == pytest.approx(0.2016009921895939, rel=1e-11)
    assert 0 < solver.P00 < 1
    assert compute_P00(CANONICAL) == pytest.approx(solver.P00, rel=1e-14)


def test_P00_against_oracle(solver, grid):
    assert abs(solver.P00 - grid.p[0, 0]) < 1e-3
    assert abs(solver.P00 - grid.p[0, 0]) < 1e-12


def test_P00_work_conserving_limit():
    assert compute_P00(construct_params(0.2, 0.3, excess=1e-6)) == pytest.approx(0.5, abs=1e-4)


def test_P00_continuous_across_phi2_equal_rho2():
    base = CANONICAL
    mu2 = base.nu2 * base.r / (base.phi1 + base.phi2)
    vals = []
    for eps in (-1e-5, 1e-5):
        p = ModelParams(base.lambda1, (base.phi2 + eps) * mu2, base.nu1, base.nu2, base.r, base.phi1, base.phi2)
        s = RHSolver(p)
        vals.append((s.case_phi2_vs_rho2, s.P00))
    assert {v[0] for v in vals} == {"phi2>rho2", "phi2<=rho2"}
    assert abs(vals[0][1] - vals[1][1]) < 1e-4


# ---------------------------------------------------------------- P(0, y)

def test_P0y_at_zero_and_one(solver):
    assert solver.P0y(0.0) == pytest.approx(solver.P00, rel=1e-14)
    assert solver.P0y(1.0).real == pytest.approx(solver.P01, rel=1e-10)


def test_P0y_sign_conventions_against_oracle(solver, grid):
    for y in (0.0, 0.5, 1.0):
        ref = np.polynomial.polynomial.polyval(y, grid.p[0, :])
        assert solver.P0y(y).real == pytest.approx(ref, abs=1e-12)


def test_P0y_taylor_against_oracle(solver, grid):
    c = solver.taylor_P0y(11)
    assert np.max(np.abs(c - grid.p[0, :11])) < 1e-4
    assert np.all(c > -1e-9)


def test_Px0_taylor_against_oracle(solver, grid):
    c = taylor_coefficients(solver.Px0, 11).real
    assert np.max(np.abs(c - grid.p[:11, 0])) < 1e-4


def test_P0y_outside_series(solver, grid):
    # beyond the circle the outside formula still matches the oracle power series
    for y in (1.2, 1.3 + 0.1j, -1.2):
        ref = np.polynomial.polynomial.polyval(y, grid.p[0, :])
        assert abs(solver.P0y(y) - ref) < 1e-9


def test_P0y_errors(solver):
    bp = solver.bp
    with pytest.raises(OnCut):
        solver.P0y(0.5 * (bp.y3 + bp.y4))
    with pytest.raises(AtPole):
        solver.P0y(solver.poles.xi_plus)


def test_gfvalue_regions(solver):
    assert solver.evaluate_P0y(0.5).region == "inside_disk"
    assert solver.evaluate_P0y(2.0j).region == "outside_disk"
    assert solver.evaluate_P0y(solver.R).region == "boundary"


def test_boundary_condition_on_circle(solver):
    y = solver.R * np.exp(2j * np.pi * (np.arange(200) + 0.5) / 200)
    assert np.max(np.abs(solver.boundary_condition_residual(y))) < 1e-7


def test_gluing_across_circle(solver):
    y = solver.R * np.exp(2j * np.pi * (np.arange(40) + 0.5) / 40)
    Fi = solver.varphi_Y(y, side="inside")
    Fe = solver.varphi_Y(y, side="outside")
    assert np.max(np.abs(Fi - solver.alpha_Y(y) * Fe)) < 1e-7


def test_far_field(solver):
    from scipy.integrate import quad
    k = solver.k
    A = -k.f2 * solver.P00 / (1 - k.f1 - k.f2)
    # h1(x, y) ~ -lambda2 x y^2, so log phi_Y(y) ~ -c / y with c a plain integral of Theta_Y
    c = quad(lambda x: (k.l1 * x * x - k.a1) * solver.theta_Y(x) / x ** 2,
             solver.bp.x1, solver.bp.x2, epsabs=1e-14, limit=200)[0] / (np.pi * k.l2)
    ang = np.array([0.3, 1.5, 2.9, -2.0])
    for rad in (1e3, 1e4):
        y = rad * np.exp(1j * ang)
        F = solver.F_Y(y)
        assert np.max(np.abs(F - A * np.exp(-c / y))) < 1e-3 / rad
    assert np.max(np.abs(solver.F_Y(1e4 * np.exp(1j * ang)) - A)) < 1e-4


def test_reflection_near_circle(solver, grid):
    for theta in (0.5, 1.7, -2.4):
        y = solver.R * (1 - 1e-7) * np.exp(1j * theta)
        reflected = np.conj(solver.P0y(solver.R ** 2 / np.conj(y)))
        series = np.polynomial.polynomial.polyval(np.conj(y), grid.p[0, :])
        assert abs(reflected - series) < 1e-4


# ---------------------------------------------------------------- P(x, y)

def test_Pxy_normalization(solver):
    with pytest.raises(KernelZero):
        solver.Pxy(1.0, 1.0)
    assert solver.P1y(1.0) == pytest.approx(1.0, abs=1e-9)
    assert solver.Px1(1.0) == pytest.approx(1.0, abs=1e-9)
    assert abs(solver.Pxy(1 - 1e-6, 1 - 2e-6) - 1) < 1e-5


def test_Pxy_boundary_values(solver):
    x = np.array([0.3, -0.5 + 0.2j, 0.8j])
    assert np.allclose(solver.Pxy(x, 0.0), solver.Px0(x), rtol=1e-12)
    assert np.allclose(solver.Pxy(0.0, x), solver.P0y(x), rtol=1e-12)


def test_joint_coefficients_against_oracle(solver, grid):
    c = solver.joint_coefficients(7)
    assert np.max(np.abs(c - grid.p[:7, :7])) < 1e-4
    assert np.all(c > -1e-9)


def test_P1y_against_marginal(solver, grid):
    pmf = marginal_pmf(grid, 2)
    for y in (0.2, 0.5, 0.9, -0.7):
        assert solver.P1y(y).real == pytest.approx(np.polynomial.polynomial.polyval(y, pmf), abs=1e-12)


def test_means_against_oracle(solver, grid):
    n = np.arange(grid.N)
    assert solver.mean_N2() == pytest.approx(n @ marginal_pmf(grid, 2), rel=1e-9)
    assert solver.mean_N1() == pytest.approx(n @ marginal_pmf(grid, 1), rel=1e-9)


def test_case_d_solver_against_oracle(solver_d):
    from nwcgps.oracle import solve_stationary
    g = solve_stationary(CASE_D_SMALL, 300)
    assert solver_d.P00 == pytest.approx(g.p[0, 0], abs=1e-10)
    c = solver_d.joint_coefficients(5)
    assert np.max(np.abs(c - g.p[:5, :5])) < 1e-8
