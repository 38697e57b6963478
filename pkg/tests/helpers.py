import numpy as np

from nwcgps.model import ModelParams, stability_check

CANONICAL = ModelParams(0.3, 0.4, 1.0, 1.0, 1.0, 0.7, 0.6)
CASE_C = ModelParams(0.4879834986448403, 0.19604711228802021, 1.0, 1.0, 1.0,
                     0.7323423322338656, 0.32048701622037323)
CASE_D = ModelParams(0.4061206175599767, 0.5241919547565003, 1.0, 1.0, 1.0,
                     0.16046725916341115, 0.9368026508993346)
CASE_D_SMALL = ModelParams(0.35, 0.2, 1.0, 1.0, 1.0, 0.45, 0.9)


def random_stable(rng, count, max_load=0.9, min_excess=0.02):
    """Stable parameter sets with both stability left-hand sides below ``max_load``."""
    out = []
    while len(out) < count:
        f1, f2 = rng.uniform(0.05, 0.98, 2)
        if f1 + f2 < 1 + min_excess:
            continue
        nu1, nu2 = rng.uniform(0.5, 2.0, 2)
        r = rng.uniform(0.5, 2.0)
        mu1, mu2 = nu1 * r / (f1 + f2), nu2 * r / (f1 + f2)
        l1, l2 = rng.uniform(0.02, 1.0, 2) * (mu1, mu2)
        p = ModelParams(l1, l2, nu1, nu2, r, f1, f2)
        v = stability_check(p)
        if v.stable and max(v.lhs1, v.lhs2) < max_load:
            out.append(p)
    return out


def sylvester_resultant(k, w, which, var="x"):
    """Resultant of h1 and h_which eliminating ``var``, as a 3x3 Sylvester determinant.

    h1 is quadratic and h2, h3 are linear in either variable; coefficients are read off
    the polynomials by evaluation, independently of the closed-form quadratics.
    """
    if var == "x":
        h1 = lambda t: k.h1(t, w)
        hk = (lambda t: k.h2(t, w)) if which == 2 else (lambda t: k.h3(t, w))
    else:
        h1 = lambda t: k.h1(w, t)
        hk = (lambda t: k.h2(w, t)) if which == 2 else (lambda t: k.h3(w, t))
    a0 = h1(0.0)
    a2 = (h1(1.0) + h1(-1.0)) / 2 - a0
    a1 = (h1(1.0) - h1(-1.0)) / 2
    b0 = hk(0.0)
    b1 = hk(1.0) - b0
    M = np.array([[a2, a1, a0], [b1, b0, 0.0], [0.0, b1, b0]], dtype=complex)
    return np.linalg.det(M)


def construct_params(rho1, rho2, excess, nu1=1.0, nu2=1.0, r=1.0, phi1=0.5):
    """Parameters with given loads and phi1 + phi2 = 1 + excess."""
    phi2 = 1.0 + excess - phi1
    mu1, mu2 = nu1 * r / (phi1 + phi2), nu2 * r / (phi1 + phi2)
    return ModelParams(rho1 * mu1, rho2 * mu2, nu1, nu2, r, phi1, phi2)


# acceptance lines keyed by criterion number, printed in the terminal summary
ACCEPTANCE = {}
