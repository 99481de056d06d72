import math

import numpy as np
import pytest
from scipy import optimize

from pencon.builtins import builtin_phi
from pencon.correspondence import (
    classify_regime,
    compute_c,
    compute_d,
    d_routes,
    endpoint_limits,
    f_of_lambda,
    g_of_tau,
    invert_g,
    monotone_decreasing,
    sample_curve,
    thresholds,
    verify_sol_equality,
)
from pencon.errors import NonPositiveC, NotBracketed
from pencon.solvers import ProblemInstance, brute_force_argmin, constrained_objective, solve_constrained
from pencon.structured import structured_from_coordinates
from pencon.subspaces import nullspace

from conftest import quad2d_instance


def gdemo_g(tau):
    """g for the two-piece instance: 2(4 - tau) on (0, 2], 4(3 - tau) on (2, 3)."""
    return 2.0 * (4.0 - tau) if tau <= 2.0 else 4.0 * (3.0 - tau)


def quad2d_value(tau):
    """min (x1 - 3)^2 s.t. |(x1, x1 + x2)|_2 <= tau, solved by SLSQP (independent of the PDHG code)."""
    cons = {"type": "ineq", "fun": lambda x: tau ** 2 - x[0] ** 2 - (x[0] + x[1]) ** 2}
    res = optimize.minimize(lambda x: (x[0] - 3.0) ** 2, [0.0, 0.0], constraints=[cons], method="SLSQP",
                            options={"ftol": 1e-14, "maxiter": 500})
    return res.fun


# -- thresholds --------------------------------------------------------------------

def test_compute_c(gdemo, remark2, quad2d):
    assert compute_c(gdemo) == pytest.approx(3.0, abs=1e-12)
    assert compute_c(remark2) == pytest.approx(2.0, abs=1e-12)
    assert compute_c(quad2d) == pytest.approx(3.0, abs=1e-9)


def test_compute_c_nonpositive():
    # minimizer (4, 0) + span e2 meets N(L) = span (1, -1) at (4, -4)
    phi = builtin_phi("quadratic", {"Q": [[2.0]], "b": [4.0]})
    pi = ProblemInstance(structured_from_coordinates(2, phi, [0], [1]), [[1.0, 1.0]], "L2")
    with pytest.raises(NonPositiveC):
        compute_c(pi)


def test_compute_d(gdemo, remark2, burg, quad2d):
    assert compute_d(gdemo) == pytest.approx(8.0, abs=1e-3)
    assert compute_d(remark2) == pytest.approx(4.0, abs=1e-3)
    assert compute_d(burg) == math.inf
    assert compute_d(quad2d) == pytest.approx(6.0, abs=1e-3)


def test_d_routes_agree(gdemo):
    routes = d_routes(gdemo)
    assert set(routes) == {"g_limit", "dual_argmin", "lambda_bisection"}
    for v in routes.values():
        assert v == pytest.approx(8.0, abs=1e-3)


def test_d_zero_in_subdifferential_oracle(gdemo):
    # independent check: 0 in d(Phi + 8|.|)(0) since Phi'(0) = -8, and not for lam < 8
    phi_prime_0 = -8.0
    assert abs(phi_prime_0) <= 8.0 and not abs(phi_prime_0) <= 7.99
    assert gdemo.phi.subgradient(np.zeros(1)).contains(np.array([phi_prime_0]))


@pytest.mark.parametrize("tag", ["L1", "L2", "Linf"])
def test_thresholds_2d_all_norms(tag):
    th = thresholds(quad2d_instance(tag))
    assert th.c == pytest.approx(3.0, abs=1e-9)
    assert th.d == pytest.approx(6.0, abs=1e-3)


# -- g and f ---------------------------------------------------------------------------

@pytest.mark.parametrize("tau", [0.5, 1.0, 1.5, 2.0, 2.2, 2.5, 2.9])
def test_g_gdemo(gdemo, tau):
    assert g_of_tau(gdemo, tau, c=3.0) == pytest.approx(gdemo_g(tau), abs=1e-6)


@pytest.mark.parametrize("lam,tau", [(6.0, 1.0), (2.0, 2.5)])
def test_f_gdemo(gdemo, lam, tau):
    assert f_of_lambda(gdemo, lam) == pytest.approx(tau, abs=1e-6)


def test_f_remark2(remark2):
    assert f_of_lambda(remark2, 1.0) == pytest.approx(1.5, abs=1e-6)


def test_g_domain(gdemo):
    with pytest.raises(ValueError):
        g_of_tau(gdemo, 3.0, c=3.0)
    with pytest.raises(ValueError):
        f_of_lambda(gdemo, 8.0, d=8.0)


@pytest.mark.parametrize("tau", [0.3, 1.0, 1.7, 2.4])
def test_g_2d_matches_value_function_sensitivity(quad2d, tau):
    h = 1e-4
    slope = (quad2d_value(tau + h) - quad2d_value(tau - h)) / (2 * h)
    assert -slope == pytest.approx(2.0 * (3.0 - tau), abs=1e-4)
    assert g_of_tau(quad2d, tau, c=3.0) == pytest.approx(-slope, abs=1e-4)


def test_invert_g(gdemo):
    assert invert_g(gdemo, 6.0, c=3.0, d=8.0) == pytest.approx(1.0, abs=1e-7)
    lam = g_of_tau(gdemo, 0.7, c=3.0)
    assert f_of_lambda(gdemo, lam) == pytest.approx(0.7, abs=2e-8)
    with pytest.raises(NotBracketed):
        invert_g(gdemo, 100.0, c=3.0, d=8.0)


# -- curve properties ---------------------------------------------------------------------

INSTANCES = ["gdemo", "burg", "quad2d"]


@pytest.mark.parametrize("fixture", INSTANCES)
def test_strict_monotonicity(request, fixture):
    pi = request.getfixturevalue(fixture)
    th = thresholds(pi)
    taus = th.c * np.arange(1, 21) / 21
    curve = sample_curve(pi, taus, th)
    assert curve.is_monotone(1e-5)
    assert all(s.converged for s in curve.samples)


@pytest.mark.parametrize("fixture", INSTANCES)
def test_round_trips(request, fixture):
    pi = request.getfixturevalue(fixture)
    th = thresholds(pi)
    for tau in th.c * np.arange(1, 21) / 21:
        assert abs(f_of_lambda(pi, g_of_tau(pi, tau, c=th.c)) - tau) <= 1e-4
    lams = th.d * np.arange(1, 21) / 21 if math.isfinite(th.d) else np.geomspace(0.05, 50, 20)
    for lam in lams:
        assert abs(g_of_tau(pi, f_of_lambda(pi, lam), c=th.c) - lam) <= 1e-4


@pytest.mark.parametrize("fixture", ["gdemo", "quad2d"])
def test_threshold_consistency(request, fixture):
    pi = request.getfixturevalue(fixture)
    th = thresholds(pi)
    small = th.c * np.array([0.01, 0.02, 0.03])
    gs = [g_of_tau(pi, t, c=th.c) for t in small]
    at0 = np.polyval(np.polyfit(small, gs, 2), 0.0)
    assert abs(at0 - th.d) <= 0.05 * th.d
    assert g_of_tau(pi, th.c * 0.999, c=th.c) <= 0.05 * th.d
    curve = sample_curve(pi, th.c * np.array([0.05, 0.1, 0.9, 0.95]), th)
    lim = endpoint_limits(curve)
    assert abs(lim["tau_to_0"] - th.d) <= 0.05 * th.d and abs(lim["tau_to_c"]) <= 0.05 * th.d


def test_monotone_helper():
    assert monotone_decreasing([3.0, 2.0, 1.0])
    assert not monotone_decreasing([3.0, 3.0, 1.0])
    assert not monotone_decreasing([1.0])


def test_sample_curve_rejects_out_of_range(gdemo):
    with pytest.raises(ValueError):
        sample_curve(gdemo, [0.5, 3.5, 1.0])


def test_choice_independence_dual(quad2d):
    runs = [g_of_tau(quad2d, 1.2, c=3.0, seed=s) for s in (1, 2, 3)]
    assert max(runs) - min(runs) <= 1e-5


# -- regimes ------------------------------------------------------------------------------

def test_classify_regime(gdemo):
    lab = classify_regime(gdemo, tau=5.0, c=3.0, d=8.0, verify=True)
    assert lab.label == "saturated" and lab.verified
    assert abs(solve_constrained(gdemo, 5.0).x[0] - 3.0) < 1e-6
    lab = classify_regime(gdemo, lam=10.0, c=3.0, d=8.0, verify=True)
    assert lab.label == "at_zero" and lab.verified
    lab = classify_regime(gdemo, tau=1.0, c=3.0, d=8.0, verify=True)
    assert lab.label == "interior" and lab.verified
    with pytest.raises(ValueError):
        classify_regime(gdemo, tau=1.0, lam=1.0)


# -- set equality -------------------------------------------------------------------------

def test_sol_equality_examples(gdemo, remark2):
    cmp_ = verify_sol_equality(gdemo, 1.0, 6.0)
    assert cmp_.equal and bool(cmp_)
    assert abs(cmp_.constrained.representative[0] - 1.0) <= 2e-3
    cmp_ = verify_sol_equality(gdemo, 1.0, 2.0)
    assert cmp_.disjoint and not cmp_.equal
    assert abs(cmp_.penalized.representative[0] - 2.5) <= 2e-3
    assert verify_sol_equality(remark2, 1.0, 3.0).equal


def test_sol_equality_2d(quad2d):
    cmp_ = verify_sol_equality(quad2d, 1.5, 3.0, grid_step=1e-2, box=[(-1, 4), (-4, 1)])
    assert cmp_.equal


def test_localization_disjointness(gdemo, quad2d):
    for pi, box, step in ((gdemo, [(-1, 4)], 1e-3), (quad2d, [(-1, 4), (-4, 1)], 1e-2)):
        c = compute_c(pi)
        NL = nullspace(pi.L)
        P_perp = np.eye(pi.n) - pi.phi.X2.projector
        for tau in c * np.array([0.2, 0.5, 0.8]):
            s = brute_force_argmin(constrained_objective(pi, tau, 1e-9), box, step, 1e-9)
            for x in s.points:
                assert np.linalg.norm(x - NL.projector @ x) >= step
                assert np.linalg.norm(P_perp @ (x - pi.phi.minimizer)) >= step
