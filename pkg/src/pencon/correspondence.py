"""Thresholds ``c``, ``d`` and the map ``g`` linking constrained and penalized solutions.

``c`` is the smallest value of ``|Lx|`` on ``argmin Phi``; ``d`` the smallest
dual norm on ``argmin Phi*(-L^T .)`` (``+inf`` when that set is empty). On
``(0, c)`` the map ``g(tau) = |p_hat|_*``, with ``p_hat`` solving ``D1(tau)``,
is a decreasing bijection onto ``(0, d)`` whose inverse is
``f(lam) = |L x_hat|`` with ``x_hat`` solving ``P2(lam)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import NonPositiveC, NotBracketed, RouteDisagreement
from .functions import FEAS_TOL, INF
from .norms import L1, L2, LINF
from .solvers import (
    CERT_TOL,
    ArgminSet,
    ProblemInstance,
    brute_force_argmin,
    constrained_objective,
    penalized_objective,
    solve_constrained,
    solve_dual_penalized,
    solve_penalized,
)
from .subspaces import intersect, nullspace, orthogonal_complement

ROUTE_TOL = 1e-3
ZERO_TOL = 1e-8
LAMBDA_CAP = 1e6


@dataclass(frozen=True)
class Thresholds:
    c: float
    d: float
    d_routes: dict = field(default_factory=dict)
    x_c: Optional[np.ndarray] = None


@dataclass(frozen=True)
class CurveSample:
    tau: float
    lam: float
    primal_obj: float
    dual_obj: float
    max_residual: float
    converged: bool


@dataclass(frozen=True)
class CorrespondenceCurve:
    samples: tuple
    thresholds: Thresholds

    @property
    def taus(self) -> np.ndarray:
        return np.array([s.tau for s in self.samples])

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([s.lam for s in self.samples])

    def is_monotone(self, noise: float = 1e-5) -> bool:
        return monotone_decreasing(self.lambdas, noise)


@dataclass(frozen=True)
class RegimeLabel:
    parameter: str
    value: float
    label: str
    containment: str
    verified: Optional[bool] = None


@dataclass(frozen=True)
class SolComparison:
    """Brute-force solution sets of ``P1(tau)`` and ``P2(lam)`` side by side."""

    tau: float
    lam: float
    constrained: ArgminSet
    penalized: ArgminSet
    hausdorff: float
    gap: float
    grid_step: float

    @property
    def equal(self) -> bool:
        return self.hausdorff <= 2.0 * self.grid_step

    @property
    def disjoint(self) -> bool:
        return self.gap > self.grid_step

    def __bool__(self) -> bool:
        return self.equal


def monotone_decreasing(values, noise: float = 1e-5) -> bool:
    """Strict decrease with each step larger than ``noise``."""
    v = np.asarray(values, dtype=float)
    return bool(len(v) >= 2 and np.all(np.diff(v) < -noise))


# -- c ---------------------------------------------------------------------

def _min_norm_affine(code: int, a: np.ndarray, A: np.ndarray):
    """``min_z |a + A z|`` for the given norm; returns (value, z)."""
    k = A.shape[1]
    if k == 0:
        return _vec_norm(code, a), np.zeros(0)
    if code == L2:
        z = np.linalg.lstsq(A, -a, rcond=None)[0]
        return float(np.linalg.norm(a + A @ z)), z
    m = len(a)
    if code == L1:
        # variables (z, t): min sum t, -t <= a + A z <= t
        cost = np.concatenate([np.zeros(k), np.ones(m)])
        A_ub = np.block([[A, -np.eye(m)], [-A, -np.eye(m)]])
        b_ub = np.concatenate([-a, a])
        bounds = [(None, None)] * k + [(0, None)] * m
    else:
        cost = np.concatenate([np.zeros(k), [1.0]])
        A_ub = np.block([[A, -np.ones((m, 1))], [-A, -np.ones((m, 1))]])
        b_ub = np.concatenate([-a, a])
        bounds = [(None, None)] * k + [(0, None)]
    res = optimize.linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    z = res.x[:k]
    return _vec_norm(code, a + A @ z), z


def _vec_norm(code, v):
    v = np.asarray(v, dtype=float)
    if code == L1:
        return float(np.abs(v).sum())
    if code == L2:
        return float(np.linalg.norm(v))
    return float(np.abs(v).max()) if v.size else 0.0


def c_point(pi: ProblemInstance):
    """``(c, x_c)`` with ``x_c`` a point of ``argmin Phi`` where ``|Lx|`` is smallest."""
    xm = pi.phi.minimizer
    B2 = pi.phi.X2.basis
    val, z = _min_norm_affine(pi.norm.code, pi.L @ xm, pi.L @ B2)
    return val, xm + B2 @ z


def compute_c(pi: ProblemInstance, feas_tol: float = FEAS_TOL) -> float:
    """``min |L x|`` over ``argmin Phi = {x1_check} + X2``.

    Raises
    ------
    NonPositiveC
        When the minimum is ``<= feas_tol``, i.e. ``argmin Phi`` meets ``N(L)``.
    """
    c, _ = c_point(pi)
    if c <= feas_tol:
        raise NonPositiveC(f"c = {c:.3g}: argmin Phi meets N(L)")
    return c


# -- d ---------------------------------------------------------------------

def _dual_norm_min(norm, A_eq, b_eq, a_int=None, lo=None, hi=None):
    """``min |p|_*`` subject to ``A_eq p = b_eq`` and ``lo <= a_int . p <= hi``.

    Returns ``inf`` when infeasible.
    """
    m = A_eq.shape[1] if A_eq.size else (len(a_int) if a_int is not None else 0)
    code = norm.dual_code
    if code == L2 and a_int is None:
        p = np.linalg.lstsq(A_eq, b_eq, rcond=None)[0]
        if np.linalg.norm(A_eq @ p - b_eq) > 1e-8 * max(1.0, np.linalg.norm(b_eq)):
            return INF
        return float(np.linalg.norm(p))
    if code == L2:
        cons = [{"type": "eq", "fun": lambda p: A_eq @ p - b_eq}] if A_eq.size else []
        cons.append({"type": "ineq", "fun": lambda p: np.array([a_int @ p - lo if math.isfinite(lo) else 1.0,
                                                                  hi - a_int @ p if math.isfinite(hi) else 1.0])})
        p0 = np.linalg.lstsq(np.vstack([A_eq, a_int]) if A_eq.size else a_int[None, :],
                             np.concatenate([b_eq, [_clip_mid(lo, hi)]]), rcond=None)[0]
        res = optimize.minimize(lambda p: float(p @ p), p0, jac=lambda p: 2 * p, constraints=cons,
                                method="SLSQP", options={"ftol": 1e-15, "maxiter": 500})
        if not res.success:
            return INF
        return float(np.linalg.norm(res.x))
    # polyhedral dual norm: linear program in (p, t)
    rows_ub, rhs_ub = [], []
    if code == LINF:
        nt = 1
        for i in range(m):
            e = np.zeros(m)
            e[i] = 1.0
            rows_ub += [np.concatenate([e, [-1.0]]), np.concatenate([-e, [-1.0]])]
            rhs_ub += [0.0, 0.0]
        cost = np.concatenate([np.zeros(m), [1.0]])
    else:
        nt = m
        rows_ub = list(np.block([[np.eye(m), -np.eye(m)], [-np.eye(m), -np.eye(m)]]))
        rhs_ub = [0.0] * (2 * m)
        cost = np.concatenate([np.zeros(m), np.ones(m)])
    if a_int is not None:
        if math.isfinite(hi):
            rows_ub.append(np.concatenate([a_int, np.zeros(nt)]))
            rhs_ub.append(hi)
        if math.isfinite(lo):
            rows_ub.append(np.concatenate([-a_int, np.zeros(nt)]))
            rhs_ub.append(-lo)
    A_eq_full = np.hstack([A_eq, np.zeros((A_eq.shape[0], nt))]) if A_eq.size else None
    res = optimize.linprog(cost, A_ub=np.array(rows_ub), b_ub=np.array(rhs_ub), A_eq=A_eq_full,
                           b_eq=b_eq if A_eq.size else None, bounds=[(None, None)] * m + [(0, None)] * nt,
                           method="highs")
    if res.status != 0:
        return INF
    return norm.dual(res.x[:m])


def _clip_mid(lo, hi):
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    return lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0.0)


def _minimize_on_nullspace(pi: ProblemInstance):
    """A minimizer of ``Phi`` over ``N(L)``, or None when ``dom Phi`` misses ``N(L)``."""
    V = intersect(nullspace(pi.L), orthogonal_complement(pi.phi.X3))
    if V.is_trivial:
        x0 = np.zeros(pi.n)
        return x0 if math.isfinite(pi.phi(x0)) else None
    W = V.basis

    def h(z):
        v = pi.phi(W @ z)
        return v if math.isfinite(v) else 1e300

    best = None
    for start in (W.T @ pi.phi.minimizer, np.zeros(V.dim)):
        res = optimize.minimize(h, start, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        if best is None or res.fun < best.fun:
            best = res
    return W @ best.x if best.fun < 1e299 else None


def d_by_dual_argmin(pi: ProblemInstance) -> float:
    """``d`` from ``argmin Phi*(-L^T .) = {p : -L^T p in dPhi(x0)}``, ``x0`` minimizing ``Phi`` on ``N(L)``."""
    x0 = _minimize_on_nullspace(pi)
    if x0 is None:
        return INF
    phi = pi.phi
    d1 = phi.phi.subgradient(phi.X1.basis.T @ x0)
    if d1.is_empty:
        return INF
    # -B1^T L^T p in dphi(x1),  B2^T L^T p = 0,  X3 part free
    A1 = -(pi.L @ phi.X1.basis).T
    A2 = (pi.L @ phi.X2.basis).T
    if d1.kind == "singleton":
        A_eq = np.vstack([A1, A2])
        b_eq = np.concatenate([d1.data["point"], np.zeros(A2.shape[0])])
        return _dual_norm_min(pi.norm, A_eq, b_eq)
    if d1.kind == "interval_1d":
        return _dual_norm_min(pi.norm, A2, np.zeros(A2.shape[0]), A1[0], d1.data["lo"], d1.data["hi"])
    raise NotImplementedError(f"subgradient kind {d1.kind!r} not supported for the dual-argmin route")


def d_by_g_limit(pi: ProblemInstance, c: float, cert_tol: float = CERT_TOL) -> float:
    """Extrapolate ``g`` to ``tau -> 0+`` from three small samples; ``inf`` on ``1/tau``-type growth."""
    taus = c * np.array([2.0 ** -4, 2.0 ** -5, 2.0 ** -6])
    gs = np.array([g_of_tau(pi, t, c=c, cert_tol=cert_tol) for t in taus])
    if gs[1] > 1.5 * gs[0] and gs[2] > 1.5 * gs[1]:
        return INF
    coef = np.polyfit(taus, gs, 2)
    return float(np.polyval(coef, 0.0))


def d_by_lambda_bisection(pi: ProblemInstance, cert_tol: float = CERT_TOL, rel_tol: float = 1e-9) -> float:
    """Smallest ``lam`` with a penalized solution in ``N(L)``; ``inf`` when none below ``1e6``."""
    def in_nullspace(lam):
        r = solve_penalized(pi, lam, cert_tol=cert_tol, raise_on_fail=False)
        return pi.norm.primal(pi.L @ r.x) <= ZERO_TOL

    hi = 1.0
    while not in_nullspace(hi):
        hi *= 2.0
        if hi > LAMBDA_CAP:
            return INF
    lo = 0.0 if hi == 1.0 else hi / 2.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if in_nullspace(mid):
            hi = mid
        else:
            lo = mid
    return hi


def d_routes(pi: ProblemInstance, c: Optional[float] = None, cert_tol: float = CERT_TOL) -> dict:
    c = compute_c(pi) if c is None else c
    return {
        "g_limit": d_by_g_limit(pi, c, cert_tol),
        "dual_argmin": d_by_dual_argmin(pi),
        "lambda_bisection": d_by_lambda_bisection(pi, cert_tol),
    }


def _check_routes(routes: dict, tol: float) -> float:
    vals = list(routes.values())
    if all(math.isinf(v) for v in vals):
        return INF
    if any(math.isinf(v) for v in vals) or max(vals) - min(vals) > tol:
        raise RouteDisagreement(f"routes for d disagree: {routes}")
    return float(routes["dual_argmin"])


def compute_d(pi: ProblemInstance, c: Optional[float] = None, tol: float = ROUTE_TOL,
              cert_tol: float = CERT_TOL) -> float:
    """``d`` by three independent routes that must agree within ``tol`` (or all be ``inf``).

    Raises
    ------
    RouteDisagreement
        When the routes disagree.
    """
    return _check_routes(d_routes(pi, c, cert_tol), tol)


def thresholds(pi: ProblemInstance, cert_tol: float = CERT_TOL) -> Thresholds:
    c, x_c = c_point(pi)
    if c <= FEAS_TOL:
        raise NonPositiveC(f"c = {c:.3g}: argmin Phi meets N(L)")
    routes = d_routes(pi, c, cert_tol)
    return Thresholds(c, _check_routes(routes, ROUTE_TOL), routes, x_c)


# -- g and f ---------------------------------------------------------------

def g_of_tau(pi: ProblemInstance, tau: float, *, c: Optional[float] = None, cert_tol: float = CERT_TOL,
             seed=None) -> float:
    """``|p_hat|_*`` for the solution of ``D1(tau)``, ``0 < tau < c``."""
    c = compute_c(pi) if c is None else c
    if not 0 < tau < c:
        raise ValueError(f"tau = {tau} outside (0, c) = (0, {c})")
    return pi.norm.dual(solve_dual_penalized(pi, tau, cert_tol=cert_tol, seed=seed).p)


def f_of_lambda(pi: ProblemInstance, lam: float, *, d: Optional[float] = None, cert_tol: float = CERT_TOL,
                seed=None) -> float:
    """``|L x_hat|`` for the solution of ``P2(lam)``, ``0 < lam < d``."""
    if not lam > 0 or (d is not None and lam >= d):
        raise ValueError(f"lambda = {lam} outside (0, d)")
    return pi.norm.primal(pi.L @ solve_penalized(pi, lam, cert_tol=cert_tol, seed=seed).x)


def invert_g(pi: ProblemInstance, lam_target: float, tol: float = 1e-8, *, c: Optional[float] = None,
             d: Optional[float] = None, cert_tol: float = CERT_TOL) -> float:
    """``tau`` with ``g(tau) = lam_target`` by bisection on ``(0, c)``.

    Raises
    ------
    NotBracketed
        When ``lam_target`` is outside ``(0, d)``.
    """
    c = compute_c(pi) if c is None else c
    d = compute_d(pi, c) if d is None else d
    if not 0 < lam_target < d:
        raise NotBracketed(f"target {lam_target} outside (0, d) = (0, {d})")
    lo, hi = 0.0, c
    tau = 0.5 * c
    for _ in range(200):
        tau = 0.5 * (lo + hi)
        g = g_of_tau(pi, tau, c=c, cert_tol=cert_tol)
        if abs(g - lam_target) <= tol or hi - lo <= 1e-15 * c:
            break
        if g > lam_target:
            lo = tau
        else:
            hi = tau
    return tau


# -- regimes and set equality ----------------------------------------------

def classify_regime(pi: ProblemInstance, *, tau: Optional[float] = None, lam: Optional[float] = None,
                    c: Optional[float] = None, d: Optional[float] = None, verify: bool = False,
                    atol: float = 1e-6) -> RegimeLabel:
    """Place ``tau`` (or ``lam``) relative to the thresholds.

    With ``verify`` the asserted containment is checked on a solve.
    """
    if (tau is None) == (lam is None):
        raise ValueError("give exactly one of tau, lam")
    phi_min = pi.phi(pi.phi.minimizer)
    if tau is not None:
        c = compute_c(pi) if c is None else c
        if tau == 0:
            label, cont = "at_zero", "SOL(P1) in N(L)"
        elif tau < c:
            label, cont = "interior", "SOL(P1) misses N(L) and argmin Phi"
        else:
            label, cont = "saturated", "SOL(P1) in argmin Phi"
        ok = None
        if verify:
            x = solve_constrained(pi, tau).x
            nLx = pi.norm.primal(pi.L @ x)
            in_argmin = pi.phi(x) <= phi_min + atol
            ok = {"at_zero": nLx <= atol, "saturated": in_argmin,
                  "interior": nLx > atol and not in_argmin}[label]
        return RegimeLabel("tau", float(tau), label, cont, ok)
    d = compute_d(pi) if d is None else d
    if lam == 0:
        label, cont = "saturated", "SOL(P2) in argmin Phi"
    elif lam < d:
        label, cont = "interior", "SOL(P2) misses N(L) and argmin Phi"
    else:
        label, cont = "at_zero", "SOL(P2) in N(L)"
    ok = None
    if verify:
        x = solve_penalized(pi, lam).x
        nLx = pi.norm.primal(pi.L @ x)
        in_argmin = pi.phi(x) <= phi_min + atol
        ok = {"at_zero": nLx <= atol, "saturated": in_argmin,
              "interior": nLx > atol and not in_argmin}[label]
    return RegimeLabel("lambda", float(lam), label, cont, ok)


def default_box(pi: ProblemInstance, c: Optional[float] = None, margin: float = 1.0):
    c = c_point(pi)[0] if c is None else c
    xm = pi.phi.minimizer
    R = max(float(np.abs(xm).max()), c) + margin
    return [(-R, R)] * pi.n


def verify_sol_equality(pi: ProblemInstance, tau: float, lam: float, grid_step: float = 1e-3, box=None,
                        value_tol: float = 1e-9) -> SolComparison:
    """Compare brute-force ``SOL(P1(tau))`` and ``SOL(P2(lam))``.

    Truthy when the Hausdorff distance is at most ``2 * grid_step``; the
    ``disjoint`` flag reports sets farther apart than ``grid_step``.
    """
    if pi.n > 2:
        raise ValueError("set comparison is limited to dimension <= 2")
    box = default_box(pi) if box is None else box
    s1 = brute_force_argmin(constrained_objective(pi, tau, feas_tol=1e-9), box, grid_step, value_tol)
    s2 = brute_force_argmin(penalized_objective(pi, lam), box, grid_step, value_tol)
    h = s1.hausdorff(s2)
    gap = min(s2.distance(x) for x in s1.points)
    return SolComparison(float(tau), float(lam), s1, s2, float(h), float(gap), float(grid_step))


# -- curves ----------------------------------------------------------------

def curve_sample(pi: ProblemInstance, tau: float, cert_tol: float = CERT_TOL) -> CurveSample:
    r = solve_dual_penalized(pi, tau, cert_tol=cert_tol, raise_on_fail=False)
    return CurveSample(float(tau), pi.norm.dual(r.p), float(r.partner_objective), float(r.objective),
                       float(r.max_residual), bool(r.converged))


def sample_curve(pi: ProblemInstance, taus, th: Optional[Thresholds] = None,
                 cert_tol: float = CERT_TOL) -> CorrespondenceCurve:
    """``g`` on the given ``taus`` (sorted, all in ``(0, c)``)."""
    th = thresholds(pi, cert_tol) if th is None else th
    taus = sorted(float(t) for t in taus)
    if any(not 0 < t < th.c for t in taus):
        raise ValueError("curve samples must lie in (0, c)")
    return CorrespondenceCurve(tuple(curve_sample(pi, t, cert_tol) for t in taus), th)


def endpoint_limits(curve: CorrespondenceCurve) -> dict:
    """Linear extrapolations of ``g`` to ``tau = 0`` and ``tau = c`` from the two outermost samples.

    These are metadata about the limits, not values of ``g``.
    """
    t, g = curve.taus, curve.lambdas
    if len(t) < 2:
        return {"tau_to_0": math.nan, "tau_to_c": math.nan}
    at0 = g[0] + (g[1] - g[0]) / (t[1] - t[0]) * (0.0 - t[0])
    atc = g[-1] + (g[-1] - g[-2]) / (t[-1] - t[-2]) * (curve.thresholds.c - t[-1])
    return {"tau_to_0": float(at0), "tau_to_c": float(atc)}
