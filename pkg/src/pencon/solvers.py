"""Constrained, penalized and dual problems for a structured ``Phi``.

For ``pi = (Phi, L, norm)`` the four problems are

* ``P1(tau)``:   min Phi(x)                 s.t. ``|Lx| <= tau``
* ``P2(lam)``:   min Phi(x) + lam |Lx|
* ``D1(tau)``:   min Phi*(-L^T p) + tau |p|_*
* ``D2(lam)``:   min Phi*(-L^T p)           s.t. ``|p|_* <= lam``

Each is solved with a fixed-step primal-dual (Chambolle-Pock) iteration and
returned with a certificate: ``x`` and ``p`` are jointly optimal iff
``-L^T p in dPhi(x)`` and ``p`` is a matching subgradient of the penalty or
the normal cone of the constraint at ``Lx``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from . import _pdhg_py as P
from . import kernels
from .errors import BoxTooLarge, DimensionMismatch, DualUnbounded, Infeasible, NotConverged
from .functions import FEAS_TOL, INF, ConvexFn, conjugate_fn, fenchel_young_gap
from .norms import L1, L2, NormPair, norm_pair
from .structured import StructuredPhi
from .subspaces import as_matrix, intersect, nullspace, orthogonal_complement, range_of_adjoint

CERT_TOL = 1e-7
MAX_ITER = 200_000
POWER_ITERS = 50
STEP_FACTOR = 0.99
GRID_LIMIT = 10_000_000


@dataclass(frozen=True)
class ProblemInstance:
    """``Phi`` structured on ``X1 (+) X2 (+) X3``, a linear map ``L`` and a norm pair.

    The linear standing hypotheses (``X2`` meets ``N(L)`` and ``X3`` meets
    ``R(L^T)`` only in 0) are checked at construction when ``validate``;
    ``argmin Phi`` missing ``N(L)`` is checked by ``correspondence.compute_c``.
    """

    phi: StructuredPhi
    L: np.ndarray
    norm: NormPair
    validate: bool = True

    def __post_init__(self):
        L = as_matrix(self.L)
        if L.shape[1] != self.phi.dim:
            raise DimensionMismatch(f"L has {L.shape[1]} columns but Phi lives in R^{self.phi.dim}")
        L = L.copy()
        L.setflags(write=False)
        object.__setattr__(self, "L", L)
        if isinstance(self.norm, str):
            object.__setattr__(self, "norm", norm_pair(self.norm))
        if self.validate:
            bad = [k for k, ok in self.linear_hypotheses().items() if not ok]
            if bad:
                raise ValueError(f"standing hypotheses violated: {', '.join(bad)}")

    @property
    def n(self) -> int:
        return self.L.shape[1]

    @property
    def m(self) -> int:
        return self.L.shape[0]

    def linear_hypotheses(self) -> dict:
        NL = nullspace(self.L)
        return {
            "X2 & N(L) = {0}": intersect(self.phi.X2, NL).is_trivial,
            "X3 & R(L^T) = {0}": intersect(self.phi.X3, range_of_adjoint(self.L)).is_trivial,
        }

    def penalized_value(self, x, lam: float) -> float:
        x = np.asarray(x, dtype=float).reshape(self.n)
        v = self.phi(x)
        return v + lam * self.norm.primal(self.L @ x) if math.isfinite(v) else INF

    def dual_value(self, p) -> float:
        """``Phi*(-L^T p)`` with the ``X2`` component of ``-L^T p`` ignored.

        Off the exact subspace the conjugate is ``+inf``; the ``X2`` leak of a
        numerical solution is reported by the certificate instead.
        """
        q = -self.L.T @ np.asarray(p, dtype=float).reshape(self.m)
        phi = self.phi
        if phi.phi.has_conjugate:
            return float(phi.phi.conjugate(phi.X1.basis.T @ q))
        return float(conjugate_fn(phi.phi)(phi.X1.basis.T @ q))


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve.

    ``minimizer`` is the solution of the problem named in ``problem`` (a primal
    point for ``P1``/``P2``, a dual point for ``D1``/``D2``); ``dual_witness``
    is the partner variable of the certificate. ``x`` and ``p`` give the
    primal and dual point regardless of the problem.
    """

    problem: str
    param: float
    minimizer: np.ndarray
    objective: float
    dual_witness: Optional[np.ndarray]
    residuals: dict
    iterations: int
    converged: bool
    partner_objective: float = math.nan
    backend: str = ""
    cert_tol: float = CERT_TOL

    @property
    def is_dual(self) -> bool:
        return self.problem.startswith("D")

    @property
    def x(self) -> np.ndarray:
        return self.dual_witness if self.is_dual else self.minimizer

    @property
    def p(self) -> Optional[np.ndarray]:
        return self.minimizer if self.is_dual else self.dual_witness

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


@dataclass(frozen=True)
class ArgminSet:
    """Near-minimizers found on a grid: a point, an interval or a cloud."""

    kind: str
    points: np.ndarray
    value: float
    tol: float
    grid_step: float = 0.0
    lo: float = math.nan
    hi: float = math.nan

    @property
    def representative(self) -> np.ndarray:
        if self.kind == "interval_1d":
            return np.array([0.5 * (self.lo + self.hi)])
        return self.points.mean(axis=0)

    def distance(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.kind == "interval_1d":
            return max(self.lo - x[0], x[0] - self.hi, 0.0)
        return float(np.min(np.linalg.norm(self.points - x, axis=1)))

    def contains(self, x, inflate: float = 0.0) -> bool:
        return self.distance(x) <= inflate

    def hausdorff(self, other: "ArgminSet") -> float:
        if self.kind == other.kind == "interval_1d":
            return max(abs(self.lo - other.lo), abs(self.hi - other.hi))
        a, b = self.points, other.points
        d_ab = max(other.distance(x) for x in a)
        d_ba = max(self.distance(x) for x in b)
        return max(d_ab, d_ba)


# -- certificates ----------------------------------------------------------

def _phi_residual(phi: StructuredPhi, x, q) -> float:
    """How far ``q`` is from ``dPhi(x)``.

    The distance from the subgradient oracle is discontinuous at kinks, so
    when a closed-form conjugate exists the Fenchel-Young gap (an
    epsilon-subgradient measure) is used if smaller. Both vanish exactly on
    the subdifferential.
    """
    if not phi.phi.has_subgradient:
        # oracle-only phi: Fenchel-Young gap with the numeric conjugate on X1,
        # plus the X2 leak (dPhi has no X2 component)
        x, q = np.asarray(x, dtype=float), np.asarray(q, dtype=float)
        if np.linalg.norm(phi.X3.basis.T @ x) > FEAS_TOL:
            return INF
        x1, q1 = phi.X1.basis.T @ x, phi.X1.basis.T @ q
        gap = fenchel_young_gap(phi.phi, x1, q1)
        return float(max(gap, 0.0) + np.linalg.norm(phi.X2.basis.T @ q))
    r = phi.subgradient(x).residual(q)
    if phi.phi.has_conjugate and r > 0:
        gap = fenchel_young_gap(phi, x, q)
        if math.isfinite(gap):
            r = min(r, max(gap, 0.0))
    return float(r)


def certificate_check(pi: ProblemInstance, x_hat, p_hat, mode: tuple) -> dict:
    """Residuals of the joint optimality conditions.

    Parameters
    ----------
    mode : ("constrained", tau) or ("penalized", lam)

    Returns
    -------
    dict with ``primal_feas``, ``dual_membership_Phi`` and
    ``dual_membership_Psi``; all at most ``cert_tol`` certifies both points.
    Each residual is divided by ``max(1, scale)`` of the quantities it
    compares, so large multipliers do not inflate it.
    """
    kind, t = mode
    x = np.asarray(x_hat, dtype=float).reshape(pi.n)
    p = np.asarray(p_hat, dtype=float).reshape(pi.m)
    y = pi.L @ x
    ny, npd = pi.norm.primal(y), pi.norm.dual(p)
    inner = float(p @ y)
    q = -pi.L.T @ p
    phi_r = _phi_residual(pi.phi, x, q) / max(1.0, float(np.linalg.norm(q)))
    if kind == "penalized":
        # p in lam * d|.|(y): |p|_* <= lam and <p, y> = lam |y|
        feas = 0.0
        psi_r = (max(npd - t, 0.0) + max(t * ny - inner, 0.0)) / max(1.0, t, t * ny)
    elif kind == "constrained":
        # p in the normal cone of the tau-ball at y
        feas = max(ny - t, 0.0) / max(1.0, t)
        psi_r = abs(t * npd - inner) / max(1.0, t * npd)
    else:
        raise ValueError(f"unknown mode {kind!r}")
    return {"primal_feas": float(feas), "dual_membership_Phi": phi_r, "dual_membership_Psi": float(psi_r)}


# -- PDHG plumbing ---------------------------------------------------------

def operator_norm(K, iters: int = POWER_ITERS) -> float:
    """Largest singular value by power iteration on ``K^T K``."""
    K = np.asarray(K, dtype=float)
    v = np.random.default_rng(0).standard_normal(K.shape[1])
    v /= np.linalg.norm(v)
    s = 0.0
    for _ in range(iters):
        w = K.T @ (K @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        s = math.sqrt(nw)
    return s


def _steps(K) -> float:
    nk = operator_norm(K)
    return STEP_FACTOR / nk if nk > 0 else 1.0


def _numeric_prox(phi: ConvexFn) -> Callable:
    def prox(v, step):
        h = lambda y: phi(y) + 0.5 * float(np.sum((y - v) ** 2)) / step
        x0 = v if math.isfinite(phi(v)) else np.asarray(phi.probe_point if phi.probe_point is not None else v)
        res = optimize.minimize(h, x0, method="Nelder-Mead",
                                options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000})
        return res.x
    return prox


def _phi_op(phi: StructuredPhi, step: float):
    spec = phi.kernel_spec(step)
    if spec is not None:
        return spec
    if phi.has_prox:
        return (lambda w, st: phi.prox(w, st), None, None, None, None, None)
    inner = _numeric_prox(phi.phi)
    B1, B2 = phi.X1.basis, phi.X2.basis

    def op(w, st):
        return B2 @ (B2.T @ w) + B1 @ inner(B1.T @ w, st)
    return (op, None, None, None, None, None)


def _ball(code: int, r: float):
    return (P.OP_BALL, np.array([code, r], dtype=float), None, None, None, None)


def _ball_resid(code: int, r: float):
    return (P.OP_BALL_RESID, np.array([code, r], dtype=float), None, None, None, None)


def _iterate(K, u, v, op_a, op_b, certify, max_iter, cert_tol, backend):
    step = _steps(K)
    tol = cert_tol * 1e-2
    total = 0
    while True:
        u, v, it, res = kernels.run_pdhg(K, u, v, step, step, op_a, op_b, max_iter - total, tol, backend=backend)
        total += it
        resid = certify(u, v)
        ok = all(r <= cert_tol for r in resid.values())
        if ok or total >= max_iter or not math.isfinite(res):
            return u, v, total, resid, ok
        tol = max(tol * 0.1, 1e-15)


def _backend_for(*ops) -> str:
    if any(callable(op[0]) for op in ops):
        return "python"
    return kernels.default_backend()


def _start(pi, rng_seed, x0, scale=1.0):
    if x0 is not None:
        return np.asarray(x0, dtype=float).reshape(pi.n)
    base = pi.phi.minimizer * scale
    if rng_seed is None:
        return base
    rng = np.random.default_rng(rng_seed)
    return base + rng.standard_normal(pi.n)


def _dual_guess(pi, x) -> np.ndarray:
    """Least-squares ``p`` with ``-L^T p`` in ``dPhi(x)``; zeros when ``dPhi(x)`` is empty.

    Starting the multiplier here spares the iteration a long drift when
    ``|p|`` is large (``Phi`` steep near its domain boundary).
    """
    try:
        q = pi.phi.subgradient(x).representative_in(pi.n)
    except (NotImplementedError, ValueError):
        q = None
    if q is None or not np.all(np.isfinite(q)):
        return np.zeros(pi.m)
    p, *_ = np.linalg.lstsq(-pi.L.T, q, rcond=None)
    return p


def _finish(report: SolveReport, raise_on_fail: bool) -> SolveReport:
    if not report.converged and raise_on_fail:
        raise NotConverged(f"{report.problem}({report.param:g}) stopped after {report.iterations} "
                           f"iterations, max residual {report.max_residual:.3g}", report)
    return report


# -- the four problems -----------------------------------------------------

def solve_penalized(pi: ProblemInstance, lam: float, *, cert_tol: float = CERT_TOL, max_iter: int = MAX_ITER,
                    x0=None, seed=None, backend=None, raise_on_fail: bool = True) -> SolveReport:
    """Minimize ``Phi(x) + lam |Lx|``."""
    lam = float(lam)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    mode = ("penalized", lam)
    if not pi.phi.has_prox and pi.phi.kernel_spec(1.0) is None:
        return _finish(_subgradient_descent(pi, lam, cert_tol, 3 * max_iter, x0, seed), raise_on_fail)
    step = _steps(pi.L)
    op_a, op_b = _phi_op(pi.phi, step), _ball(pi.norm.dual_code, lam)
    backend = backend or _backend_for(op_a, op_b)
    x_init = _start(pi, seed, x0)
    y = pi.L @ x_init
    v_init = lam * pi.norm.face_element(y) if pi.norm.primal(y) > 0 else np.zeros(pi.m)
    u, v, it, resid, ok = _iterate(pi.L, x_init, v_init, op_a, op_b,
                                   lambda u, v: certificate_check(pi, u, v, mode), max_iter, cert_tol, backend)
    rep = SolveReport("P2", lam, u, pi.penalized_value(u, lam), v, resid, it, ok,
                      partner_objective=pi.dual_value(v), backend=backend, cert_tol=cert_tol)
    return _finish(rep, raise_on_fail)


def _subgradient_descent(pi, lam, cert_tol, budget, x0, seed) -> SolveReport:
    """Diminishing-step subgradient method; fallback when ``Phi`` has no prox."""
    x = _start(pi, seed, x0)
    best, best_val = x.copy(), pi.penalized_value(x, lam)
    k = 0
    for k in range(1, budget + 1):
        d = pi.phi.subgradient(x).representative()
        if d is None:
            break
        y = pi.L @ x
        g = d + (lam * pi.L.T @ pi.norm.face_element(y) if pi.norm.primal(y) > 0 else 0.0)
        ng = np.linalg.norm(g)
        if ng == 0:
            best = x
            break
        x = x - (1.0 / math.sqrt(k)) * g / ng
        val = pi.penalized_value(x, lam)
        if val < best_val:
            best, best_val = x.copy(), val
    y = pi.L @ best
    p = lam * pi.norm.face_element(y) if pi.norm.primal(y) > FEAS_TOL else np.zeros(pi.m)
    resid = certificate_check(pi, best, p, ("penalized", lam))
    ok = all(r <= cert_tol for r in resid.values())
    return SolveReport("P2", lam, best, best_val, p, resid, k, ok, backend="subgradient", cert_tol=cert_tol)


def _check_feasible_at_zero(pi: ProblemInstance) -> None:
    """``tau = 0`` needs a point of ``dom Phi`` in ``N(L)``; decidable when that set is ``{0}``."""
    V = intersect(nullspace(pi.L), orthogonal_complement(pi.phi.X3))
    if V.is_trivial and not math.isfinite(pi.phi(np.zeros(pi.n))):
        raise Infeasible("dom Phi does not meet N(L): the only candidate 0 has Phi(0) = +inf")


def solve_constrained(pi: ProblemInstance, tau: float, *, cert_tol: float = CERT_TOL, max_iter: int = MAX_ITER,
                      x0=None, seed=None, backend=None, raise_on_fail: bool = True) -> SolveReport:
    """Minimize ``Phi`` over ``|Lx| <= tau``.

    ``tau = 0`` runs the same iteration with a zero-radius ball, which
    minimizes ``Phi`` over ``N(L)``.
    """
    tau = float(tau)
    if tau < 0:
        raise ValueError("tau must be >= 0")
    mode = ("constrained", tau)
    if tau == 0:
        _check_feasible_at_zero(pi)
    step = _steps(pi.L)
    op_a, op_b = _phi_op(pi.phi, step), _ball_resid(pi.norm.code, tau)
    backend = backend or _backend_for(op_a, op_b)
    xm = pi.phi.minimizer
    nLx = pi.norm.primal(pi.L @ xm)
    scale = 1.0 if nLx <= tau else tau / nLx
    x_init = _start(pi, seed, x0, scale)
    u, v, it, resid, ok = _iterate(pi.L, x_init, _dual_guess(pi, x_init), op_a, op_b,
                                   lambda u, v: certificate_check(pi, u, v, mode), max_iter, cert_tol, backend)
    if not ok and resid["primal_feas"] > FEAS_TOL:
        raise Infeasible(f"no feasible point found for tau={tau:g} (|Lx| - tau = {resid['primal_feas']:.3g})")
    rep = SolveReport("P1", tau, u, pi.phi(u), v, resid, it, ok,
                      partner_objective=pi.dual_value(v) + tau * pi.norm.dual(v), backend=backend,
                      cert_tol=cert_tol)
    return _finish(rep, raise_on_fail)


def recover_primal(pi: ProblemInstance, p, x_aux=None) -> np.ndarray:
    """A point of ``dPhi*(-L^T p)``: gradient of ``phi*`` on ``X1``, plus the ``X2`` part of ``x_aux``."""
    q = -pi.L.T @ np.asarray(p, dtype=float).reshape(pi.m)
    phi = pi.phi
    x = phi.X1.embed(phi.phi.conjugate_argmax(phi.X1.basis.T @ q))
    if x_aux is not None and phi.X2.dim:
        x = x + phi.X2.basis @ (phi.X2.basis.T @ np.asarray(x_aux, dtype=float))
    return x


def _snap_into_domain(p, objective, max_shrink: float = 1e-9):
    """Pull ``p`` off a domain edge it overshot by round-off.

    The iteration may end a few ulps outside ``dom Phi*`` (where the dual
    objective is ``+inf``); shrink toward 0 by at most ``max_shrink``.
    """
    if math.isfinite(objective(p)):
        return p
    for delta in np.geomspace(1e-15, max_shrink, 13):
        q = p * (1.0 - delta)
        if math.isfinite(objective(q)):
            return q
    return p


def _dual_solve(pi, name, param, op_a, mode, objective, cert_tol, max_iter, seed, backend, raise_on_fail,
                x_start):
    K = -pi.L.T
    step = _steps(K)
    op_b = _phi_op(pi.phi, step)
    backend = backend or _backend_for(op_a, op_b)
    if mode[0] == "penalized":
        y = pi.L @ x_start
        p0 = mode[1] * pi.norm.face_element(y) if pi.norm.primal(y) > 0 else np.zeros(pi.m)
    else:
        p0 = _dual_guess(pi, x_start)
    if seed is not None:
        p0 = p0 + np.random.default_rng(seed).standard_normal(pi.m)

    def best_primal(u, v):
        # dPhi* may be multivalued (phi not essentially smooth): try the
        # closed-form element and the iteration's own primal variable
        cands = [v]
        try:
            cands.insert(0, recover_primal(pi, u, v))
        except ValueError:
            pass
        scored = [(certificate_check(pi, x, u, mode), x) for x in cands]
        return min(scored, key=lambda t: max(t[0].values()))

    u, v, it, resid, ok = _iterate(K, p0, x_start, op_a, op_b, lambda u, v: best_primal(u, v)[0],
                                   max_iter, cert_tol, backend)
    u = _snap_into_domain(u, objective)
    resid, x = best_primal(u, v)
    rep = SolveReport(name, param, u, objective(u), x, resid, it, ok,
                      partner_objective=pi.phi(x), backend=backend, cert_tol=cert_tol)
    return _finish(rep, raise_on_fail)


def solve_dual_penalized(pi: ProblemInstance, tau: float, *, cert_tol: float = CERT_TOL, max_iter: int = MAX_ITER,
                         seed=None, backend=None, raise_on_fail: bool = True) -> SolveReport:
    """Minimize ``Phi*(-L^T p) + tau |p|_*``; the primal is recovered from ``dPhi*``.

    Raises
    ------
    DualUnbounded
        At ``tau = 0`` when the constrained primal is infeasible; then the
        dual objective is unbounded below and has no minimizer.
    """
    tau = float(tau)
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0:
        try:
            _check_feasible_at_zero(pi)
        except Infeasible as e:
            raise DualUnbounded(f"tau = 0: {e}; Phi*(-L^T p) is unbounded below") from None
    op_a = _ball_resid(pi.norm.code, tau)
    xm = pi.phi.minimizer
    nLx = pi.norm.primal(pi.L @ xm)
    x_start = xm * (1.0 if nLx <= tau else tau / nLx)
    return _dual_solve(pi, "D1", tau, op_a, ("constrained", tau),
                       lambda p: pi.dual_value(p) + tau * pi.norm.dual(p),
                       cert_tol, max_iter, seed, backend, raise_on_fail, x_start)


def solve_dual_constrained(pi: ProblemInstance, lam: float, *, cert_tol: float = CERT_TOL, max_iter: int = MAX_ITER,
                           seed=None, backend=None, raise_on_fail: bool = True) -> SolveReport:
    """Minimize ``Phi*(-L^T p)`` over ``|p|_* <= lam``."""
    lam = float(lam)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    op_a = _ball(pi.norm.dual_code, lam)
    return _dual_solve(pi, "D2", lam, op_a, ("penalized", lam), pi.dual_value,
                       cert_tol, max_iter, seed, backend, raise_on_fail, pi.phi.minimizer.copy())


# -- brute force oracle ----------------------------------------------------

def penalized_objective(pi: ProblemInstance, lam: float) -> ConvexFn:
    """``x -> Phi(x) + lam |Lx|`` with vectorized evaluation."""
    f = ConvexFn(pi.n, lambda x: pi.penalized_value(x, lam), name=f"P2({lam:g})")
    f.values = lambda X: _pen_values(pi, X, lam)
    return f


def constrained_objective(pi: ProblemInstance, tau: float, feas_tol: float = 1e-12) -> ConvexFn:
    """``Phi`` plus the indicator of ``|Lx| <= tau``."""
    def vals(X):
        X = np.asarray(X, dtype=float).reshape(-1, pi.n)
        out = pi.phi.values(X).astype(float)
        out[_norms(pi.norm.code, X @ pi.L.T) > tau + feas_tol] = INF
        return out
    f = ConvexFn(pi.n, lambda x: float(vals(x)[0]), name=f"P1({tau:g})")
    f.values = vals
    return f


def _norms(code, Y):
    if code == L1:
        return np.abs(Y).sum(axis=1)
    if code == L2:
        return np.linalg.norm(Y, axis=1)
    return np.abs(Y).max(axis=1)


def _pen_values(pi, X, lam):
    X = np.asarray(X, dtype=float).reshape(-1, pi.n)
    out = pi.phi.values(X).astype(float)
    fin = np.isfinite(out)
    out[fin] += lam * _norms(pi.norm.code, X[fin] @ pi.L.T)
    return out


def brute_force_argmin(f: ConvexFn, box, grid_step: float, value_tol: float) -> ArgminSet:
    """Grid search for the near-minimizers of ``f`` on a box.

    Parameters
    ----------
    box : sequence of (lo, hi)
        One pair per axis; at most three axes.
    grid_step : float
        Spacing of the grid (both endpoints included).
    value_tol : float
        Points within this of the grid minimum are kept.

    Raises
    ------
    BoxTooLarge
        When the grid exceeds ``1e7`` points.
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    if box.shape[0] != f.dim:
        raise ValueError(f"box has {box.shape[0]} axes, f has dim {f.dim}")
    if f.dim > 3:
        raise ValueError("brute force is limited to dim <= 3")
    if not np.all(np.isfinite(box)):
        raise ValueError("box must be finite")
    counts = [int(math.floor((hi - lo) / grid_step + 1e-9)) + 1 for lo, hi in box]
    total = math.prod(counts)
    if total > GRID_LIMIT:
        raise BoxTooLarge(f"{total} grid points exceeds {GRID_LIMIT}")
    axes = [lo + grid_step * np.arange(c) for (lo, _), c in zip(box, counts)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.dim)
    vals = np.asarray(f.values(mesh), dtype=float)
    vmin = float(np.min(vals))
    if not math.isfinite(vmin):
        raise ValueError("f is +inf on the whole grid")
    keep = vals <= vmin + value_tol
    pts = mesh[keep]
    if len(pts) == 1:
        return ArgminSet("singleton", pts, vmin, value_tol, grid_step)
    if f.dim == 1:
        idx = np.flatnonzero(keep)
        if np.all(np.diff(idx) == 1):
            return ArgminSet("interval_1d", pts, vmin, value_tol, grid_step, lo=float(pts[0, 0]), hi=float(pts[-1, 0]))
    return ArgminSet("sample_cloud", pts, vmin, value_tol, grid_step)
