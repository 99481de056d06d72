"""Proper convex functions given by oracles, subgradient descriptors,
semidirect sums, indicators and numerically evaluated conjugates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .errors import ConjugateUnavailable, DimensionMismatch, NotDirect
from .norms import NormPair
from .subspaces import Subspace, as_matrix, split, sum_subspaces

INF = math.inf
MEMBERSHIP_TOL = 1e-8
FEAS_TOL = 1e-8
SUBSPACE_TOL = 1e-9


def times(a: float, b: float) -> float:
    """Product on the extended reals with ``0 * (+inf) := 0``."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


@dataclass(frozen=True)
class Caps:
    """Declared analytic properties of a function."""

    proper: bool = True
    lsc: bool = True
    convex: bool = True
    strictly_convex_on_ri: bool = False
    essentially_smooth: bool = False
    coercive: bool = False
    locally_bounded_below: bool = False
    bounded_below: bool = False


@dataclass(frozen=True)
class SubgradientDescriptor:
    """A subdifferential exposed as a membership test plus a representative.

    kinds and their ``data``:

    ``singleton``        ``point``
    ``interval_1d``      ``lo``, ``hi`` (may be infinite)
    ``dual_ball_scaled`` ``norm`` (NormPair), ``radius``
    ``dual_face``        ``norm``, ``x``: the set ``{p : <p,x> = |x|, |p|_* = 1}``
    ``direct_sum_of``    ``parts``: list of ``(Subspace, descriptor or None)``;
                         ``None`` marks a free component (the whole subspace)
    ``empty``            no data
    """

    kind: str
    data: dict = field(default_factory=dict)

    def residual(self, p) -> float:
        p = np.asarray(p, dtype=float).reshape(-1)
        k, d = self.kind, self.data
        if k == "empty":
            return INF
        if k == "singleton":
            return float(np.linalg.norm(p - d["point"]))
        if k == "interval_1d":
            v = float(p[0])
            return max(d["lo"] - v, v - d["hi"], 0.0)
        if k == "dual_ball_scaled":
            return max(d["norm"].dual(p) - d["radius"], 0.0)
        if k == "dual_face":
            x = d["x"]
            nx = d["norm"].primal(x)
            return max(d["norm"].dual(p) - 1.0, 0.0) + abs(nx - float(p @ x)) / nx
        if k == "direct_sum_of":
            rest = p.copy()
            total = 0.0
            for S, sub in d["parts"]:
                c = S.basis.T @ p
                rest -= S.basis @ c
                if sub is not None:
                    total += sub.residual(c)
            return total + float(np.linalg.norm(rest))
        raise ValueError(f"unknown descriptor kind {k!r}")

    def contains(self, p, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.residual(p) <= tol

    def representative(self) -> Optional[np.ndarray]:
        """Minimum-norm element for the bounded kinds, ``None`` when empty."""
        k, d = self.kind, self.data
        if k == "empty":
            return None
        if k == "singleton":
            return np.array(d["point"], dtype=float)
        if k == "interval_1d":
            return np.array([min(max(0.0, d["lo"]), d["hi"])])
        if k == "dual_ball_scaled":
            raise ValueError("dual_ball_scaled needs a dimension; use representative_in")
        if k == "dual_face":
            return d["norm"].face_element(d["x"])
        if k == "direct_sum_of":
            out = None
            for S, sub in d["parts"]:
                if out is None:
                    out = np.zeros(S.ambient_dim)
                if sub is None:
                    continue
                r = sub.representative_in(S.dim)
                if r is None:
                    return None
                out = out + S.basis @ r
            return out
        raise ValueError(f"unknown descriptor kind {k!r}")

    def representative_in(self, dim: int) -> Optional[np.ndarray]:
        if self.kind == "dual_ball_scaled":
            return np.zeros(dim)
        return self.representative()

    @property
    def is_empty(self) -> bool:
        if self.kind == "empty":
            return True
        if self.kind == "direct_sum_of":
            return any(sub is not None and sub.is_empty for _, sub in self.data["parts"])
        return False


EMPTY = SubgradientDescriptor("empty")


class ConvexFn:
    """Proper convex function ``R^dim -> R u {+inf}`` given by oracles.

    Parameters
    ----------
    dim : int
    func : callable
        Point evaluation; must return a real or ``+inf``.
    subgradient : callable, optional
        ``x -> SubgradientDescriptor``.
    conjugate : callable, optional
        Closed-form Fenchel conjugate.
    conjugate_argmax : callable, optional
        ``q -> x`` with ``x`` in the subdifferential of the conjugate at ``q``.
    prox : callable, optional
        ``(v, step) -> argmin f(x) + |x - v|^2 / (2 step)``.
    caps : Caps
    probe_point : array_like, optional
        A point of the domain, checked at construction when ``caps.proper``.
    probe_box : sequence of (lo, hi), optional
        Region used for random spot checks.
    conjugate_box : sequence of (lo, hi), optional
        Search box of the numeric conjugate fallback.
    """

    def __init__(
        self,
        dim: int,
        func: Callable,
        *,
        subgradient: Callable | None = None,
        conjugate: Callable | None = None,
        conjugate_argmax: Callable | None = None,
        prox: Callable | None = None,
        caps: Caps = Caps(),
        probe_point=None,
        probe_box=None,
        conjugate_box=None,
        name: str = "custom",
    ):
        self.dim = int(dim)
        self._func = func
        self._subgradient = subgradient
        self._conjugate = conjugate
        self._conjugate_argmax = conjugate_argmax
        self._prox = prox
        self.caps = caps
        self.name = name
        self.probe_box = None if probe_box is None else np.asarray(probe_box, dtype=float).reshape(self.dim, 2)
        self.conjugate_box = (
            None if conjugate_box is None else np.asarray(conjugate_box, dtype=float).reshape(self.dim, 2)
        )
        self.probe_point = None if probe_point is None else np.asarray(probe_point, dtype=float).reshape(self.dim)
        if caps.proper and self.probe_point is not None and not math.isfinite(self(self.probe_point)):
            raise ValueError(f"{name}: declared proper but probe point has value +inf")

    # -- evaluation ---------------------------------------------------------
    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"{self.name}: point of length {x.shape[0]}, expected {self.dim}")
        return x

    def __call__(self, x) -> float:
        v = float(self._func(self._point(x)))
        if v == -INF or math.isnan(v):
            raise ValueError(f"{self.name} returned {v}; values must lie in R u {{+inf}}")
        return v

    def values(self, X) -> np.ndarray:
        """Evaluate at each row of ``X`` (shape ``(N, dim)``)."""
        X = np.asarray(X, dtype=float).reshape(-1, self.dim)
        return np.array([self(x) for x in X])

    # -- subgradients -------------------------------------------------------
    @property
    def has_subgradient(self) -> bool:
        return self._subgradient is not None or type(self).subgradient is not ConvexFn.subgradient

    def subgradient(self, x) -> SubgradientDescriptor:
        if self._subgradient is None:
            raise NotImplementedError(f"{self.name} has no subgradient oracle")
        return self._subgradient(self._point(x))

    def subgrad_membership(self, x, p, tol: float = MEMBERSHIP_TOL):
        """``(p in df(x), residual)``.

        Uses the subgradient oracle when present, else the Fenchel-Young gap.
        """
        x = self._point(x)
        p = self._point(p)
        if self.has_subgradient:
            r = self.subgradient(x).residual(p)
        else:
            r = fenchel_young_gap(self, x, p)
        return r <= tol, r

    # -- conjugate ----------------------------------------------------------
    @property
    def has_conjugate(self) -> bool:
        return self._conjugate is not None or type(self).conjugate is not ConvexFn.conjugate

    def conjugate(self, p) -> float:
        if self._conjugate is None:
            raise ConjugateUnavailable(f"{self.name} has no closed-form conjugate")
        return float(self._conjugate(self._point(p)))

    def conjugate_argmax(self, q) -> np.ndarray:
        """A maximizer of ``<q,x> - f(x)``, i.e. an element of the conjugate's subdifferential."""
        if self._conjugate_argmax is not None:
            return np.asarray(self._conjugate_argmax(self._point(q)), dtype=float).reshape(self.dim)
        return numeric_conjugate_argmax(self, q)

    # -- prox ---------------------------------------------------------------
    @property
    def has_prox(self) -> bool:
        return self._prox is not None or type(self).prox is not ConvexFn.prox

    def prox(self, v, step: float) -> np.ndarray:
        if self._prox is None:
            raise NotImplementedError(f"{self.name} has no prox oracle")
        return np.asarray(self._prox(self._point(v), float(step)), dtype=float).reshape(self.dim)

    def kernel_spec(self, step: float):
        """Description of ``prox(., step)`` understood by the compiled kernels, or None."""
        return None

    # -- spot checks --------------------------------------------------------
    def sample_points(self, rng: np.random.Generator, n: int) -> np.ndarray:
        box = self.probe_box
        if box is None:
            box = np.tile([-10.0, 10.0], (self.dim, 1))
        return rng.uniform(box[:, 0], box[:, 1], size=(n, self.dim))

    def check_strict_convexity(self, rng=None, trials: int = 200, scale: float = 1.0) -> bool:
        """Random midpoint test ``f((x+y)/2) < (f(x)+f(y))/2 - 1e-12 * scale``."""
        rng = np.random.default_rng(0) if rng is None else rng
        eps = 1e-12 * scale
        X = self.sample_points(rng, trials)
        Y = self.sample_points(rng, trials)
        for x, y in zip(X, Y):
            fx, fy = self(x), self(y)
            if not (math.isfinite(fx) and math.isfinite(fy)) or np.allclose(x, y):
                continue
            if not self((x + y) / 2) < 0.5 * (fx + fy) - eps:
                return False
        return True

    def with_caps(self, **changes) -> "ConvexFn":
        out = object.__new__(type(self))
        out.__dict__.update(self.__dict__)
        out.caps = replace(self.caps, **changes)
        return out

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} dim={self.dim}>"


def fenchel_young_gap(f: ConvexFn, x, p) -> float:
    """``f(x) + f*(p) - <p,x>``; nonnegative, zero iff ``p`` in ``df(x)``."""
    fx = f(x)
    if not math.isfinite(fx):
        return INF
    fc = f.conjugate(p) if f.has_conjugate else numeric_conjugate(f, p)
    if not math.isfinite(fc):
        return INF
    return fx + fc - float(np.dot(p, x))


# -- numeric conjugate ------------------------------------------------------

def _search_box(f: ConvexFn) -> np.ndarray:
    if f.conjugate_box is not None:
        return f.conjugate_box
    if f.probe_box is not None:
        return f.probe_box
    raise ConjugateUnavailable(f"{f.name}: numeric conjugate needs a declared box")


def _neg_objective(f: ConvexFn, q: np.ndarray):
    def h(x):
        v = f(x)
        return 1e300 if not math.isfinite(v) else v - float(q @ x)

    return h


def numeric_conjugate_argmax(f: ConvexFn, q) -> np.ndarray:
    """Maximizer of ``<q,x> - f(x)`` over the declared box."""
    q = np.asarray(q, dtype=float).reshape(f.dim)
    box = _search_box(f)
    h = _neg_objective(f, q)
    if f.dim == 1:
        lo, hi = box[0]
        grid = np.linspace(lo, hi, 4001)
        if lo > 0:
            grid = np.union1d(grid, np.geomspace(lo, hi, 2001))
        vals = np.array([h(np.array([t])) for t in grid])
        i = int(np.argmin(vals))
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        if b > a:
            res = optimize.minimize_scalar(
                lambda t: h(np.array([t])), bounds=(a, b), method="bounded",
                options={"xatol": 1e-13 * max(1.0, abs(grid[i])), "maxiter": 500},
            )
            if res.fun <= vals[i]:
                return np.array([res.x])
        return np.array([grid[i]])
    per_axis = max(3, int(round(20000 ** (1.0 / f.dim))))
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in box]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.dim)
    vals = np.array([h(x) for x in pts])
    x0 = pts[int(np.argmin(vals))]
    res = optimize.minimize(h, x0, method="L-BFGS-B", bounds=[tuple(b) for b in box],
                            options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 2000})
    return res.x if res.fun <= vals.min() else x0


def numeric_conjugate(f: ConvexFn, q) -> float:
    """``sup_x <q,x> - f(x)`` restricted to the declared box."""
    q = np.asarray(q, dtype=float).reshape(f.dim)
    x = numeric_conjugate_argmax(f, q)
    v = f(x)
    return float(q @ x) - v if math.isfinite(v) else INF


def conjugate_fn(f: ConvexFn, fallback: bool = True) -> ConvexFn:
    """The conjugate as a ConvexFn, closed form when available."""
    if f.has_conjugate:
        return ConvexFn(f.dim, f.conjugate, name=f"{f.name}*", caps=Caps(proper=True))
    if not fallback:
        raise ConjugateUnavailable(f"{f.name} has no closed-form conjugate and the fallback is disabled")
    _search_box(f)
    return ConvexFn(f.dim, lambda q: numeric_conjugate(f, q), name=f"{f.name}*(numeric)", caps=Caps(proper=True))


# -- elementary functions ---------------------------------------------------

def zero_fn(dim: int) -> ConvexFn:
    """The zero function on R^dim."""
    return ConvexFn(
        dim,
        lambda x: 0.0,
        subgradient=lambda x: SubgradientDescriptor("singleton", {"point": np.zeros(dim)}),
        conjugate=lambda p: 0.0 if np.linalg.norm(p) <= SUBSPACE_TOL else INF,
        conjugate_argmax=lambda q: np.zeros(dim),
        prox=lambda v, step: v.copy(),
        caps=Caps(bounded_below=True, locally_bounded_below=True),
        probe_point=np.zeros(dim),
        name="zero",
    )


def squared_norm(dim: int, scale: float = 1.0) -> ConvexFn:
    """``scale * |x|_2^2``."""
    return ConvexFn(
        dim,
        lambda x: scale * float(x @ x),
        subgradient=lambda x: SubgradientDescriptor("singleton", {"point": 2.0 * scale * x}),
        conjugate=lambda p: float(p @ p) / (4.0 * scale),
        conjugate_argmax=lambda q: q / (2.0 * scale),
        prox=lambda v, step: v / (1.0 + 2.0 * scale * step),
        caps=Caps(strictly_convex_on_ri=True, essentially_smooth=True, coercive=True,
                  locally_bounded_below=True, bounded_below=True),
        probe_point=np.zeros(dim),
        name="squared_norm",
    )


def indicator_levelset(np_: NormPair, A, tau: float, feas_tol: float = FEAS_TOL) -> ConvexFn:
    """Indicator of ``{x : |Ax| <= tau}`` (value 0 within ``feas_tol``)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    A = as_matrix(A)
    n = A.shape[1]
    identity = A.shape[0] == n and np.array_equal(A, np.eye(n))

    def f(x):
        return 0.0 if np_.primal(A @ x) <= tau + feas_tol else INF

    kw = {}
    if identity:
        kw.update(
            prox=lambda v, step: np_.project_primal_ball(v, tau),
            conjugate=lambda p: tau * np_.dual(p),
        )
    return ConvexFn(n, f, caps=Caps(bounded_below=True, locally_bounded_below=True),
                    probe_point=np.zeros(n), name=f"indicator(|Ax|<={tau:g})", **kw)


class SemidirectSum(ConvexFn):
    """``(F1 [+] F2)(x1 + x2) = F1(x1) + F2(x2)`` on ``S1 (+) S2``, ``+inf`` off it.

    ``F1`` and ``F2`` act on coordinates in the orthonormal bases of ``S1``
    and ``S2``. Conjugate, prox and subgradients are provided when the
    decomposition is orthogonal.
    """

    def __init__(self, F1: ConvexFn, S1: Subspace, F2: ConvexFn, S2: Subspace, caps: Caps | None = None):
        if F1.dim != S1.dim or F2.dim != S2.dim:
            raise DimensionMismatch("summand dimension differs from its subspace")
        res = sum_subspaces(S1, S2)
        if not res.is_direct:
            raise NotDirect("semidirect sum needs S1 (+) S2 direct")
        self.F1, self.S1, self.F2, self.S2 = F1, S1, F2, S2
        self.orthogonal = res.is_orthogonal
        self.span = res.subspace
        n = S1.ambient_dim
        self._free = None
        if self.orthogonal:
            from .subspaces import orthogonal_complement

            self._free = orthogonal_complement(self.span)
        super().__init__(n, self._eval, caps=caps or Caps(), name=f"({F1.name} [+] {F2.name})")

    def _eval(self, x):
        parts = split(self.S1, self.S2, x)
        if parts is None:
            return INF
        a = self.F1(parts[0])
        if a == INF:
            return INF
        b = self.F2(parts[1])
        return a + b

    def subgradient(self, x) -> SubgradientDescriptor:
        if not self.orthogonal:
            raise NotImplementedError("subgradient rule needs an orthogonal decomposition")
        x = self._point(x)
        parts = split(self.S1, self.S2, x)
        if parts is None:
            return EMPTY
        d1 = self.F1.subgradient(parts[0])
        d2 = self.F2.subgradient(parts[1])
        if d1.is_empty or d2.is_empty:
            return EMPTY
        items = [(self.S1, d1), (self.S2, d2)]
        if not self._free.is_trivial:
            items.append((self._free, None))
        return SubgradientDescriptor("direct_sum_of", {"parts": items})

    @property
    def has_subgradient(self) -> bool:
        return self.orthogonal and self.F1.has_subgradient and self.F2.has_subgradient

    @property
    def has_conjugate(self) -> bool:
        return self.orthogonal and self.F1.has_conjugate and self.F2.has_conjugate

    def conjugate(self, p) -> float:
        if not self.has_conjugate:
            raise ConjugateUnavailable("conjugate rule needs an orthogonal decomposition with known conjugates")
        p = self._point(p)
        a = self.F1.conjugate(self.S1.basis.T @ p)
        if a == INF:
            return INF
        return a + self.F2.conjugate(self.S2.basis.T @ p)

    def conjugate_argmax(self, q) -> np.ndarray:
        q = self._point(q)
        return (self.S1.basis @ self.F1.conjugate_argmax(self.S1.basis.T @ q)
                + self.S2.basis @ self.F2.conjugate_argmax(self.S2.basis.T @ q))

    @property
    def has_prox(self) -> bool:
        return self.orthogonal and self.F1.has_prox and self.F2.has_prox

    def prox(self, v, step: float) -> np.ndarray:
        v = self._point(v)
        return (self.S1.basis @ self.F1.prox(self.S1.basis.T @ v, step)
                + self.S2.basis @ self.F2.prox(self.S2.basis.T @ v, step))


def semidirect_sum(F1: ConvexFn, S1: Subspace, F2: ConvexFn, S2: Subspace, caps: Caps | None = None) -> SemidirectSum:
    return SemidirectSum(F1, S1, F2, S2, caps)


def restrict(f: ConvexFn, S: Subspace) -> ConvexFn:
    """``f`` restricted to ``S``, acting on coordinates in the basis of ``S``."""
    if f.dim != S.ambient_dim:
        raise DimensionMismatch("function and subspace live in different spaces")
    return ConvexFn(S.dim, lambda y: f(S.embed(y)), caps=f.caps, name=f"{f.name}|S")
