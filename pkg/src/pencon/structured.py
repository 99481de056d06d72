"""Functions of the form ``Phi(x1 + x2 + x3) = phi(x1)`` if ``x3 = 0``, else ``+inf``,
for a pairwise orthogonal decomposition ``R^n = X1 (+) X2 (+) X3``."""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import optimize

from . import _pdhg_py as K
from .errors import ConjugateUnavailable, DimensionMismatch
from .functions import (
    EMPTY,
    INF,
    SUBSPACE_TOL,
    Caps,
    ConvexFn,
    SubgradientDescriptor,
    conjugate_fn,
)
from .subspaces import Subspace, is_orthogonal, orthogonal_complement

REQUIRED_CAPS = ("proper", "lsc", "convex", "strictly_convex_on_ri", "essentially_smooth")


class StructuredPhi(ConvexFn):
    """``phi`` on ``X1`` (in basis coordinates), flat along ``X2``, ``+inf`` off ``X1 (+) X2``.

    Parameters
    ----------
    X1, X2, X3 : Subspace
        Pairwise orthogonal, summing to the whole space. ``X3`` may be omitted
        and is then the orthogonal complement of ``X1 + X2``.
    phi : ConvexFn
        Function of ``dim X1`` coordinates.
    phi_minimizer : array_like, optional
        Minimizer of ``phi`` in coordinates. Taken from ``phi.argmin_point``
        or computed numerically when omitted.

    Attributes
    ----------
    missing_caps : tuple of str
        Demands on ``phi`` (strict convexity, essential smoothness, ...) that
        ``phi`` does not declare. Solvers still run on such instances; the
        parameter correspondence is then not guaranteed to be a bijection.
    """

    def __init__(self, X1: Subspace, X2: Subspace, phi: ConvexFn, X3: Subspace | None = None,
                 phi_minimizer=None, check: bool = True):
        n = X1.ambient_dim
        if X2.ambient_dim != n:
            raise DimensionMismatch("X1 and X2 live in different spaces")
        if phi.dim != X1.dim:
            raise DimensionMismatch(f"phi has dim {phi.dim} but X1 has dim {X1.dim}")
        if not is_orthogonal(X1, X2):
            raise ValueError("X1 and X2 must be orthogonal")
        if X3 is None:
            X3 = orthogonal_complement(Subspace.span(np.hstack([X1.basis, X2.basis]).T, n))
        if X3.ambient_dim != n:
            raise DimensionMismatch("X3 lives in a different space")
        if not (is_orthogonal(X1, X3) and is_orthogonal(X2, X3)):
            raise ValueError("X3 must be orthogonal to X1 and X2")
        if X1.dim + X2.dim + X3.dim != n:
            raise ValueError("X1 (+) X2 (+) X3 must be the whole space")
        self.X1, self.X2, self.X3, self.phi = X1, X2, X3, phi

        self.missing_caps = tuple(c for c in REQUIRED_CAPS if not getattr(phi.caps, c))
        if check and phi.caps.strictly_convex_on_ri and not phi.check_strict_convexity():
            warnings.warn(f"{phi.name}: strict convexity declared but the midpoint spot check failed")
            self.missing_caps += ("strictly_convex_on_ri(spot check)",)

        if phi_minimizer is None:
            phi_minimizer = getattr(phi, "argmin_point", None)
        if phi_minimizer is None:
            phi_minimizer = _numeric_minimizer(phi)
        self.phi_minimizer = np.asarray(phi_minimizer, dtype=float).reshape(phi.dim)
        self.minimizer = X1.embed(self.phi_minimizer)

        caps = Caps(
            proper=phi.caps.proper, lsc=phi.caps.lsc, convex=phi.caps.convex,
            strictly_convex_on_ri=phi.caps.strictly_convex_on_ri and X2.is_trivial,
            essentially_smooth=phi.caps.essentially_smooth and X3.is_trivial,
            coercive=phi.caps.coercive and X2.is_trivial,
            locally_bounded_below=phi.caps.locally_bounded_below,
            bounded_below=phi.caps.bounded_below,
        )
        super().__init__(n, self._eval, caps=caps, probe_point=self.minimizer, name=f"Phi[{phi.name}]")

    @property
    def setting_ok(self) -> bool:
        return not self.missing_caps

    def _eval(self, x):
        if np.linalg.norm(self.X3.basis.T @ x) > SUBSPACE_TOL * max(1.0, np.linalg.norm(x)):
            return INF
        return self.phi(self.X1.basis.T @ x)

    def values(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.dim)
        out = self.phi.values(X @ self.X1.basis) if self.X1.dim else np.zeros(len(X))
        out = np.asarray(out, dtype=float).copy()
        if self.X3.dim:
            off = np.linalg.norm(X @ self.X3.basis, axis=1) > SUBSPACE_TOL * np.maximum(1.0, np.linalg.norm(X, axis=1))
            out[off] = INF
        return out

    def subgradient(self, x) -> SubgradientDescriptor:
        return structured_subgradient(self, x)

    @property
    def has_conjugate(self) -> bool:
        return self.phi.has_conjugate

    def conjugate(self, q) -> float:
        q = self._point(q)
        if not self.phi.has_conjugate:
            raise ConjugateUnavailable(f"{self.phi.name} has no closed-form conjugate")
        return _structured_conjugate_value(self, q, self.phi.conjugate)

    def conjugate_argmax(self, q) -> np.ndarray:
        """An element of the conjugate's subdifferential at ``q`` (the ``X2`` part is set to 0)."""
        q = self._point(q)
        return self.X1.embed(self.phi.conjugate_argmax(self.X1.basis.T @ q))

    @property
    def has_prox(self) -> bool:
        return self.phi.has_prox

    def prox(self, v, step: float) -> np.ndarray:
        v = self._point(v)
        return self.X1.embed(self.phi.prox(self.X1.basis.T @ v, step)) + self.X2.basis @ (self.X2.basis.T @ v)

    def kernel_spec(self, step: float):
        spec = self.phi.kernel_spec(step)
        if spec is None:
            return None
        return (K.OP_PHI, spec[1], np.ascontiguousarray(self.X1.basis), np.ascontiguousarray(self.X2.basis),
                np.ascontiguousarray(spec[2]), np.ascontiguousarray(spec[3]))


def _structured_conjugate_value(sp: StructuredPhi, q, phi_conj) -> float:
    if np.linalg.norm(sp.X2.basis.T @ q) > SUBSPACE_TOL:
        return INF
    return float(phi_conj(sp.X1.basis.T @ q))


def _numeric_minimizer(phi: ConvexFn) -> np.ndarray:
    x0 = phi.probe_point if phi.probe_point is not None else np.zeros(phi.dim)

    def h(x):
        v = phi(x)
        return 1e300 if not math.isfinite(v) else v

    res = optimize.minimize(h, x0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    return res.x


def structured_subgradient(sp: StructuredPhi, x) -> SubgradientDescriptor:
    """``dphi(x1) (+) {0} (+) X3`` when ``x3 = 0``; empty otherwise."""
    x = sp._point(x)
    if np.linalg.norm(sp.X3.basis.T @ x) > SUBSPACE_TOL * max(1.0, np.linalg.norm(x)):
        return EMPTY
    d1 = sp.phi.subgradient(sp.X1.basis.T @ x)
    if d1.is_empty:
        return EMPTY
    parts = [(sp.X1, d1)]
    if sp.X2.dim:
        parts.append((sp.X2, SubgradientDescriptor("singleton", {"point": np.zeros(sp.X2.dim)})))
    if sp.X3.dim:
        parts.append((sp.X3, None))
    return SubgradientDescriptor("direct_sum_of", {"parts": parts})


def conjugate_of_structured(sp: StructuredPhi, fallback: bool = True) -> ConvexFn:
    """``Phi*(q) = phi*(q1)`` if ``q2 = 0``, ``+inf`` otherwise.

    Uses the closed-form conjugate of ``phi`` when available, else a numeric
    supremum over ``phi``'s declared box (when ``fallback``).
    """
    phi_star = conjugate_fn(sp.phi, fallback=fallback)
    return ConvexFn(sp.dim, lambda q: _structured_conjugate_value(sp, q, phi_star),
                    caps=Caps(proper=True), name=f"{sp.name}*")


def structured_from_coordinates(n: int, phi: ConvexFn, X1, X2=(), X3=None, **kw) -> StructuredPhi:
    """Convenience constructor from coordinate index lists."""
    S1 = Subspace.coordinate(X1, n)
    S2 = Subspace.coordinate(X2, n)
    S3 = None if X3 is None else Subspace.coordinate(X3, n)
    return StructuredPhi(S1, S2, phi, S3, **kw)
