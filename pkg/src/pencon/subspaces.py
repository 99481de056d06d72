"""Finite-dimensional subspace arithmetic.

Subspaces of R^n are stored as matrices with orthonormal columns. Every
predicate (dimension, projector, principal angles) is basis independent, so
bases are only canonical up to rotation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotDirect

RANK_TOL = 1e-9
ORTH_TOL = 1e-10


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a finite 2-D float array."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("linear map has non-finite entries")
    return A


def _orth(M: np.ndarray, n: int, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column span of ``M`` (shape ``(n, k)``)."""
    if M.size == 0:
        return np.zeros((n, 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, 0))
    r = int(np.sum(s > rank_tol * s[0]))
    return U[:, :r].copy()


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^ambient_dim held as an orthonormal basis.

    ``basis`` has shape ``(ambient_dim, dim)``; the trivial subspace has zero
    columns.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        if B.shape[1] > self.ambient_dim:
            raise DimensionMismatch("more basis vectors than ambient dimension")
        if B.shape[1] and not np.allclose(B.T @ B, np.eye(B.shape[1]), atol=ORTH_TOL):
            raise ValueError("basis is not orthonormal; use Subspace.span")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    # -- constructors -----------------------------------------------------
    @classmethod
    def span(cls, vectors, ambient_dim: int | None = None) -> "Subspace":
        """Span of the given vectors (rows of ``vectors``)."""
        V = np.asarray(vectors, dtype=float)
        if V.size == 0:
            if ambient_dim is None:
                raise ValueError("ambient_dim needed for an empty span")
            return cls.trivial(ambient_dim)
        V = np.atleast_2d(V)
        n = V.shape[1] if ambient_dim is None else ambient_dim
        if V.shape[1] != n:
            raise DimensionMismatch(f"vectors of length {V.shape[1]} in R^{n}")
        return cls(n, _orth(V.T, n))

    @classmethod
    def trivial(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim))

    @classmethod
    def coordinate(cls, indices, ambient_dim: int) -> "Subspace":
        """Span of the unit vectors ``e_i`` for ``i`` in ``indices``."""
        idx = sorted(set(int(i) for i in indices))
        if any(i < 0 or i >= ambient_dim for i in idx):
            raise DimensionMismatch(f"coordinate index out of range for R^{ambient_dim}")
        return cls(ambient_dim, np.eye(ambient_dim)[:, idx])

    # -- basic queries ----------------------------------------------------
    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_trivial(self) -> bool:
        return self.dim == 0

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def coords(self, x) -> np.ndarray:
        """Coordinates of the orthogonal projection of ``x`` in this basis."""
        return self.basis.T @ self._check(x)

    def embed(self, y) -> np.ndarray:
        return self.basis @ np.asarray(y, dtype=float).reshape(self.dim)

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = self._check(x)
        return bool(np.linalg.norm(x - self.projector @ x) <= tol * max(1.0, np.linalg.norm(x)))

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.ambient_dim:
            raise DimensionMismatch(f"vector of length {x.shape[0]} in R^{self.ambient_dim}")
        return x

    def same_as(self, other: "Subspace", tol: float = 1e-9) -> bool:
        _same_ambient(self, other)
        return self.dim == other.dim and np.allclose(self.projector, other.projector, atol=tol)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _same_ambient(S: Subspace, T: Subspace) -> None:
    if S.ambient_dim != T.ambient_dim:
        raise DimensionMismatch(f"R^{S.ambient_dim} vs R^{T.ambient_dim}")


def nullspace(A, rank_tol: float = RANK_TOL) -> Subspace:
    """N(A): all v with ``|Av| <= rank_tol * |A| * |v|``."""
    A = as_matrix(A)
    n = A.shape[1]
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return Subspace.full(n)
    r = int(np.sum(s > rank_tol * s[0]))
    return Subspace(n, Vt[r:].T.copy())


def range_of_adjoint(A, rank_tol: float = RANK_TOL) -> Subspace:
    """R(A^T), the orthogonal complement of N(A)."""
    A = as_matrix(A)
    n = A.shape[1]
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return Subspace.trivial(n)
    r = int(np.sum(s > rank_tol * s[0]))
    return Subspace(n, Vt[:r].T.copy())


def rank(A, rank_tol: float = RANK_TOL) -> int:
    return range_of_adjoint(A, rank_tol).dim


def intersect(S: Subspace, T: Subspace) -> Subspace:
    _same_ambient(S, T)
    n = S.ambient_dim
    if S.is_trivial or T.is_trivial:
        return Subspace.trivial(n)
    # x = B_S a = B_T b  <=>  (a, b) in N([B_S, -B_T])
    N = nullspace(np.hstack([S.basis, -T.basis]))
    if N.is_trivial:
        return Subspace.trivial(n)
    return Subspace(n, _orth(S.basis @ N.basis[: S.dim], n))


@dataclass(frozen=True)
class SumResult:
    subspace: Subspace
    is_direct: bool
    is_orthogonal: bool


def sum_subspaces(S: Subspace, T: Subspace) -> SumResult:
    """S + T together with the direct / orthogonal flags."""
    _same_ambient(S, T)
    n = S.ambient_dim
    total = Subspace(n, _orth(np.hstack([S.basis, T.basis]), n))
    return SumResult(total, S.dim + T.dim == total.dim, is_orthogonal(S, T))


def is_orthogonal(S: Subspace, T: Subspace, tol: float = ORTH_TOL) -> bool:
    _same_ambient(S, T)
    if S.is_trivial or T.is_trivial:
        return True
    return bool(np.max(np.abs(S.basis.T @ T.basis)) <= tol)


def orthogonal_complement(S: Subspace) -> Subspace:
    if S.is_trivial:
        return Subspace.full(S.ambient_dim)
    return nullspace(S.basis.T)


def project(S: Subspace, x) -> np.ndarray:
    """Orthogonal projection of ``x`` onto ``S``."""
    x = S._check(x)
    return S.basis @ (S.basis.T @ x)


def oblique_projector(S: Subspace, T: Subspace) -> np.ndarray:
    """Matrix of the projection onto ``S`` along ``T`` (requires S (+) T = R^n)."""
    _same_ambient(S, T)
    res = sum_subspaces(S, T)
    if not res.is_direct:
        raise NotDirect("S and T intersect nontrivially")
    if res.subspace.dim != S.ambient_dim:
        raise NotDirect("S + T is not the whole space")
    M = np.hstack([S.basis, T.basis])
    coeff = np.linalg.inv(M)
    return S.basis @ coeff[: S.dim]


def split(S: Subspace, T: Subspace, x, tol: float = 1e-9):
    """Decompose ``x = s + t`` with ``s`` in S, ``t`` in T.

    Returns the coordinate vectors of ``s`` and ``t`` in the respective
    bases, or ``None`` when ``x`` is not in ``S + T``.
    """
    _same_ambient(S, T)
    x = S._check(x)
    M = np.hstack([S.basis, T.basis])
    if M.shape[1] == 0:
        return (np.zeros(0), np.zeros(0)) if np.linalg.norm(x) <= tol else None
    coeff, *_ = np.linalg.lstsq(M, x, rcond=None)
    if np.linalg.norm(M @ coeff - x) > tol * max(1.0, np.linalg.norm(x)):
        return None
    return coeff[: S.dim], coeff[S.dim:]


def principal_angles(S: Subspace, T: Subspace) -> np.ndarray:
    """Principal angles between S and T in increasing order."""
    _same_ambient(S, T)
    if S.is_trivial or T.is_trivial:
        return np.zeros(0)
    c = np.linalg.svd(S.basis.T @ T.basis, compute_uv=False)
    return np.arccos(np.clip(c, -1.0, 1.0))


def attachment_constant(S: Subspace, T: Subspace) -> float:
    """Smallest C with ``|h1| <= C |h1 + h2|`` for h1 in S, h2 in T.

    Equals ``1 / sin(theta_min)`` for the smallest principal angle. The sine
    is taken as the smallest singular value of ``(I - P_T) B_S``, which keeps
    full precision for nearly parallel pairs.
    """
    _same_ambient(S, T)
    if S.is_trivial or T.is_trivial:
        return 1.0
    if not intersect(S, T).is_trivial:
        raise NotDirect("attachment constant needs S and T to meet only in 0")
    R = S.basis - T.basis @ (T.basis.T @ S.basis)
    smin = np.linalg.svd(R, compute_uv=False)[-1]
    return float(max(1.0, 1.0 / smin))


def joint_projection_nullspace(X1: Subspace, X2: Subspace, W1: Subspace, W2: Subspace) -> Subspace:
    """Nullspace of ``z -> (pi_{X1,X2} z, pi_{W1,W2} z)``; equals X2 cap W2."""
    P = oblique_projector(X1, X2)
    Q = oblique_projector(W1, W2)
    return nullspace(np.vstack([P, Q]))


def joint_projection_injective_on(X1: Subspace, W1: Subspace) -> bool:
    """Rank check that ``(pi_X1, pi_W1)`` is injective on ``X1 + W1``."""
    Z = sum_subspaces(X1, W1).subspace
    if Z.is_trivial:
        return True
    stacked = np.vstack([X1.projector, W1.projector]) @ Z.basis
    return rank(stacked) == Z.dim
