"""Catalog of closed-form convex functions addressable by name.

=====================  =====================================================
name                   function
=====================  =====================================================
``piecewise_remark2``  ``(x-2)^2`` for ``x >= 1``, ``m(x-1)+1`` for ``x < 1``
                       (``m <= -2``)
``abs_shift``          ``|x - a|``
``piecewise_gdemo``    ``(x-4)^2`` for ``x <= 2``, ``2(x-3)^2+2`` for ``x > 2``
``burg_shift``         ``x - 1 + log(1/x)`` on ``x > 0``
``quadratic``          ``1/2 (z-b)^T Q (z-b)`` with ``Q`` symmetric positive
                       definite
=====================  =====================================================
"""
from __future__ import annotations

import math

import numpy as np

from . import _pdhg_py as K
from .errors import UnknownName
from .functions import INF, Caps, ConvexFn, SubgradientDescriptor


def _singleton(v) -> SubgradientDescriptor:
    return SubgradientDescriptor("singleton", {"point": np.atleast_1d(np.asarray(v, dtype=float))})


def _interval(lo, hi) -> SubgradientDescriptor:
    return SubgradientDescriptor("interval_1d", {"lo": float(lo), "hi": float(hi)})


class _Scalar(ConvexFn):
    """Shared plumbing for the one-dimensional catalog entries."""

    kind: int = 0

    def __init__(self, name, caps, probe_point, probe_box, conjugate_box=None):
        super().__init__(1, self._f, caps=caps, probe_point=[probe_point], probe_box=[probe_box],
                         conjugate_box=None if conjugate_box is None else [conjugate_box], name=name)

    def _f(self, x):
        return float(self.values(x.reshape(1, 1))[0])

    def kernel_params(self) -> list:
        return []

    def kernel_spec(self, step: float):
        return (K.OP_PHI, np.array([self.kind] + self.kernel_params(), dtype=float),
                np.zeros((1, 1)), np.zeros(1))

    def prox(self, v, step):
        spec = self.kernel_spec(step)
        return K.prox_phi_coords(np.asarray(v, dtype=float).reshape(1), float(step), spec[1], spec[2], spec[3])


class KinkedQuadratic(_Scalar):
    """Quadratic right of 1, affine with slope ``m`` left of 1."""

    kind = K.PHI_KINKED

    def __init__(self, m: float = -4.0):
        if m > -2:
            raise ValueError("slope m must satisfy m <= -2 for convexity")
        self.m = float(m)
        smooth = self.m == -2.0
        super().__init__(
            f"piecewise_remark2(m={self.m:g})",
            Caps(strictly_convex_on_ri=False, essentially_smooth=smooth, coercive=True,
                 locally_bounded_below=True, bounded_below=True),
            probe_point=2.0, probe_box=(-3.0, 5.0),
        )
        self.argmin_point = np.array([2.0])

    def kernel_params(self):
        return [self.m]

    def values(self, X):
        x = np.asarray(X, dtype=float).reshape(-1)
        return np.where(x >= 1.0, (x - 2.0) ** 2, self.m * (x - 1.0) + 1.0)

    def subgradient(self, x):
        t = float(np.asarray(x).reshape(-1)[0])
        if t > 1.0:
            return _singleton(2.0 * (t - 2.0))
        if t < 1.0:
            return _singleton(self.m)
        return _interval(self.m, -2.0)

    def conjugate(self, p):
        q = float(np.asarray(p).reshape(-1)[0])
        if q < self.m:
            return INF
        if q <= -2.0:
            return q - 1.0
        return 2.0 * q + 0.25 * q * q

    def conjugate_argmax(self, q):
        t = float(np.asarray(q).reshape(-1)[0])
        if t < self.m:
            raise ValueError("conjugate is +inf here")
        return np.array([1.0 if t <= -2.0 else 2.0 + 0.5 * t])


class ShiftedAbs(_Scalar):
    kind = K.PHI_ABS

    def __init__(self, a: float = 2.0):
        self.a = float(a)
        super().__init__(
            f"abs_shift(a={self.a:g})",
            Caps(coercive=True, locally_bounded_below=True, bounded_below=True),
            probe_point=self.a, probe_box=(self.a - 5.0, self.a + 5.0),
        )
        self.argmin_point = np.array([self.a])

    def kernel_params(self):
        return [self.a]

    def values(self, X):
        return np.abs(np.asarray(X, dtype=float).reshape(-1) - self.a)

    def subgradient(self, x):
        t = float(np.asarray(x).reshape(-1)[0])
        if t == self.a:
            return _interval(-1.0, 1.0)
        return _singleton(math.copysign(1.0, t - self.a))

    def conjugate(self, p):
        q = float(np.asarray(p).reshape(-1)[0])
        return self.a * q if abs(q) <= 1.0 else INF

    def conjugate_argmax(self, q):
        t = float(np.asarray(q).reshape(-1)[0])
        if abs(t) > 1.0:
            raise ValueError("conjugate is +inf here")
        return np.array([self.a])


class TwoPieceQuadratic(_Scalar):
    """C^1 but not C^2 at 2; unique minimizer 3."""

    kind = K.PHI_TWO_PIECE

    def __init__(self):
        super().__init__(
            "piecewise_gdemo",
            Caps(strictly_convex_on_ri=True, essentially_smooth=True, coercive=True,
                 locally_bounded_below=True, bounded_below=True),
            probe_point=3.0, probe_box=(-2.0, 7.0),
        )
        self.argmin_point = np.array([3.0])

    def values(self, X):
        x = np.asarray(X, dtype=float).reshape(-1)
        return np.where(x <= 2.0, (x - 4.0) ** 2, 2.0 * (x - 3.0) ** 2 + 2.0)

    def derivative(self, t: float) -> float:
        return 2.0 * (t - 4.0) if t <= 2.0 else 4.0 * (t - 3.0)

    def subgradient(self, x):
        return _singleton(self.derivative(float(np.asarray(x).reshape(-1)[0])))

    def conjugate(self, p):
        q = float(np.asarray(p).reshape(-1)[0])
        if q <= -4.0:
            return 4.0 * q + 0.25 * q * q
        return 3.0 * q + q * q / 8.0 - 2.0

    def conjugate_argmax(self, q):
        t = float(np.asarray(q).reshape(-1)[0])
        return np.array([4.0 + 0.5 * t if t <= -4.0 else 3.0 + 0.25 * t])


class ShiftedBurg(_Scalar):
    """``x - 1 - log x``; minimum 0 at 1, conjugate ``-log(1-p)``."""

    kind = K.PHI_BURG

    def __init__(self):
        super().__init__(
            "burg_shift",
            Caps(strictly_convex_on_ri=True, essentially_smooth=True, coercive=True,
                 locally_bounded_below=True, bounded_below=True),
            probe_point=1.0, probe_box=(0.05, 8.0), conjugate_box=(1e-12, 1e4),
        )
        self.argmin_point = np.array([1.0])

    def values(self, X):
        x = np.asarray(X, dtype=float).reshape(-1)
        out = np.full(x.shape, INF)
        pos = x > 0
        out[pos] = x[pos] - 1.0 - np.log(x[pos])
        return out

    def subgradient(self, x):
        t = float(np.asarray(x).reshape(-1)[0])
        if t <= 0:
            return SubgradientDescriptor("empty")
        return _singleton(1.0 - 1.0 / t)

    def conjugate(self, p):
        q = float(np.asarray(p).reshape(-1)[0])
        return -math.log1p(-q) if q < 1.0 else INF

    def conjugate_argmax(self, q):
        t = float(np.asarray(q).reshape(-1)[0])
        if t >= 1.0:
            raise ValueError("conjugate is +inf here")
        return np.array([1.0 / (1.0 - t)])


class Quadratic(ConvexFn):
    """``1/2 (z-b)^T Q (z-b)`` with ``Q`` symmetric positive definite."""

    def __init__(self, Q, b):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        k = b.size
        if Q.shape != (k, k):
            raise ValueError(f"Q has shape {Q.shape}, expected {(k, k)}")
        if not np.allclose(Q, Q.T):
            raise ValueError("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() <= 0:
            raise ValueError("Q must be positive definite")
        self.Q, self.b = Q, b
        self._Qinv = np.linalg.inv(Q)
        box = np.stack([b - 5.0, b + 5.0], axis=1)
        super().__init__(
            k, self._f,
            caps=Caps(strictly_convex_on_ri=True, essentially_smooth=True, coercive=True,
                      locally_bounded_below=True, bounded_below=True),
            probe_point=b, probe_box=box, name=f"quadratic(dim={k})",
        )
        self.argmin_point = b.copy()

    def _f(self, z):
        d = z - self.b
        return 0.5 * float(d @ self.Q @ d)

    def values(self, X):
        D = np.asarray(X, dtype=float).reshape(-1, self.dim) - self.b
        return 0.5 * np.einsum("ij,jk,ik->i", D, self.Q, D)

    def subgradient(self, x):
        return _singleton(self.Q @ (self._point(x) - self.b))

    def conjugate(self, p):
        p = self._point(p)
        return float(p @ self.b + 0.5 * p @ self._Qinv @ p)

    def conjugate_argmax(self, q):
        return self.b + self._Qinv @ self._point(q)

    def kernel_spec(self, step: float):
        M = np.linalg.inv(np.eye(self.dim) + step * self.Q)
        return (K.OP_PHI, np.array([K.PHI_AFFINE], dtype=float), M, M @ (step * (self.Q @ self.b)))

    def prox(self, v, step):
        _, _, M, c = self.kernel_spec(step)
        return M @ self._point(v) + c


def _quadratic_from_params(params):
    if params is None:
        raise ValueError("quadratic needs params Q and b")
    if isinstance(params, dict):
        return Quadratic(params["Q"], params["b"])
    flat = [float(t) for t in params]
    # k*k entries of Q followed by k entries of b
    k = int(round((-1 + math.sqrt(1 + 4 * len(flat))) / 2))
    if k * k + k != len(flat) or k == 0:
        raise ValueError("quadratic params must hold k*k entries of Q then k entries of b")
    return Quadratic(np.reshape(flat[: k * k], (k, k)), flat[k * k:])


def _scalar_param(params, key, default):
    if params is None:
        return default
    if isinstance(params, dict):
        return float(params.get(key, default))
    params = list(params)
    return float(params[0]) if params else default


CATALOG = {
    "piecewise_remark2": lambda p: KinkedQuadratic(_scalar_param(p, "m", -4.0)),
    "abs_shift": lambda p: ShiftedAbs(_scalar_param(p, "a", 2.0)),
    "piecewise_gdemo": lambda p: TwoPieceQuadratic(),
    "burg_shift": lambda p: ShiftedBurg(),
    "quadratic": _quadratic_from_params,
}


def builtin_phi(name: str, params=None) -> ConvexFn:
    """Build a catalog function by name; ``params`` is a list or a dict."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise UnknownName(f"unknown function {name!r}; known: {sorted(CATALOG)}") from None
    return factory(params)
