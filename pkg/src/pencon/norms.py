"""Norms on R^m paired with their duals, ball projections and subdifferentials."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownName

# integer codes shared with the compiled kernels
L1, L2, LINF = 0, 1, 2
_CODES = {"L1": L1, "L2": L2, "Linf": LINF}
_DUAL = {L1: LINF, L2: L2, LINF: L1}


def norm_value(code: int, x: np.ndarray) -> float:
    if x.size == 0:
        return 0.0
    if code == L1:
        return float(np.sum(np.abs(x)))
    if code == L2:
        return float(np.linalg.norm(x))
    return float(np.max(np.abs(x)))


def project_l1_ball(v: np.ndarray, r: float) -> np.ndarray:
    """Euclidean projection onto ``{|x|_1 <= r}`` (sort-based)."""
    if r <= 0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= r:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    rho = np.nonzero(u * k > css - r)[0][-1]
    theta = (css[rho] - r) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def project_ball(code: int, v: np.ndarray, r: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto the ``code``-norm ball of radius ``r``."""
    v = np.asarray(v, dtype=float)
    if r <= 0:
        return np.zeros_like(v)
    if code == L2:
        nv = np.linalg.norm(v)
        return v.copy() if nv <= r else v * (r / nv)
    if code == LINF:
        return np.clip(v, -r, r)
    return project_l1_ball(v, r)


@dataclass(frozen=True)
class NormPair:
    """A norm together with its dual norm.

    ``tag`` is one of ``"L1"``, ``"L2"``, ``"Linf"``.
    """

    tag: str

    def __post_init__(self):
        if self.tag not in _CODES:
            raise UnknownName(f"unknown norm tag {self.tag!r}; expected one of {sorted(_CODES)}")

    @property
    def code(self) -> int:
        return _CODES[self.tag]

    @property
    def dual_code(self) -> int:
        return _DUAL[self.code]

    def primal(self, x) -> float:
        return norm_value(self.code, np.asarray(x, dtype=float).reshape(-1))

    def dual(self, p) -> float:
        return norm_value(self.dual_code, np.asarray(p, dtype=float).reshape(-1))

    __call__ = primal

    def project_primal_ball(self, x, r: float) -> np.ndarray:
        return project_ball(self.code, x, r)

    def project_dual_ball(self, p, r: float) -> np.ndarray:
        return project_ball(self.dual_code, p, r)

    def subgradient(self, x, tol: float = 0.0):
        """Subdifferential of the norm at ``x`` as a descriptor."""
        from .functions import SubgradientDescriptor

        x = np.asarray(x, dtype=float).reshape(-1)
        if self.primal(x) <= tol:
            return SubgradientDescriptor("dual_ball_scaled", {"norm": self, "radius": 1.0})
        if self.code == L2:
            return SubgradientDescriptor("singleton", {"point": x / np.linalg.norm(x)})
        return SubgradientDescriptor("dual_face", {"norm": self, "x": x.copy()})

    def face_element(self, x) -> np.ndarray:
        """One element of ``{p : <p,x> = |x|, |p|_* = 1}`` for ``x != 0``."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.code == L2:
            return x / np.linalg.norm(x)
        if self.code == L1:
            return np.sign(x)
        p = np.zeros_like(x)
        i = int(np.argmax(np.abs(x)))
        p[i] = np.sign(x[i])
        return p


def norm_pair(tag: str) -> NormPair:
    return NormPair(tag)


def norm_subgradient(np_: NormPair, x):
    """Descriptor of the subdifferential of ``np_`` at ``x``."""
    return np_.subgradient(x)
