"""Pure-Python primal-dual iteration; the fallback for the compiled ``_pdhg_ext``.

Both implementations share one calling convention::

    run_pdhg(K, u, v, sigma, s, op_a, op_b, max_iter, tol, check_every)
        -> (u, v, iterations, residual)

They iterate the Chambolle-Pock scheme for ``min_u A(u) + B(Ku)``::

    u+ = prox_{sigma A}(u - sigma K^T v)
    v+ = prox_{s B*}(v + s K (2 u+ - u))

and stop when ``max(|r_u|, |r_v|) <= tol`` with

    r_u = (u - u+) / sigma - K^T (v - v+),  r_v = (v - v+) / s - K (u - u+).

An operator spec is a tuple ``(code, rparams, B1, B2, M, c)``:

``OP_IDENTITY``   identity map
``OP_BALL``       projection onto the norm ball ``rparams = (norm, radius)``
``OP_BALL_RESID`` ``w - proj_{ball(norm, radius * step)}(w)``
``OP_PHI``        prox of the structured function ``phi(B1^T x) + 0 on span B2``,
                  ``+inf`` elsewhere; ``rparams = (kind, p0, p1, ...)``; for
                  ``PHI_AFFINE`` the prox in coordinates is ``M y + c``.
"""
from __future__ import annotations

import math

import numpy as np

from .norms import project_ball

OP_IDENTITY, OP_BALL, OP_BALL_RESID, OP_PHI = 0, 1, 2, 3
PHI_KINKED, PHI_ABS, PHI_TWO_PIECE, PHI_BURG, PHI_AFFINE = 1, 2, 3, 4, 5

BACKEND = "python"


def prox_kinked(v: float, step: float, m: float) -> float:
    """prox of ``(x-2)^2`` for ``x >= 1``, ``m(x-1)+1`` for ``x < 1``."""
    right = (v + 4.0 * step) / (1.0 + 2.0 * step)
    if right >= 1.0:
        return right
    left = v - step * m
    if left < 1.0:
        return left
    return 1.0


def prox_abs(v: float, step: float, a: float) -> float:
    d = v - a
    if d > step:
        return v - step
    if d < -step:
        return v + step
    return a


def prox_two_piece(v: float, step: float) -> float:
    """prox of ``(x-4)^2`` for ``x <= 2``, ``2(x-3)^2 + 2`` for ``x > 2``."""
    left = (v + 8.0 * step) / (1.0 + 2.0 * step)
    if left <= 2.0:
        return left
    right = (v + 12.0 * step) / (1.0 + 4.0 * step)
    if right > 2.0:
        return right
    return 2.0


def prox_burg(v: float, step: float) -> float:
    """prox of ``x - 1 - log x`` on ``x > 0``: positive root of ``x^2 + (step-v)x - step``."""
    b = v - step
    disc = math.sqrt(b * b + 4.0 * step)
    if b >= 0:
        return 0.5 * (b + disc)
    # cancellation-free form of the same root
    return 2.0 * step / (disc - b)


def prox_phi_coords(y: np.ndarray, step: float, rparams, M, c) -> np.ndarray:
    kind = int(rparams[0])
    if kind == PHI_AFFINE:
        return M @ y + c
    t = float(y[0])
    if kind == PHI_KINKED:
        return np.array([prox_kinked(t, step, rparams[1])])
    if kind == PHI_ABS:
        return np.array([prox_abs(t, step, rparams[1])])
    if kind == PHI_TWO_PIECE:
        return np.array([prox_two_piece(t, step)])
    if kind == PHI_BURG:
        return np.array([prox_burg(t, step)])
    raise ValueError(f"unknown phi kind {kind}")


def apply_op(op, w: np.ndarray, step: float) -> np.ndarray:
    code = op[0]
    if callable(code):
        return code(w, step)
    if code == OP_IDENTITY:
        return w.copy()
    rparams = op[1]
    if code == OP_BALL:
        return project_ball(int(rparams[0]), w, rparams[1])
    if code == OP_BALL_RESID:
        return w - project_ball(int(rparams[0]), w, rparams[1] * step)
    if code == OP_PHI:
        B1, B2, M, c = op[2], op[3], op[4], op[5]
        out = B2 @ (B2.T @ w)
        if B1.shape[1]:
            out = out + B1 @ prox_phi_coords(B1.T @ w, step, rparams, M, c)
        return out
    raise ValueError(f"unknown operator code {code}")


def run_pdhg(K, u, v, sigma, s, op_a, op_b, max_iter, tol, check_every=25):
    K = np.asarray(K, dtype=float)
    KT = K.T
    u = np.array(u, dtype=float)
    v = np.array(v, dtype=float)
    res = math.inf
    it = 0
    while it < max_iter:
        u_new = apply_op(op_a, u - sigma * (KT @ v), sigma)
        v_new = apply_op(op_b, v + s * (K @ (2.0 * u_new - u)), s)
        it += 1
        if it % check_every == 0 or it == max_iter:
            du = u - u_new
            dv = v - v_new
            ru = du / sigma - KT @ dv
            rv = dv / s - K @ du
            res = max(float(np.linalg.norm(ru)), float(np.linalg.norm(rv)))
            if not math.isfinite(res):
                u, v = u_new, v_new
                break
            if res <= tol:
                u, v = u_new, v_new
                break
        u, v = u_new, v_new
    return u, v, it, res
