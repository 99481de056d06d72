# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled primal-dual iteration; same contract as ``pencon._pdhg_py.run_pdhg``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY, isfinite
from libc.stdlib cimport qsort

cnp.import_array()

BACKEND = "cython"

cdef enum:
    OP_IDENTITY = 0
    OP_BALL = 1
    OP_BALL_RESID = 2
    OP_PHI = 3
    PHI_KINKED = 1
    PHI_ABS = 2
    PHI_TWO_PIECE = 3
    PHI_BURG = 4
    PHI_AFFINE = 5
    N_L1 = 0
    N_L2 = 1
    N_LINF = 2


cdef struct Op:
    int code
    int n
    double *rp
    double *B1
    int k1
    double *B2
    int k2
    double *M
    double *c
    double *buf1   # length max(k1, n)
    double *buf2   # length max(k1, k2, n)


cdef int _cmp_desc(const void *a, const void *b) noexcept nogil:
    cdef double x = (<double *> a)[0]
    cdef double y = (<double *> b)[0]
    if x < y:
        return 1
    if x > y:
        return -1
    return 0


cdef void _project_ball(int norm, double *w, double r, double *out, int n, double *tmp) noexcept nogil:
    cdef int i
    cdef double acc, scale, css, theta, ui
    if r <= 0:
        for i in range(n):
            out[i] = 0.0
        return
    if norm == N_L2:
        acc = 0.0
        for i in range(n):
            acc += w[i] * w[i]
        acc = sqrt(acc)
        scale = 1.0 if acc <= r else r / acc
        for i in range(n):
            out[i] = w[i] * scale
    elif norm == N_LINF:
        for i in range(n):
            if w[i] > r:
                out[i] = r
            elif w[i] < -r:
                out[i] = -r
            else:
                out[i] = w[i]
    else:
        acc = 0.0
        for i in range(n):
            tmp[i] = fabs(w[i])
            acc += tmp[i]
        if acc <= r:
            for i in range(n):
                out[i] = w[i]
            return
        qsort(tmp, n, sizeof(double), _cmp_desc)
        css = 0.0
        theta = 0.0
        for i in range(n):
            ui = tmp[i]
            css += ui
            if ui * (i + 1) > css - r:
                theta = (css - r) / (i + 1.0)
        for i in range(n):
            ui = fabs(w[i]) - theta
            if ui < 0:
                ui = 0.0
            out[i] = ui if w[i] >= 0 else -ui
            if w[i] == 0:
                out[i] = 0.0


cdef double _prox_scalar(int kind, double v, double step, double *rp) noexcept nogil:
    cdef double cand, b, disc, d
    if kind == PHI_KINKED:
        cand = (v + 4.0 * step) / (1.0 + 2.0 * step)
        if cand >= 1.0:
            return cand
        cand = v - step * rp[1]
        if cand < 1.0:
            return cand
        return 1.0
    if kind == PHI_ABS:
        d = v - rp[1]
        if d > step:
            return v - step
        if d < -step:
            return v + step
        return rp[1]
    if kind == PHI_TWO_PIECE:
        cand = (v + 8.0 * step) / (1.0 + 2.0 * step)
        if cand <= 2.0:
            return cand
        cand = (v + 12.0 * step) / (1.0 + 4.0 * step)
        if cand > 2.0:
            return cand
        return 2.0
    # PHI_BURG
    b = v - step
    disc = sqrt(b * b + 4.0 * step)
    if b >= 0:
        return 0.5 * (b + disc)
    return 2.0 * step / (disc - b)


cdef void _apply(Op *op, double *w, double step, double *out) noexcept nogil:
    cdef int i, j, n = op.n, k1 = op.k1, k2 = op.k2
    cdef int kind
    cdef double acc
    if op.code == OP_IDENTITY:
        for i in range(n):
            out[i] = w[i]
    elif op.code == OP_BALL:
        _project_ball(<int> op.rp[0], w, op.rp[1], out, n, op.buf1)
    elif op.code == OP_BALL_RESID:
        _project_ball(<int> op.rp[0], w, op.rp[1] * step, out, n, op.buf1)
        for i in range(n):
            out[i] = w[i] - out[i]
    else:
        kind = <int> op.rp[0]
        # X2 part: B2 (B2^T w)
        for j in range(k2):
            acc = 0.0
            for i in range(n):
                acc += op.B2[i * k2 + j] * w[i]
            op.buf2[j] = acc
        for i in range(n):
            acc = 0.0
            for j in range(k2):
                acc += op.B2[i * k2 + j] * op.buf2[j]
            out[i] = acc
        if k1 == 0:
            return
        # X1 coordinates
        for j in range(k1):
            acc = 0.0
            for i in range(n):
                acc += op.B1[i * k1 + j] * w[i]
            op.buf1[j] = acc
        if kind == PHI_AFFINE:
            for i in range(k1):
                acc = op.c[i]
                for j in range(k1):
                    acc += op.M[i * k1 + j] * op.buf1[j]
                op.buf2[i] = acc
        else:
            op.buf2[0] = _prox_scalar(kind, op.buf1[0], step, op.rp)
        for i in range(n):
            acc = 0.0
            for j in range(k1):
                acc += op.B1[i * k1 + j] * op.buf2[j]
            out[i] += acc


cdef object _keep(list store, object arr, tuple shape=None):
    a = np.array(arr, dtype=np.float64, order="C", copy=True)
    if shape is not None:
        a = a.reshape(shape)
    store.append(a)
    return a


cdef void _fill(Op *op, object spec, int n, list store, double *b1, double *b2) except *:
    cdef cnp.float64_t[::1] rp
    cdef cnp.float64_t[:, ::1] B1, B2, M
    cdef cnp.float64_t[::1] c
    op.code = <int> spec[0]
    op.n = n
    op.buf1 = b1
    op.buf2 = b2
    op.k1 = 0
    op.k2 = 0
    if op.code == OP_IDENTITY:
        return
    rp = _keep(store, spec[1])
    op.rp = &rp[0]
    if op.code != OP_PHI:
        return
    B1 = _keep(store, spec[2], (n, -1))
    B2 = _keep(store, spec[3], (n, -1))
    op.k1 = B1.shape[1]
    op.k2 = B2.shape[1]
    Mm = _keep(store, spec[4])
    Mm = Mm.reshape(Mm.shape[0], -1) if Mm.ndim else Mm.reshape(1, 1)
    store.append(Mm)
    M = Mm
    c = _keep(store, np.atleast_1d(spec[5]))
    op.B1 = &B1[0, 0] if op.k1 else NULL
    op.B2 = &B2[0, 0] if op.k2 else NULL
    op.M = &M[0, 0]
    op.c = &c[0]


def run_pdhg(K, u, v, double sigma, double s, op_a, op_b, long max_iter, double tol, long check_every=25):
    cdef cnp.float64_t[:, ::1] Km = np.array(np.atleast_2d(K), dtype=np.float64, order="C", copy=True)
    cdef int nv = Km.shape[0], nu = Km.shape[1]
    cdef cnp.float64_t[::1] uu = np.array(u, dtype=np.float64).reshape(nu)
    cdef cnp.float64_t[::1] vv = np.array(v, dtype=np.float64).reshape(nv)
    cdef cnp.float64_t[::1] un = np.empty(nu)
    cdef cnp.float64_t[::1] vn = np.empty(nv)
    cdef cnp.float64_t[::1] w = np.empty(max(nu, nv))
    cdef int big = max(nu, nv) + 1
    cdef cnp.float64_t[::1] bufs = np.empty(4 * big)
    cdef list store = []
    cdef Op A, B
    cdef long it = 0
    cdef int i, j
    cdef double acc, ru2, rv2, res = INFINITY, du, dv
    _fill(&A, op_a, nu, store, &bufs[0], &bufs[big])
    _fill(&B, op_b, nv, store, &bufs[2 * big], &bufs[3 * big])
    with nogil:
        while it < max_iter:
            for j in range(nu):
                acc = 0.0
                for i in range(nv):
                    acc += Km[i, j] * vv[i]
                w[j] = uu[j] - sigma * acc
            _apply(&A, &w[0], sigma, &un[0])
            for i in range(nv):
                acc = 0.0
                for j in range(nu):
                    acc += Km[i, j] * (2.0 * un[j] - uu[j])
                w[i] = vv[i] + s * acc
            _apply(&B, &w[0], s, &vn[0])
            it += 1
            if it % check_every == 0 or it == max_iter:
                ru2 = 0.0
                for j in range(nu):
                    acc = 0.0
                    for i in range(nv):
                        acc += Km[i, j] * (vv[i] - vn[i])
                    du = (uu[j] - un[j]) / sigma - acc
                    ru2 += du * du
                rv2 = 0.0
                for i in range(nv):
                    acc = 0.0
                    for j in range(nu):
                        acc += Km[i, j] * (uu[j] - un[j])
                    dv = (vv[i] - vn[i]) / s - acc
                    rv2 += dv * dv
                res = sqrt(ru2) if ru2 > rv2 else sqrt(rv2)
                for j in range(nu):
                    uu[j] = un[j]
                for i in range(nv):
                    vv[i] = vn[i]
                if not isfinite(res) or res <= tol:
                    break
            else:
                for j in range(nu):
                    uu[j] = un[j]
                for i in range(nv):
                    vv[i] = vn[i]
    return np.asarray(uu).copy(), np.asarray(vv).copy(), int(it), float(res)
