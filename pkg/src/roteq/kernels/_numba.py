"""Numba-compiled kernels; same signatures and conventions as ``_numpy``."""

import numpy as np
from numba import njit

_MAX_SWEEPS = 50


@njit(cache=True)
def _jacobi_one(a, v):
    scale = 0.0
    for i in range(3):
        for j in range(3):
            scale += a[i, j] * a[i, j]
    for _ in range(_MAX_SWEEPS):
        off = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
        if off <= 1e-32 * scale or off == 0.0:
            break
        for pair in range(3):
            if pair == 0:
                p, q = 0, 1
            elif pair == 1:
                p, q = 0, 2
            else:
                p, q = 1, 2
            apq = a[p, q]
            if apq == 0.0:
                continue
            tau = (a[q, q] - a[p, p]) / (2.0 * apq)
            sgn = 1.0 if tau >= 0.0 else -1.0
            t = sgn / (abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            for k in range(3):
                akp = a[k, p]
                akq = a[k, q]
                a[k, p] = c * akp - s * akq
                a[k, q] = s * akp + c * akq
            for k in range(3):
                apk = a[p, k]
                aqk = a[q, k]
                a[p, k] = c * apk - s * aqk
                a[q, k] = s * apk + c * aqk
            a[p, q] = 0.0
            a[q, p] = 0.0
            for k in range(3):
                vkp = v[k, p]
                vkq = v[k, q]
                v[k, p] = c * vkp - s * vkq
                v[k, q] = s * vkp + c * vkq


@njit(cache=True)
def eig3_batch(a):
    n = a.shape[0]
    w = np.empty((n, 3))
    vecs = np.zeros((n, 3, 3))
    for m in range(n):
        work = a[m].copy()
        v = np.eye(3)
        _jacobi_one(work, v)
        for i in range(3):
            w[m, i] = work[i, i]
        vecs[m] = v
    return w, vecs


@njit(cache=True)
def qr3_batch(a):
    n = a.shape[0]
    qs = np.zeros((n, 3, 3))
    rs = np.zeros((n, 3, 3))
    x = np.empty(3)
    for m in range(n):
        r = a[m].copy()
        q = np.eye(3)
        for j in range(2):
            normx = 0.0
            for i in range(j, 3):
                x[i] = r[i, j]
                normx += x[i] * x[i]
            normx = np.sqrt(normx)
            alpha = -normx if x[j] >= 0.0 else normx
            x[j] -= alpha
            vnorm2 = 0.0
            for i in range(j, 3):
                vnorm2 += x[i] * x[i]
            if vnorm2 <= 0.0:
                continue
            coef = 2.0 / vnorm2
            for k in range(3):
                proj = 0.0
                for i in range(j, 3):
                    proj += x[i] * r[i, k]
                for i in range(j, 3):
                    r[i, k] -= coef * x[i] * proj
            for k in range(3):
                qv = 0.0
                for i in range(j, 3):
                    qv += q[k, i] * x[i]
                for i in range(j, 3):
                    q[k, i] -= coef * qv * x[i]
        r[1, 0] = 0.0
        r[2, 0] = 0.0
        r[2, 1] = 0.0
        qs[m] = q
        rs[m] = r
    return qs, rs


@njit(cache=True)
def mode_rotate(t, r, order):
    n = t.shape[0]
    size = 3**order
    out = t.copy()
    buf = np.empty(size)
    for m in range(n):
        cur = out[m]
        for ax in range(order):
            post = 3 ** (order - ax - 1)
            pre = 3**ax
            for p in range(pre):
                for qq in range(post):
                    base = p * 3 * post + qq
                    for i in range(3):
                        s = 0.0
                        for j in range(3):
                            s += r[m, i, j] * cur[base + j * post]
                        buf[base + i * post] = s
            for k in range(size):
                cur[k] = buf[k]
    return out


@njit(cache=True)
def best_split_sorted(x, y, order, member):
    """Split search over the rows flagged in ``member``.

    ``order[:, f]`` is a stable argsort of ``x[:, f]`` over all rows; filtering
    it keeps the node's rows sorted without re-sorting.
    """
    n_all, d = x.shape
    n = 0
    total = 0.0
    for i in range(n_all):
        if member[i]:
            n += 1
            total += y[i]
    if n < 2:
        return -1, 0.0, 0.0
    parent = total * total / n
    best_score = parent
    best_f = -1
    best_t = 0.0
    rows = np.empty(n, dtype=np.int64)
    for f in range(d):
        m = 0
        for i in range(n_all):
            r = order[i, f]
            if member[r]:
                rows[m] = r
                m += 1
        s = 0.0
        for i in range(n - 1):
            s += y[rows[i]]
            a = x[rows[i], f]
            b = x[rows[i + 1], f]
            if a < b:
                nl = i + 1.0
                nr = n - nl
                score = s * s / nl + (total - s) * (total - s) / nr
                if score > best_score:
                    best_score = score
                    best_f = f
                    t = 0.5 * (a + b)
                    if t == b:
                        t = a
                    best_t = t
    return best_f, best_t, best_score - parent
