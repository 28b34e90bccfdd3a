"""Pure-numpy kernels, vectorized over the leading batch axis."""

import numpy as np

_PAIRS = ((0, 1), (0, 2), (1, 2))
_MAX_SWEEPS = 50


def eig3_batch(a):
    """Cyclic Jacobi on a stack of symmetric 3x3 matrices.

    Returns unsorted eigenvalues ``(n, 3)`` and eigenvector columns ``(n, 3, 3)``.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    scale = np.einsum("nij,nij->n", a, a)
    for _ in range(_MAX_SWEEPS):
        off = a[:, 0, 1] ** 2 + a[:, 0, 2] ** 2 + a[:, 1, 2] ** 2
        active = (off > 1e-32 * scale) & (off > 0.0)
        if not active.any():
            break
        for p, q in _PAIRS:
            apq = a[:, p, q]
            rot = active & (apq != 0.0)
            if not rot.any():
                continue
            safe = np.where(rot, apq, 1.0)
            tau = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
            sgn = np.where(tau >= 0.0, 1.0, -1.0)
            t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            c = np.where(rot, c, 1.0)[:, None]
            s = np.where(rot, s, 0.0)[:, None]
            # A <- A J, then A <- J^T A
            ap = a[:, :, p].copy()
            aq = a[:, :, q].copy()
            a[:, :, p] = c * ap - s * aq
            a[:, :, q] = s * ap + c * aq
            ap = a[:, p, :].copy()
            aq = a[:, q, :].copy()
            a[:, p, :] = c * ap - s * aq
            a[:, q, :] = s * ap + c * aq
            a[rot, p, q] = 0.0
            a[rot, q, p] = 0.0
            vp = v[:, :, p].copy()
            vq = v[:, :, q].copy()
            v[:, :, p] = c * vp - s * vq
            v[:, :, q] = s * vp + c * vq
    w = np.stack([a[:, 0, 0], a[:, 1, 1], a[:, 2, 2]], axis=1)
    return w, v


def qr3_batch(a):
    """Householder QR of a stack of 3x3 matrices (no sign normalization)."""
    r = np.array(a, dtype=np.float64, copy=True)
    n = r.shape[0]
    q = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    for j in range(2):
        x = r[:, j:, j].copy()
        normx = np.sqrt(np.einsum("ni,ni->n", x, x))
        alpha = np.where(x[:, 0] >= 0.0, -normx, normx)
        x[:, 0] -= alpha
        vnorm2 = np.einsum("ni,ni->n", x, x)
        ok = vnorm2 > 0.0
        coef = np.where(ok, 2.0 / np.where(ok, vnorm2, 1.0), 0.0)
        # R[j:, :] -= coef * v (v^T R[j:, :])
        proj = np.einsum("ni,nik->nk", x, r[:, j:, :])
        r[:, j:, :] -= coef[:, None, None] * x[:, :, None] * proj[:, None, :]
        # Q[:, j:] -= coef * (Q[:, j:] v) v^T
        qv = np.einsum("nki,ni->nk", q[:, :, j:], x)
        q[:, :, j:] -= coef[:, None, None] * qv[:, :, None] * x[:, None, :]
    r[:, 1, 0] = 0.0
    r[:, 2, 0] = 0.0
    r[:, 2, 1] = 0.0
    return q, r


def mode_rotate(t, r, order):
    """Apply ``r[n]`` along every axis of the flattened order-``order`` tensors ``t[n]``."""
    out = np.array(t, dtype=np.float64, copy=True)
    n = out.shape[0]
    for ax in range(order):
        pre = 3**ax
        post = 3 ** (order - ax - 1)
        out = np.einsum("nij,npjq->npiq", r, out.reshape(n, pre, 3, post))
    return out.reshape(n, 3**order)


def best_split_sorted(x, y, order, member):
    """Exhaustive squared-error split search over the rows flagged in ``member``.

    ``order[:, f]`` is a stable argsort of ``x[:, f]`` over all rows. Returns
    ``(feature, threshold, gain)``; ``feature == -1`` when no split strictly
    reduces the node's squared error.
    """
    n = int(member.sum())
    if n < 2:
        return -1, 0.0, 0.0
    total = np.cumsum(y[member])[-1]  # sequential, same order as the loop backend
    parent = total * total / n
    best_score = parent
    best_f = -1
    best_t = 0.0
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    for f in range(x.shape[1]):
        rows = order[:, f][member[order[:, f]]]
        xs = x[rows, f]
        cs = np.cumsum(y[rows])[:-1]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        score = cs * cs / nl + (total - cs) * (total - cs) / nr
        score = np.where(valid, score, -np.inf)
        i = int(np.argmax(score))
        if score[i] > best_score:
            best_score = score[i]
            best_f = f
            t = 0.5 * (xs[i] + xs[i + 1])
            if t == xs[i + 1]:
                t = xs[i]
            best_t = t
    return best_f, float(best_t), float(best_score - parent)
