"""3x3 factorizations with fixed sign/order conventions, and Haar rotations.

The conventions matter: a canonical frame is only a function of its input
if every factorization below is deterministic.

* :func:`sym_eig3` sorts eigenvalues descending, makes the largest-magnitude
  component of each eigenvector positive (first on ties), then negates the
  third column if that left a reflection.
* :func:`qr3` makes ``diag(u) >= 0`` and, if ``q`` is then a reflection,
  negates the column of ``q`` (row of ``u``) with the smallest ``|u_ii|``.
"""

from typing import NamedTuple

import numpy as np

from . import kernels

DEGENERACY_TOL = 1e-8


class EigenResult(NamedTuple):
    eigenvalues: np.ndarray
    basis: np.ndarray
    degenerate: bool


class QrResult(NamedTuple):
    q: np.ndarray
    u: np.ndarray
    degenerate: bool


def _finite(a, what):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} has non-finite entries")


def eig3_conventional(a):
    """Batched symmetric eigendecomposition with the module's conventions.

    ``a`` is ``(n, 3, 3)`` and assumed symmetric. Returns eigenvalues
    ``(n, 3)`` descending, bases ``(n, 3, 3)`` in SO(3), and the relative
    eigen-gap ``min(gaps) / ||a||_F`` per matrix (0 for the zero matrix).
    """
    a = np.asarray(a, dtype=np.float64)
    w, v = kernels.eig3_batch(a)
    n = a.shape[0]
    rows = np.arange(n)[:, None]
    order = np.argsort(-w, axis=1, kind="stable")
    w = w[rows, order]
    v = v[rows, :, order].transpose(0, 2, 1)
    # largest-magnitude component of each column positive
    idx = np.argmax(np.abs(v), axis=1)
    lead = np.take_along_axis(v, idx[:, None, :], axis=1)[:, 0, :]
    v = v * np.where(lead < 0.0, -1.0, 1.0)[:, None, :]
    flip = np.linalg.det(v) < 0.0
    v[flip, :, 2] *= -1.0
    norm = np.sqrt(np.einsum("nij,nij->n", a, a))
    gap = np.minimum(w[:, 0] - w[:, 1], w[:, 1] - w[:, 2])
    rel_gap = np.where(norm > 0.0, gap / np.where(norm > 0.0, norm, 1.0), 0.0)
    return w, v, rel_gap


def qr3_conventional(a):
    """Batched QR with positive-diagonal and proper-rotation conventions.

    Returns ``q (n,3,3)``, ``u (n,3,3)`` and ``min|u_ii| / ||a||_F``.
    """
    a = np.asarray(a, dtype=np.float64)
    q, u = kernels.qr3_batch(a)
    diag = np.diagonal(u, axis1=1, axis2=2)
    s = np.where(diag < 0.0, -1.0, 1.0)
    u = u * s[:, :, None]
    q = q * s[:, None, :]
    flip = np.linalg.det(q) < 0.0
    if flip.any():
        absdiag = np.abs(np.diagonal(u, axis1=1, axis2=2))
        k = np.argmin(absdiag, axis=1)
        for m in np.nonzero(flip)[0]:
            q[m, :, k[m]] *= -1.0
            u[m, k[m], :] *= -1.0
    norm = np.sqrt(np.einsum("nij,nij->n", a, a))
    mind = np.min(np.abs(np.diagonal(u, axis1=1, axis2=2)), axis=1)
    cond = np.where(norm > 0.0, mind / np.where(norm > 0.0, norm, 1.0), 0.0)
    return q, u, cond


def sym_eig3(a):
    """Eigendecomposition of a symmetric 3x3 matrix, ``a == basis @ diag(w) @ basis.T``."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got {a.shape}")
    _finite(a, "matrix")
    norm = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > 1e-10 * norm:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    w, v, gap = eig3_conventional(a[None])
    return EigenResult(w[0], v[0], bool(gap[0] < DEGENERACY_TOL))


def qr3(a):
    """QR factorization ``a == q @ u`` with ``q`` in SO(3)."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got {a.shape}")
    _finite(a, "matrix")
    q, u, cond = qr3_conventional(a[None])
    return QrResult(q[0], u[0], bool(cond[0] < DEGENERACY_TOL))


def quaternion_to_matrix(quat):
    """Unit quaternions ``(n, 4)`` as ``(w, x, y, z)`` -> rotation matrices ``(n, 3, 3)``."""
    w, x, y, z = np.moveaxis(np.asarray(quat, dtype=np.float64), -1, 0)
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)], -1),
            np.stack([2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)], -1),
            np.stack([2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)], -1),
        ],
        -2,
    )


def random_rotations(rng, n):
    """``n`` Haar-uniform rotations from normalized 4-d standard normals."""
    g = rng.standard_normal((n, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return quaternion_to_matrix(g)


def random_rotation(rng):
    return random_rotations(rng, 1)[0]
