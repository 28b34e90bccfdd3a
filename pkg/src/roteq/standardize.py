"""Canonical ("standard") position of a symmetric tensor or tensor tuple.

Even-order anchors are contracted to a 3x3 matrix and diagonalized; odd-order
anchors are contracted to order 3, their three order-1 contractions stacked as
columns and QR-factored. The resulting rotation ``restore`` satisfies
``original == rotate(xs, restore)``.

Two situations the plain recipe leaves ambiguous are handled explicitly:

* An eigenbasis is only fixed up to the sign flips ``diag(+-1, +-1, +-1)``
  with determinant +1 (a Klein four-group). Signs are chosen from
  orientation-independent statistics of the whole rotated tuple: for each
  non-trivial character of the group, a position-weighted sum of cubed
  components that transform under it. Flips that leave the tuple unchanged cannot be resolved
  and are reported in ``residual``; :func:`restore_label` averages over them,
  which keeps the full pipeline exactly equivariant.
* For a fully symmetric odd tensor the three contracted vectors coincide, so
  the stacked matrix has rank 1. The frame is then taken from the Krylov
  vectors ``v, A v, A^2 v`` with ``v`` the contracted vector and
  ``A_ij = T_ijk v_k``.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import DEGENERACY_TOL, eig3_conventional, qr3_conventional
from .tensor import DIM, TensorTuple, contract_to_order_batch, rotate_batch

# diag(1,1,1), diag(1,-1,-1), diag(-1,1,-1), diag(-1,-1,1)
KLEIN = np.array([np.diag(d) for d in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))], float)
# CHARACTERS[c, g]: sign picked up by a component of class c under KLEIN[g]
CHARACTERS = np.array(
    [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=float
)

RELEVANT_TOL = 1e-20  # squared relative mass below which a character class is empty
SIGN_TOL = 1e-9
SNAP_TOL = 1e-12

STATS = {"calls": 0}  # instrumentation: number of standardize_batch invocations


def component_classes(order):
    """Character class (0..3) of every flattened component of an order-``order`` tensor."""
    if order == 0:
        return np.zeros(1, dtype=int)
    idx = np.array(list(np.ndindex(*(DIM,) * order)))
    counts = np.stack([(idx == i).sum(axis=1) for i in range(DIM)], axis=1)
    e1 = (counts[:, 0] + counts[:, 2]) % 2
    e2 = (counts[:, 1] + counts[:, 2]) % 2
    return e1 + 2 * e2


@dataclass
class StandardizedBatch:
    scalars: np.ndarray
    tensors: dict
    restore: np.ndarray
    degenerate: np.ndarray
    conditioning: np.ndarray
    residual: np.ndarray  # (n, 4) bool mask over KLEIN


@dataclass(frozen=True)
class StandardizedSample:
    xs: TensorTuple
    restore: np.ndarray
    degenerate: bool
    conditioning: float
    residual: np.ndarray  # (m, 3, 3) sign matrices that leave xs unchanged


def _norms(x):
    n = x.shape[0]
    return np.sqrt(np.einsum("ni,ni->n", x.reshape(n, -1), x.reshape(n, -1)))


def _even_frame(anchor):
    t2 = contract_to_order_batch(anchor, 2)
    t2 = 0.5 * (t2 + t2.transpose(0, 2, 1))
    _, v, gap = eig3_conventional(t2)
    return v, gap


def _odd_frame(anchor):
    t3 = contract_to_order_batch(anchor, 3)
    v1 = np.trace(t3, axis1=2, axis2=3)
    v2 = np.trace(t3, axis1=1, axis2=3)
    v3 = np.trace(t3, axis1=1, axis2=2)
    m = np.stack([v1, v2, v3], axis=2)
    q, u, cond = qr3_conventional(m)
    norm = _norms(m)
    low_rank = np.abs(u[:, 1, 1]) < DEGENERACY_TOL * norm
    if low_rank.any():
        sel = np.nonzero(low_rank)[0]
        q[sel], cond[sel] = _krylov_frame(t3[sel], m[sel])
    return q, cond


def _krylov_frame(t3, m):
    v = m.mean(axis=2)
    a = np.einsum("nijk,nk->nij", t3, v)
    av = np.einsum("nij,nj->ni", a, v)
    aav = np.einsum("nij,nj->ni", a, av)
    cols = []
    for c in (v, av, aav):
        nc = np.linalg.norm(c, axis=1, keepdims=True)
        cols.append(np.where(nc > 0.0, c / np.where(nc > 0.0, nc, 1.0), 0.0))
    k = np.stack(cols, axis=2)
    q, _, cond = qr3_conventional(k)
    return q, cond


def _klein_fix(tensors):
    """Pick one Klein element per sample; return (index, residual mask, ambiguous)."""
    n = next(iter(tensors.values())).shape[0]
    mass = np.zeros((n, 4))
    cube = np.zeros((n, 4))
    for t in tensors.values():
        k = t.ndim - 1
        if k == 0:
            continue
        cls = component_classes(k)
        flat = t.reshape(n, -1)
        norm = _norms(flat)
        z = flat / np.where(norm > 0.0, norm, 1.0)[:, None]
        # position weights keep antisymmetric pairs (z_ij = -z_ji) from cancelling
        weight = 1.0 + np.arange(flat.shape[1]) / flat.shape[1]
        for c in (1, 2, 3):
            sel = cls == c
            zc = z[:, sel]
            mass[:, c] += np.einsum("ni,ni->n", zc, zc)
            cube[:, c] += (zc**3) @ weight[sel]
    relevant = mass > RELEVANT_TOL
    relevant[:, 0] = False
    key = np.where(relevant, np.abs(cube), -1.0)
    ranked = np.argsort(-key, axis=1, kind="stable")
    nrel = relevant.sum(axis=1)
    fixed = np.zeros((n, 4), dtype=bool)
    rows = np.arange(n)
    fixed[rows, ranked[:, 0]] = nrel >= 1
    fixed[rows, ranked[:, 1]] |= nrel >= 2
    fixed[:, 0] = False
    sign = np.where(cube < 0.0, -1.0, 1.0)
    # element g is admissible when chi_c(g) == sign(f_c) for every fixed class c
    ok = np.ones((n, 4), dtype=bool)
    for c in (1, 2, 3):
        match = CHARACTERS[c][None, :] * sign[:, c][:, None] > 0
        ok &= ~fixed[:, c][:, None] | match
    choice = np.argmax(ok, axis=1)
    residual = np.ones((n, 4), dtype=bool)
    for c in (1, 2, 3):
        residual &= ~relevant[:, c][:, None] | (CHARACTERS[c][None, :] > 0)
    ambiguous = (fixed & (np.abs(cube) <= SIGN_TOL * mass**1.5)).any(axis=1)
    return choice, residual, ambiguous


def _apply_klein(t, choice):
    k = t.ndim - 1
    if k == 0:
        return t
    factors = CHARACTERS[component_classes(k)][:, choice].T  # (n, 3**k)
    n = t.shape[0]
    return (t.reshape(n, -1) * factors).reshape(t.shape)


def _snap(t):
    n = t.shape[0]
    flat = t.reshape(n, -1)
    tol = SNAP_TOL * _norms(flat)
    return np.where(np.abs(flat) <= tol[:, None], 0.0, flat).reshape(t.shape)


def standardize_batch(scalars, tensors, anchor):
    """Standardize a batch of tuples sharing one layout.

    ``tensors`` maps names to ``(n, 3, ..., 3)`` arrays; the frame comes from
    ``tensors[anchor]`` (its contraction is symmetrized for even orders), and
    the same rotation is applied to every tensor. Scalars pass through.
    """
    STATS["calls"] += 1
    a = np.asarray(tensors[anchor], dtype=np.float64)
    k = a.ndim - 1
    if k < 2:
        raise ValueError("anchor tensor must have order >= 2")
    n = a.shape[0]
    if k % 2 == 0:
        frame, cond = _even_frame(a)
    else:
        frame, cond = _odd_frame(a)
    inv = frame.transpose(0, 2, 1)
    xs = {name: rotate_batch(t, inv) for name, t in tensors.items()}
    degenerate = cond < DEGENERACY_TOL
    if k % 2 == 0:
        choice, residual, ambiguous = _klein_fix(xs)
        xs = {name: _apply_klein(t, choice) for name, t in xs.items()}
        frame = frame @ KLEIN[choice]
        degenerate |= ambiguous
    else:
        residual = np.zeros((n, 4), dtype=bool)
        residual[:, 0] = True
    xs = {name: _snap(t) for name, t in xs.items()}
    return StandardizedBatch(
        scalars=np.asarray(scalars, dtype=np.float64).copy(),
        tensors=xs,
        restore=frame,
        degenerate=degenerate,
        conditioning=cond,
        residual=residual,
    )


def residual_average(ys, residual):
    """Project a batch of tensors onto the part invariant under each sample's residual flips."""
    ys = np.asarray(ys, dtype=np.float64)
    k = ys.ndim - 1
    if k == 0:
        return ys.copy()
    weights = residual / residual.sum(axis=1, keepdims=True)
    per_class = weights @ CHARACTERS.T  # (n, 4): mean character value per class
    factors = per_class[:, component_classes(k)]
    n = ys.shape[0]
    return (ys.reshape(n, -1) * factors).reshape(ys.shape)


def standardize_labels(y, batch):
    """Labels in the inputs' standard frame, ``rotate(y, restore^T)``."""
    ys = rotate_batch(y, batch.restore.transpose(0, 2, 1))
    return residual_average(ys, batch.residual)


def restore_batch(ys, batch):
    return rotate_batch(residual_average(ys, batch.residual), batch.restore)


def _sample(tup, batch):
    xs = TensorTuple(
        {name: float(batch.scalars[0, i]) for i, name in enumerate(tup.scalars)},
        {name: t[0] for name, t in batch.tensors.items()},
        tup.anchor,
    )
    return StandardizedSample(
        xs=xs,
        restore=batch.restore[0],
        degenerate=bool(batch.degenerate[0]),
        conditioning=float(batch.conditioning[0]),
        residual=KLEIN[batch.residual[0]],
    )


def standardize_tuple(tup):
    """Standard position of a whole tuple, with the frame taken from its anchor."""
    anchor = np.asarray(tup.tensors[tup.anchor])
    if anchor.ndim < 2:
        raise ValueError("anchor tensor must have order >= 2")
    scalars = np.array([[v for v in tup.scalars.values()]], dtype=np.float64).reshape(1, -1)
    tensors = {name: np.asarray(t, dtype=np.float64)[None] for name, t in tup.tensors.items()}
    return _sample(tup, standardize_batch(scalars, tensors, tup.anchor))


def standardize_even(t):
    t = np.asarray(t, dtype=np.float64)
    if t.ndim < 2 or t.ndim % 2:
        raise ValueError("standardize_even needs an even order >= 2")
    t2 = contract_to_order_batch(t[None], 2)[0]
    if np.linalg.norm(t2 - t2.T) > 1e-10 * np.linalg.norm(t2):
        raise ValueError("contracted anchor is not symmetric")
    return standardize_tuple(TensorTuple({}, {"T": t}, "T"))


def standardize_odd(t):
    t = np.asarray(t, dtype=np.float64)
    if t.ndim < 3 or t.ndim % 2 == 0:
        raise ValueError("standardize_odd needs an odd order >= 3")
    return standardize_tuple(TensorTuple({}, {"T": t}, "T"))


def standardize(t):
    """Dispatch on parity: single tensor of order >= 2."""
    t = np.asarray(t, dtype=np.float64)
    return standardize_even(t) if t.ndim % 2 == 0 else standardize_odd(t)


def restore_label(ys, sample):
    """Bring a standard-frame prediction back to the sample's observed frame."""
    ys = np.asarray(ys, dtype=np.float64)
    mask = np.array([[any(np.array_equal(g, r) for r in sample.residual) for g in KLEIN]])
    batch_like = StandardizedBatch(
        scalars=np.zeros((1, 0)), tensors={}, restore=sample.restore[None],
        degenerate=np.array([sample.degenerate]), conditioning=np.array([sample.conditioning]),
        residual=mask,
    )
    return restore_batch(ys[None], batch_like)[0]
