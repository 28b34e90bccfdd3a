"""Dense tensors over R^3 as plain numpy arrays of shape ``(3,) * order``.

Axis arguments to :func:`contract` are 1-based, matching the usual ``C(a, b)``
notation. Batched variants take a leading sample axis.
"""

from dataclasses import dataclass, field
from itertools import permutations
from math import factorial

import numpy as np

from . import kernels

DIM = 3
MAX_SYMMETRIZE_ORDER = 6


def order_of(t):
    return np.ndim(t)


def check_rotation(r, tol=1e-12):
    """Validate ``r`` as an element of SO(3) and return it as a float array."""
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("rotation has non-finite entries")
    if np.linalg.norm(r @ r.T - np.eye(3)) > tol:
        raise ValueError("rotation is not orthonormal")
    if abs(np.linalg.det(r) - 1.0) > tol:
        raise ValueError("rotation determinant is not +1")
    return r


def _check_tensor(t):
    t = np.asarray(t, dtype=np.float64)
    if any(s != DIM for s in t.shape):
        raise ValueError(f"tensor axes must all have length {DIM}, got {t.shape}")
    return t


def rotate_batch(t, r):
    """Rotate a batch ``t`` of shape ``(n, 3, ..., 3)`` by ``r`` of shape ``(n, 3, 3)`` or ``(3, 3)``."""
    t = np.asarray(t, dtype=np.float64)
    n = t.shape[0]
    order = t.ndim - 1
    if any(s != DIM for s in t.shape[1:]):
        raise ValueError(f"tensor axes must all have length {DIM}, got {t.shape[1:]}")
    r = np.asarray(r, dtype=np.float64)
    if r.shape == (3, 3):
        r = np.broadcast_to(r, (n, 3, 3))
    if r.shape != (n, 3, 3):
        raise ValueError(f"rotation batch shape {r.shape} does not match {n} tensors")
    if order == 0:
        return t.copy()
    out = kernels.mode_rotate(t.reshape(n, DIM**order), r, order)
    return out.reshape(t.shape)


def rotate(t, r):
    """Induced action of rotation ``r`` on tensor ``t``: ``r`` applied along every index."""
    t = _check_tensor(t)
    r = check_rotation(r)
    if t.ndim == 0:
        return t.copy()
    return rotate_batch(t[None], r[None])[0]


def contract(t, a, b):
    """Sum over the paired 1-based axes ``a`` and ``b``; order drops by two."""
    t = _check_tensor(t)
    k = t.ndim
    if k < 2:
        raise ValueError("contraction needs a tensor of order >= 2")
    if a == b:
        raise ValueError("contraction axes must differ")
    if not (1 <= a <= k and 1 <= b <= k):
        raise ValueError(f"axes must lie in [1, {k}]")
    return np.trace(t, axis1=a - 1, axis2=b - 1)


def contract_batch(t, a, b):
    """:func:`contract` on every sample of a batch; axes are 1-based tensor axes."""
    t = np.asarray(t, dtype=np.float64)
    return np.trace(t, axis1=a, axis2=b)


def contract_to_order(t, target):
    """Contract the current first two axes repeatedly until ``order == target``."""
    t = _check_tensor(t)
    return contract_to_order_batch(t[None], target)[0]


def contract_to_order_batch(t, target):
    t = np.asarray(t, dtype=np.float64)
    k = t.ndim - 1
    if target not in (2, 3):
        raise ValueError("target order must be 2 or 3")
    if k < target or (k - target) % 2:
        raise ValueError(f"cannot contract order {k} down to order {target}")
    while t.ndim - 1 > target:
        t = np.trace(t, axis1=1, axis2=2)
    return t


def symmetrize(t):
    """Average of ``t`` over all permutations of its indices."""
    t = np.asarray(t, dtype=np.float64)
    return symmetrize_batch(t[None])[0]


def symmetrize_batch(t):
    t = np.asarray(t, dtype=np.float64)
    k = t.ndim - 1
    if k > MAX_SYMMETRIZE_ORDER:
        raise ValueError(f"symmetrize supports order <= {MAX_SYMMETRIZE_ORDER}")
    if k < 2:
        return t.copy()
    acc = np.zeros_like(t)
    for perm in permutations(range(1, k + 1)):
        acc += t.transpose((0,) + perm)
    return acc / factorial(k)


def is_symmetric(t, tol=1e-12):
    t = np.asarray(t, dtype=np.float64)
    scale = np.linalg.norm(t)
    k = t.ndim
    return all(
        np.max(np.abs(t.transpose(p) - t), initial=0.0) <= tol * max(scale, 1e-300)
        for p in permutations(range(k))
    )


def levi_civita():
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    return eps


def kronecker3():
    """Order-3 "identity": 1 where all three indices agree, else 0."""
    d = np.zeros((3, 3, 3))
    for i in range(3):
        d[i, i, i] = 1.0
    return d


def index_labels(name, order):
    if order == 0:
        return [name]
    return [f"{name}_{''.join(map(str, idx))}" for idx in np.ndindex(*(DIM,) * order)]


@dataclass(frozen=True)
class TupleLayout:
    """Flattening metadata for a tensor tuple: scalars first, then tensors row-major."""

    scalars: tuple = ()
    tensors: tuple = ()  # ((name, order), ...)
    anchor: str = ""

    def __post_init__(self):
        names = [n for n, _ in self.tensors]
        if self.anchor not in names:
            raise ValueError(f"anchor {self.anchor!r} is not one of the tensors {names}")

    @property
    def size(self):
        return len(self.scalars) + sum(DIM**k for _, k in self.tensors)

    def column_names(self):
        cols = list(self.scalars)
        for name, k in self.tensors:
            cols += index_labels(name, k)
        return cols

    def split(self, features):
        """Features ``(n, size)`` -> (scalars ``(n, n_scalars)``, {name: ``(n, 3, ..)``})."""
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.size:
            raise ValueError(f"expected features of shape (n, {self.size}), got {x.shape}")
        n = x.shape[0]
        ns = len(self.scalars)
        tensors = {}
        pos = ns
        for name, k in self.tensors:
            width = DIM**k
            tensors[name] = x[:, pos:pos + width].reshape((n,) + (DIM,) * k)
            pos += width
        return x[:, :ns], tensors

    def join(self, scalars, tensors):
        scalars = np.asarray(scalars, dtype=np.float64)
        n = scalars.shape[0]
        parts = [scalars.reshape(n, len(self.scalars))]
        for name, _ in self.tensors:
            parts.append(np.asarray(tensors[name], dtype=np.float64).reshape(n, -1))
        return np.concatenate(parts, axis=1)

    def to_dict(self):
        return {
            "scalars": list(self.scalars),
            "tensors": [[n, k] for n, k in self.tensors],
            "anchor": self.anchor,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            scalars=tuple(d["scalars"]),
            tensors=tuple((n, int(k)) for n, k in d["tensors"]),
            anchor=d["anchor"],
        )


@dataclass(frozen=True)
class TensorTuple:
    """Named scalars and tensors of one sample; ``anchor`` names the frame-defining tensor."""

    scalars: dict = field(default_factory=dict)
    tensors: dict = field(default_factory=dict)
    anchor: str = ""

    def __post_init__(self):
        if self.anchor not in self.tensors:
            raise ValueError(f"anchor {self.anchor!r} is not one of the tensors")
        for name, t in self.tensors.items():
            if any(s != DIM for s in np.shape(t)):
                raise ValueError(f"tensor {name!r} must have dim {DIM}")

    def __getitem__(self, name):
        if name in self.tensors:
            return self.tensors[name]
        return self.scalars[name]

    @property
    def layout(self):
        return TupleLayout(
            scalars=tuple(self.scalars),
            tensors=tuple((n, np.ndim(t)) for n, t in self.tensors.items()),
            anchor=self.anchor,
        )

    def rotated(self, r):
        return TensorTuple(
            dict(self.scalars), {n: rotate(t, r) for n, t in self.tensors.items()}, self.anchor
        )


def flatten(tup):
    parts = [np.asarray(list(tup.scalars.values()), dtype=np.float64)]
    parts += [np.asarray(t, dtype=np.float64).ravel() for t in tup.tensors.values()]
    return np.concatenate(parts)


def unflatten(vec, layout):
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1 or vec.size != layout.size:
        raise ValueError(f"vector of length {vec.size} does not match layout size {layout.size}")
    s, t = layout.split(vec[None])
    scalars = {name: float(s[0, i]) for i, name in enumerate(layout.scalars)}
    tensors = {name: t[name][0].copy() for name, _ in layout.tensors}
    return TensorTuple(scalars, tensors, layout.anchor)
