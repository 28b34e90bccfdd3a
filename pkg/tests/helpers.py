import numpy as np

from roteq.linalg import random_rotations
from roteq.tensor import symmetrize_batch


def random_symmetric(rng, order, n=None):
    shape = (1 if n is None else n,) + (3,) * order
    t = symmetrize_batch(rng.standard_normal(shape))
    return t[0] if n is None else t


def rotations(seed, n):
    return random_rotations(np.random.default_rng(seed), n)


def brute_rotate(t, r):
    """Naive k-fold sum over all index tuples, independent of the mode-product path."""
    t = np.asarray(t)
    k = t.ndim
    out = np.zeros_like(t)
    for idx in np.ndindex(*t.shape):
        acc = 0.0
        for jdx in np.ndindex(*t.shape):
            term = t[jdx]
            for a in range(k):
                term *= r[idx[a], jdx[a]]
            acc += term
        out[idx] = acc
    return out
