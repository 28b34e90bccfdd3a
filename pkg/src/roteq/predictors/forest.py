from dataclasses import dataclass

import numpy as np

from .. import kernels


@dataclass(frozen=True)
class ForestConfig:
    n_estimators: int = 100
    max_depth: int = 3
    criterion: str = "squared_error"
    seed: int = 0
    subsample_fraction: float = 1.0
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_estimators < 1 or self.max_depth < 1:
            raise ValueError("n_estimators and max_depth must be >= 1")
        if not 0.0 < self.subsample_fraction <= 1.0:
            raise ValueError("subsample_fraction must lie in (0, 1]")
        if self.criterion != "squared_error":
            raise ValueError("only the squared_error criterion is supported")


@dataclass
class Tree:
    """Array-encoded binary tree; ``feature == -1`` marks a leaf.

    A sample goes left when ``x[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def n_internal(self):
        return int((self.feature >= 0).sum())

    def predict(self, x):
        node = np.zeros(len(x), dtype=np.int64)
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return self.value[node]
            rows = np.nonzero(inner)[0]
            go_left = x[rows, f[inner]] <= self.threshold[node[inner]]
            node[rows] = np.where(go_left, self.left[node[inner]], self.right[node[inner]])


def grow_tree(x, y, max_depth, order=None):
    """Grow one regression tree; ``order`` is an optional :func:`kernels.presort` of ``x``."""
    if order is None:
        order = kernels.presort(x)
    n = len(y)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        return len(feature) - 1

    root = np.arange(len(y))
    stack = [(new_node(root), root, 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= max_depth or len(idx) < 2:
            continue
        yn = y[idx]
        if np.all(yn == yn[0]):
            continue
        member = np.zeros(n, dtype=np.bool_)
        member[idx] = True
        f, t, gain = kernels.best_split_sorted(x, y, order, member)
        if f < 0 or gain <= 0.0:
            continue
        mask = x[idx, f] <= t
        li, ri = idx[mask], idx[~mask]
        feature[node] = f
        threshold[node] = t
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
    )


class RandomForestRegressor:
    """Bagged depth-limited regression trees, one ensemble per output column.

    Every output column reuses the same bootstrap draw for estimator ``e``,
    drawn from its own stream seeded by ``(seed, e)``.
    """

    kind = "forest"

    def __init__(self, input_dim, output_dim):
        self.input_dim = int(input_dim)
        self.output_dim = int(output_dim)
        self.trees = []  # trees[o][e]

    def fit(self, x, y, config):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).reshape(len(x), -1)
        n = len(x)
        size = max(1, int(round(config.subsample_fraction * n)))
        self.trees = [[] for _ in range(self.output_dim)]
        for e in range(config.n_estimators):
            rng = np.random.default_rng([config.seed, e])
            if config.bootstrap:
                s = rng.integers(0, n, size=size)
            else:
                s = np.sort(rng.permutation(n)[:size])
            xs = np.ascontiguousarray(x[s])
            order = kernels.presort(xs)  # shared by every output column
            for o in range(self.output_dim):
                self.trees[o].append(grow_tree(xs, np.ascontiguousarray(y[s, o]), config.max_depth, order))
        return self

    def tree_predictions(self, x):
        """Per-tree predictions, shape ``(n_estimators, n, output_dim)``."""
        x = np.asarray(x, dtype=np.float64)
        return np.stack(
            [np.stack([t.predict(x) for t in col], axis=0) for col in self.trees], axis=2
        )

    def predict(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x2 = x[None] if single else x
        if x2.ndim != 2 or x2.shape[1] != self.input_dim:
            raise ValueError(f"expected inputs of length {self.input_dim}, got shape {x.shape}")
        out = self.tree_predictions(x2).mean(axis=0)
        return out[0] if single else out
