"""The three experiment arms wrapped around a kernel predictor.

* ``baseline``: kernel trained and queried on raw features.
* ``roteqnet``: inputs are standardized, the kernel predicts in the standard
  frame, and the prediction is rotated back, ``y = R(M(R^-1(X)))``.
* ``standard_only``: the same kernel, but trained and tested purely on
  standard-position data (no restore step).
"""

import numpy as np

from . import predictors
from .cases import get_case
from .standardize import restore_batch, standardize_batch, standardize_labels

ARMS = ("baseline", "roteqnet", "standard_only")


def standardize_rows(case, x, y=None):
    """Standardize feature rows (and optionally label rows) of a case.

    Returns ``(xs, ys, batch)``; ``ys`` is ``None`` when ``y`` is.
    """
    study = get_case(case)
    layout = study.layout
    scalars, tensors = layout.split(x)
    batch = standardize_batch(scalars, tensors, layout.anchor)
    xs = layout.join(batch.scalars, batch.tensors)
    ys = None
    if y is not None:
        y = np.asarray(y, dtype=np.float64)
        yt = y.reshape((len(y),) + (3,) * study.label_order)
        ys = standardize_labels(yt, batch).reshape(len(y), -1)
    return xs, ys, batch


class BaselineModel:
    arm = "baseline"

    def __init__(self, case, kernel):
        self.case = case
        self.kernel = kernel

    def predict(self, x):
        return self.kernel.predict(x)


class RotEqModel:
    """Equivariant wrapper: standardize, predict with the kernel, restore."""

    arm = "roteqnet"

    def __init__(self, case, kernel):
        self.case = case
        self.kernel = kernel

    def predict(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x2 = x[None] if single else x
        study = get_case(self.case)
        xs, _, batch = standardize_rows(self.case, x2)
        ys = self.kernel.predict(xs).reshape((len(x2),) + (3,) * study.label_order)
        out = restore_batch(ys, batch).reshape(len(x2), -1)
        return out[0] if single else out


class StandardOnlyModel:
    """Kernel queried directly on standard-position features."""

    arm = "standard_only"

    def __init__(self, case, kernel):
        self.case = case
        self.kernel = kernel

    def predict(self, xs):
        return self.kernel.predict(xs)


def fit_baseline(case, x, y, config):
    return BaselineModel(case, predictors.fit(x, y, config))


def fit_roteq(case, x, y, config):
    xs, ys, _ = standardize_rows(case, x, y)
    return RotEqModel(case, predictors.fit(xs, ys, config))


def fit_arm(arm, case, x, y, config):
    if arm == "baseline":
        return fit_baseline(case, x, y, config)
    if arm == "roteqnet":
        return fit_roteq(case, x, y, config)
    if arm == "standard_only":
        return StandardOnlyModel(case, fit_roteq(case, x, y, config).kernel)
    raise ValueError(f"unknown arm {arm!r}; choose from {ARMS}")


def wrap(arm, case, kernel):
    return {"baseline": BaselineModel, "roteqnet": RotEqModel, "standard_only": StandardOnlyModel}[arm](
        case, kernel
    )
