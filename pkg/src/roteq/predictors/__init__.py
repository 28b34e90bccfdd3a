"""Kernel predictors behind a common ``fit`` / ``predict`` surface."""

import numpy as np

from .forest import ForestConfig, RandomForestRegressor
from .io import ModelFormatError, load, save
from .mlp import MLPRegressor, MlpConfig


def fit(x, y, config):
    """Train a kernel model on feature rows ``x`` and label rows ``y``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("training set is empty or not a 2-d array")
    if y.ndim == 1:
        y = y[:, None]
    if len(y) != len(x):
        raise ValueError("feature and label counts differ")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("training data has non-finite entries")
    if isinstance(config, MlpConfig):
        model = MLPRegressor((x.shape[1], *config.hidden_sizes, y.shape[1]))
    elif isinstance(config, ForestConfig):
        model = RandomForestRegressor(x.shape[1], y.shape[1])
    else:
        raise TypeError(f"unknown config type {type(config).__name__}")
    return model.fit(x, y, config)


def predict(model, x):
    return model.predict(x)


__all__ = [
    "ForestConfig", "MLPRegressor", "MlpConfig", "ModelFormatError",
    "RandomForestRegressor", "fit", "load", "predict", "save",
]
