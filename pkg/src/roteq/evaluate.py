"""Error functionals and report records.

All errors are means over samples of the squared 2-norm of the flattened
residual, so a 9-component label with unit error in every slot scores 9.
"""

import csv
import math
from dataclasses import dataclass, fields

import numpy as np


def _as_predict(model):
    return model.predict if hasattr(model, "predict") else model


def squared_errors(pred, y):
    r = np.asarray(pred, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    r = r.reshape(len(r), -1)
    return np.einsum("ij,ij->i", r, r)


def mse(model, x, y):
    """``E = (1/N) sum_i ||y_i - M(x_i)||^2``."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("cannot evaluate on an empty slice")
    return float(squared_errors(_as_predict(model)(x), y).mean())


def rotation_data_error(model, evalset):
    """Error of predictions on rotated inputs against rotated ground truth."""
    pred = _as_predict(model)(evalset.rotated_features())
    return float(squared_errors(pred, evalset.rotated_labels()).mean())


def rotated_predictions(model, evalset):
    """``R_i(M(X_0))`` for every rotation in the set."""
    from .cases import get_case
    from .tensor import rotate_batch

    study = get_case(evalset.case)
    base = _as_predict(model)(evalset.base_features())
    base = np.asarray(base).reshape((1,) + (3,) * study.label_order)
    n = len(evalset)
    return rotate_batch(np.repeat(base, n, axis=0), evalset.rotations).reshape(n, -1)


def rotation_model_error(model, evalset):
    """Self-consistency of a model under rotation: ``mean ||M(R_i X_0) - R_i M(X_0)||^2``."""
    pred = _as_predict(model)(evalset.rotated_features())
    return float(squared_errors(pred, rotated_predictions(model, evalset)).mean())


def error_reduction(e_model, e_baseline):
    """Percent reduction relative to the baseline, ``100 (1 - e_model / e_baseline)``."""
    if e_model is None or e_baseline is None or not e_baseline or math.isnan(e_model):
        return float("nan")
    return 100.0 * (1.0 - e_model / e_baseline)


@dataclass
class EvalReport:
    row_id: str
    case: str
    model: str
    arm: str
    N: int
    N_train: int
    seed: int
    train_E: float
    test_E: float
    E_D: float = float("nan")
    E_M: float = float("nan")
    error_reduction_train: float = float("nan")
    error_reduction_test: float = float("nan")
    wall_time_s: float = float("nan")


# wall time is non-deterministic, so it goes to a separate timings file
REPORT_COLUMNS = [f.name for f in fields(EvalReport) if f.name != "wall_time_s"]
TIMING_COLUMNS = ["row_id", "wall_time_s"]
CURVE_COLUMNS = ["case", "model", "arm", "N", "seed", "split", "E"]
_INT_COLUMNS = {"N", "N_train", "seed"}
_STR_COLUMNS = {"row_id", "case", "model", "arm", "split"}


def format_value(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def parse_value(name, text):
    if name in _STR_COLUMNS:
        return text
    if name in _INT_COLUMNS:
        return int(text)
    return float("nan") if text == "" else float(text)


def write_reports(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow([format_value(getattr(r, c)) for c in REPORT_COLUMNS])


def read_reports(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [EvalReport(**{k: parse_value(k, v) for k, v in row.items()}) for row in rows]


def write_timings(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_COLUMNS)
        for r in reports:
            w.writerow([r.row_id, format_value(r.wall_time_s)])


def read_timings(path):
    with open(path, newline="") as fh:
        return {row["row_id"]: parse_value("wall_time_s", row["wall_time_s"]) for row in csv.DictReader(fh)}


def curve_rows(reports):
    for r in reports:
        for split, e in (("train", r.train_E), ("test", r.test_E)):
            yield [r.case, r.model, r.arm, r.N, r.seed, split, e]


def write_curves(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for row in curve_rows(reports):
            w.writerow([format_value(v) for v in row])
