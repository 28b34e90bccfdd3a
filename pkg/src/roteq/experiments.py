"""Experiment orchestration: the three arms per (case, kernel, N, seed)."""

import logging
import os
import time

from . import predictors
from .cases import build_rotation_eval, generate
from .config import SCHEMA_VERSION, config_hash
from .evaluate import (
    EvalReport, error_reduction, mse, read_reports, read_timings, rotation_data_error,
    rotation_model_error, write_curves, write_reports, write_timings,
)
from .pipeline import ARMS, BaselineModel, RotEqModel, StandardOnlyModel, standardize_rows

logger = logging.getLogger(__name__)


def row_key(cfg, case, model, n, seed, arm):
    kernel = cfg.kernel_config(model, seed)
    key = {
        "schema_version": SCHEMA_VERSION,
        "case": case,
        "model": model,
        "arm": arm,
        "N": n,
        "seed": seed,
        "case_params": cfg.case_params(case),
        "kernel": {k: list(v) if isinstance(v, tuple) else v for k, v in vars(kernel).items()},
        "rotation_count": cfg.rotation_count,
    }
    return config_hash(key)


def run_group(cfg, case, model, n, seed):
    """Train and score all three arms on one dataset; returns reports in ``ARMS`` order."""
    params = cfg.case_params(case)
    kcfg = cfg.kernel_config(model, seed)
    ds = generate(case, n, seed, **params)
    x_tr, y_tr = ds.subset("train")
    x_te, y_te = ds.subset("test")
    evalset = build_rotation_eval(case, seed, count=cfg.rotation_count, **params)

    t0 = time.perf_counter()
    baseline = BaselineModel(case, predictors.fit(x_tr, y_tr, kcfg))
    t_base = time.perf_counter() - t0

    t0 = time.perf_counter()
    xs_tr, ys_tr, _ = standardize_rows(case, x_tr, y_tr)
    kernel = predictors.fit(xs_tr, ys_tr, kcfg)
    roteq = RotEqModel(case, kernel)
    t_roteq = time.perf_counter() - t0
    standard = StandardOnlyModel(case, kernel)
    xs_te, ys_te, _ = standardize_rows(case, x_te, y_te)

    def report(arm, model_obj, train_e, test_e, equivariance, wall):
        e_d = e_m = float("nan")
        if equivariance:
            e_d = rotation_data_error(model_obj, evalset)
            e_m = rotation_model_error(model_obj, evalset)
        return EvalReport(
            row_id=row_key(cfg, case, model, n, seed, arm), case=case, model=model, arm=arm,
            N=n, N_train=len(ds.train), seed=seed, train_E=train_e, test_E=test_e,
            E_D=e_d, E_M=e_m, wall_time_s=wall,
        )

    base_r = report("baseline", baseline, mse(baseline, x_tr, y_tr), mse(baseline, x_te, y_te), True, t_base)
    roteq_r = report("roteqnet", roteq, mse(roteq, x_tr, y_tr), mse(roteq, x_te, y_te), True, t_roteq)
    std_r = report(
        "standard_only", standard, mse(standard, xs_tr, ys_tr), mse(standard, xs_te, ys_te), False, t_roteq
    )
    for r in (roteq_r, std_r):
        r.error_reduction_train = error_reduction(r.train_E, base_r.train_E)
        r.error_reduction_test = error_reduction(r.test_E, base_r.test_E)
    return [base_r, roteq_r, std_r]


def compare(cfg, case, model, n_list, seeds):
    reports = []
    for n in n_list:
        for seed in seeds:
            reports += run_group(cfg, case, model, n, seed)
    return reports


def plan(cfg):
    """Every (case, model, N, seed) group of the reproduce grid, in output order."""
    return [
        (case, model, n, seed)
        for case in cfg.cases
        for model in cfg.models
        for n in cfg.n_list
        for seed in cfg.seeds
    ]


def reproduce(cfg, out_dir, progress=None):
    """Run the grid, skipping groups whose rows already exist in ``report.csv``.

    After each group the report, curve and timing files are rewritten in plan
    order, so an interrupted run resumes without duplicating rows.
    Returns ``(reports, failures)``.
    """
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "report.csv")
    existing = {}
    if os.path.exists(report_path):
        existing = {r.row_id: r for r in read_reports(report_path)}
        timing_path = os.path.join(out_dir, "timings.csv")
        if os.path.exists(timing_path):
            for row_id, wall in read_timings(timing_path).items():
                if row_id in existing:
                    existing[row_id].wall_time_s = wall
    failures = []
    done = dict(existing)
    for case, model, n, seed in plan(cfg):
        keys = [row_key(cfg, case, model, n, seed, arm) for arm in ARMS]
        if all(k in done for k in keys):
            continue
        if progress:
            progress(f"{case} {model} N={n} seed={seed}")
        try:
            for r in run_group(cfg, case, model, n, seed):
                done[r.row_id] = r
        except Exception as exc:  # recorded per row, the run continues
            logger.exception("group %s/%s/N=%d/seed=%d failed", case, model, n, seed)
            failures.append((case, model, n, seed, repr(exc)))
            continue
        _write_all(cfg, done, out_dir)
    _write_all(cfg, done, out_dir)
    ordered = _ordered(cfg, done)
    if failures:
        with open(os.path.join(out_dir, "failures.csv"), "w") as fh:
            fh.write("case,model,N,seed,error\n")
            for f in failures:
                fh.write(",".join(str(v).replace(",", ";") for v in f) + "\n")
    return ordered, failures


def _ordered(cfg, done):
    out = []
    for case, model, n, seed in plan(cfg):
        for arm in ARMS:
            k = row_key(cfg, case, model, n, seed, arm)
            if k in done:
                out.append(done[k])
    return out


def _write_all(cfg, done, out_dir):
    ordered = _ordered(cfg, done)
    _atomic(write_reports, ordered, os.path.join(out_dir, "report.csv"))
    _atomic(write_curves, ordered, os.path.join(out_dir, "curves.csv"))
    _atomic(write_timings, ordered, os.path.join(out_dir, "timings.csv"))


def _atomic(writer, reports, path):
    tmp = path + ".tmp"
    writer(reports, tmp)
    os.replace(tmp, path)
