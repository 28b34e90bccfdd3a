"""Command-line front end: ``roteq {generate,train,eval,equivariance,reproduce}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
Every RunConfig field can be set from a JSON config file (``--config``) and
overridden by the matching flag. ``ROTEQ_OUTPUT_DIR`` overrides the output
directory.
"""

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace

from . import predictors
from .cases import build_rotation_eval, export_csv, generate, read_dataset, write_dataset
from .config import FULL_N, load_config, resolve_output_dir
from .evaluate import EvalReport, error_reduction, mse, read_reports, rotation_data_error, rotation_model_error, write_reports
from .experiments import reproduce, row_key
from .pipeline import fit_arm, standardize_rows, wrap

logger = logging.getLogger("roteq")


class UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _int_list(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _str_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _add_config_flags(p):
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="JSON config file (missing keys take defaults)")
    g.add_argument("--case", choices=("newtonian", "les", "third_order", "electrostriction"))
    g.add_argument("--model", choices=("mlp", "forest"))
    g.add_argument("--arm", choices=("baseline", "roteqnet", "standard_only"))
    g.add_argument("--N", type=int, dest="N")
    g.add_argument("--seed", type=int)
    g.add_argument("--mu", type=float)
    g.add_argument("--third-order-identity", choices=("levi_civita", "kronecker"))
    g.add_argument("--rotation-count", type=int)
    g.add_argument("--output-dir")
    g.add_argument("--epochs", type=_positive_int, help="MLP epochs")
    g.add_argument("--hidden-sizes", type=_int_list, help="MLP hidden sizes, e.g. 512,4")
    g.add_argument("--learning-rate", type=float)
    g.add_argument("--batch-size", type=_positive_int)
    g.add_argument("--n-estimators", type=_positive_int)
    g.add_argument("--max-depth", type=_positive_int)


def _config(args):
    overrides = {
        k: getattr(args, k, None)
        for k in ("case", "model", "arm", "N", "seed", "mu", "rotation_count", "output_dir")
    }
    overrides["third_order_identity"] = getattr(args, "third_order_identity", None)
    try:
        cfg = load_config(args.config, **overrides)
        mlp = {k: getattr(args, k, None) for k in ("epochs", "hidden_sizes", "learning_rate", "batch_size")}
        mlp = {k: v for k, v in mlp.items() if v is not None}
        forest = {k: getattr(args, k, None) for k in ("n_estimators", "max_depth")}
        forest = {k: v for k, v in forest.items() if v is not None}
        if mlp:
            cfg = replace(cfg, mlp=replace(cfg.mlp, **mlp))
        if forest:
            cfg = replace(cfg, forest=replace(cfg.forest, **forest))
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(str(exc)) from None
    return cfg


def _out_dir(cfg):
    path = resolve_output_dir(cfg)
    os.makedirs(path, exist_ok=True)
    return path


def _append_reports(path, new):
    rows = read_reports(path) if os.path.exists(path) else []
    keep = {r.row_id for r in new}
    rows = [r for r in rows if r.row_id not in keep] + list(new)
    write_reports(rows, path)


def cmd_generate(args):
    cfg = _config(args)
    ds = generate(cfg.case, cfg.N, cfg.seed, **cfg.case_params())
    path = args.out or os.path.join(_out_dir(cfg), f"{cfg.case}_N{cfg.N}_seed{cfg.seed}.rtds")
    write_dataset(ds, path)
    if args.csv:
        export_csv(ds, args.csv)
    print(f"wrote {path}: case={ds.case} N={len(ds)} d_in={ds.features.shape[1]} "
          f"d_out={ds.labels.shape[1]} train={len(ds.train)} test={len(ds.test)}")
    return 0


def _sidecar(path):
    return path + ".json"


def cmd_train(args):
    cfg = _config(args)
    ds = read_dataset(args.dataset)
    cfg = replace(cfg, case=ds.case, N=len(ds))
    kcfg = cfg.kernel_config()
    x_tr, y_tr = ds.subset("train")
    x_te, y_te = ds.subset("test")
    t0 = time.perf_counter()
    model = fit_arm(cfg.arm, ds.case, x_tr, y_tr, kcfg)
    wall = time.perf_counter() - t0
    if cfg.arm == "standard_only":
        x_tr, y_tr, _ = standardize_rows(ds.case, x_tr, y_tr)
        x_te, y_te, _ = standardize_rows(ds.case, x_te, y_te)
    out_dir = _out_dir(cfg)
    path = args.out or os.path.join(out_dir, f"{ds.case}_{cfg.model}_{cfg.arm}_seed{cfg.seed}.rteq")
    predictors.save(model.kernel, path)
    meta = {"case": ds.case, "arm": cfg.arm, "model": cfg.model, "seed": cfg.seed,
            "params": ds.params, "N": len(ds)}
    with open(_sidecar(path), "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=1)
    report = EvalReport(
        row_id=row_key(cfg, ds.case, cfg.model, len(ds), cfg.seed, cfg.arm), case=ds.case,
        model=cfg.model, arm=cfg.arm, N=len(ds), N_train=len(ds.train), seed=cfg.seed,
        train_E=mse(model, x_tr, y_tr), test_E=mse(model, x_te, y_te), wall_time_s=wall,
    )
    _append_reports(os.path.join(out_dir, "report.csv"), [report])
    print(f"wrote {path}: arm={cfg.arm} train_E={report.train_E:.6g} test_E={report.test_E:.6g}")
    return 0


def _load_model(path):
    kernel = predictors.load(path)
    try:
        with open(_sidecar(path)) as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"missing model metadata {_sidecar(path)}") from None
    return wrap(meta["arm"], meta["case"], kernel), meta


def cmd_eval(args):
    model, meta = _load_model(args.model_file)
    ds = read_dataset(args.dataset)
    if ds.case != meta["case"]:
        raise UsageError(f"model was trained on {meta['case']!r}, dataset is {ds.case!r}")
    out = {}
    for split in ("train", "test"):
        x, y = ds.subset(split)
        if len(x) == 0:
            continue
        if meta["arm"] == "standard_only":
            x, y, _ = standardize_rows(ds.case, x, y)
        out[split] = mse(model, x, y)
    if args.baseline:
        base, _ = _load_model(args.baseline)
        for split in list(out):
            x, y = ds.subset(split)
            e = mse(base, x, y)
            out[f"reduction_{split}_pct"] = error_reduction(out[split], e)
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_equivariance(args):
    model, meta = _load_model(args.model_file)
    if meta["arm"] == "standard_only":
        raise UsageError("standard_only models act on standard-position inputs; evaluate the roteqnet arm")
    evalset = build_rotation_eval(meta["case"], args.seed, count=args.count, **meta["params"])
    e_d = rotation_data_error(model, evalset)
    e_m = rotation_model_error(model, evalset)
    print(json.dumps({"E_D": e_d, "E_M": e_m, "count": args.count}, sort_keys=True))
    if args.tol is not None and e_m > args.tol:
        print(f"E_M {e_m:.3g} exceeds {args.tol:.3g}", file=sys.stderr)
        return 1
    return 0


def cmd_reproduce(args):
    cfg = _config(args)
    grid = {}
    if args.full:
        grid = {"n_list": FULL_N, "models": ("mlp", "forest")}
    if args.n_list:
        grid["n_list"] = args.n_list
    if args.seeds:
        grid["seeds"] = args.seeds
    if args.cases:
        grid["cases"] = args.cases
    if args.models:
        grid["models"] = args.models
    try:
        cfg = replace(cfg, **grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out_dir = _out_dir(cfg)
    reports, failures = reproduce(cfg, out_dir, progress=lambda msg: logger.info("running %s", msg))
    print(f"{len(reports)} rows in {os.path.join(out_dir, 'report.csv')}; {len(failures)} failed groups")
    return 1 if failures else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="roteq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    _add_config_flags(p)
    p.add_argument("--out", help="dataset path (default: <output-dir>/<case>_N<N>_seed<seed>.rtds)")
    p.add_argument("--csv", help="also export the dataset as CSV")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="fit one arm on a dataset and save the kernel")
    _add_config_flags(p)
    p.add_argument("dataset")
    p.add_argument("--out", help="model path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="mean squared error of a saved model on a dataset")
    p.add_argument("model_file")
    p.add_argument("dataset")
    p.add_argument("--baseline", help="baseline model for the percent reduction")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("equivariance", help="E_D and E_M of a saved model under random rotations")
    p.add_argument("model_file")
    p.add_argument("--count", type=_positive_int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, help="exit 1 if E_M exceeds this")
    p.set_defaults(func=cmd_equivariance)

    p = sub.add_parser("reproduce", help="run the experiment grid (resumable)")
    _add_config_flags(p)
    p.add_argument("--full", action="store_true", help="N = 10000..100000 and both kernels")
    p.add_argument("--n-list", type=_int_list)
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--cases", type=_str_list)
    p.add_argument("--models", type=_str_list)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"roteq: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"roteq: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
