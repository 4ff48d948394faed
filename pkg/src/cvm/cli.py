"""Command-line driver: train, grid, compress, eval, curve, synth.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
failure. Verbosity is controlled by the CVM_LOG environment variable
(error, info, debug).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import compress as compress_mod
from . import data as data_mod
from . import evaluate, gsv, model_io, svm
from .errors import DataFormatError, NumericalError
from .kernel import RbfKernel

log = logging.getLogger("cvm")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse's default exit code is 2; we use 1
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cvm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap (execution is currently sequential)")
        return p

    p = add("synth", help="generate the two-class circle benchmark")
    p.add_argument("--n", type=int, default=600)
    p.add_argument("--out", required=True)

    p = add("train", help="train an RBF SVM and write a model file")
    p.add_argument("--data", required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--model", required=True, help="output model path")
    p.add_argument("--standardize", action="store_true")

    p = add("grid", help="grid-search (C, sigma) on a validation split")
    p.add_argument("--data", required=True)
    p.add_argument("--c-grid", required=True, help="comma-separated C values")
    p.add_argument("--sigma-grid", required=True, help="comma-separated sigma values")
    p.add_argument("--val-frac", type=float, default=0.2)
    p.add_argument("--standardize", action="store_true")

    p = add("compress", help="compress a model to a support-vector budget")
    p.add_argument("--model", required=True, help="input model path")
    p.add_argument("--data", required=True, help="training data (LARS stage)")
    p.add_argument("--budget", type=int, help="support-vector count m")
    p.add_argument("--budget-cost", type=float, help="evaluation-cost budget")
    p.add_argument("--per-kernel-cost", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=2560)
    p.add_argument("--lars-only", action="store_true",
                   help="skip gradient-SV optimization")
    p.add_argument("--out", required=True, help="output model path")

    p = add("eval", help="report accuracy, n_sv and evaluation cost")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--per-kernel-cost", type=float, default=1.0)

    p = add("curve", help="accuracy-vs-cost curve CSV")
    p.add_argument("--model", required=True, help="full model path")
    p.add_argument("--data", required=True, help="training data")
    p.add_argument("--test", help="evaluation data (defaults to --data)")
    p.add_argument("--step", type=int, default=10)
    p.add_argument("--max-sv", type=int)
    p.add_argument("--iters", type=int, default=2560)
    p.add_argument("--per-kernel-cost", type=float, default=1.0)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--out", required=True, help="output CSV path")
    return parser


def _configure_logging():
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("CVM_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_dataset(path: str) -> data_mod.Dataset:
    try:
        return data_mod.parse_libsvm(Path(path).read_text())
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc


def _load_model(path: str):
    try:
        return model_io.read_model(Path(path).read_text())
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc


def _grid_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DataFormatError(f"bad grid value list {text!r}") from None


def _resolve_budget(args) -> int:
    if args.budget is not None:
        if args.budget_cost is not None:
            raise DataFormatError("give either --budget or --budget-cost, not both")
        if args.budget < 1:
            raise DataFormatError("--budget must be >= 1")
        return args.budget
    if args.budget_cost is not None:
        return compress_mod.CostBudget(args.per_kernel_cost, args.budget_cost).m
    raise DataFormatError("a budget is required (--budget or --budget-cost)")


def _compress_binary(model, m, iters, lars_only):
    svs, coefs, _path = compress_mod.select_support_vectors(model, m)
    cfg = gsv.GsvConfig(max_iters=0 if lars_only else iters)
    return gsv.optimize(svs, coefs, model, cfg)


def _cmd_synth(args):
    ds = data_mod.generate_circle_synthetic(args.n, args.seed)
    Path(args.out).write_text(data_mod.write_libsvm(ds))
    print(f"wrote {args.n} samples to {args.out}")


def _cmd_train(args):
    ds = _load_dataset(args.data)
    if args.standardize:
        ds, _, _, _ = data_mod.standardize(ds)
    cfg = svm.TrainConfig(c_param=args.c, kernel=RbfKernel(args.sigma))
    fit = svm.train if len(ds.classes) == 2 else svm.train_one_vs_one
    model = fit(ds, cfg)
    Path(args.model).write_text(model_io.write_model(model))
    n_sv = evaluate.evaluation_cost(model)
    print(f"trained on {ds.n} samples; {int(n_sv)} support vectors -> {args.model}")


def _cmd_grid(args):
    ds = _load_dataset(args.data)
    if args.standardize:
        ds, _, _, _ = data_mod.standardize(ds)
    spec = data_mod.SplitSpec(validation_fraction=args.val_frac, seed=args.seed)
    best_c, best_sigma, table = svm.grid_search(
        ds, _grid_values(args.c_grid), _grid_values(args.sigma_grid), spec
    )
    print("C,sigma,val_accuracy")
    for c, s, acc in table:
        print(f"{c!r},{s!r},{'failed' if acc is None else repr(acc)}")
    print(f"best: C={best_c!r} sigma={best_sigma!r}")


def _cmd_compress(args):
    model = _load_model(args.model)
    _load_dataset(args.data)  # validates the mandatory training-data input
    m = _resolve_budget(args)
    if isinstance(model, svm.MultiClassModel):
        pairs = [_compress_binary(pm, m, args.iters, args.lars_only)
                 for pm in model.pairs]
        out = svm.MultiClassModel(pairs=pairs, classes=model.classes)
    else:
        out = _compress_binary(model, m, args.iters, args.lars_only)
    Path(args.out).write_text(model_io.write_model(out))
    print(f"compressed to {m} support vectors per sub-model -> {args.out}")


def _cmd_eval(args):
    model = _load_model(args.model)
    ds = _load_dataset(args.data)
    acc = evaluate.accuracy(model, ds)
    n_sv = int(evaluate.evaluation_cost(model))
    cost = n_sv * args.per_kernel_cost
    print(f"accuracy {acc!r} n_sv {n_sv} cost {cost!r}")


def _cmd_curve(args):
    model = _load_model(args.model)
    if isinstance(model, svm.MultiClassModel):
        raise DataFormatError("curve supports binary models only")
    ds_train = _load_dataset(args.data)
    ds_test = _load_dataset(args.test) if args.test else ds_train
    if args.standardize:
        ds_train, rest, _, _ = data_mod.standardize(ds_train, [ds_test])
        ds_test = rest[0]
    max_sv = args.max_sv or model.n_sv
    points = evaluate.build_curve(
        model, ds_test, args.step, max_sv,
        cfg=gsv.GsvConfig(max_iters=args.iters),
        per_kernel_cost=args.per_kernel_cost,
    )
    Path(args.out).write_text(evaluate.curve_to_csv(points))
    print(f"wrote {len(points)} curve points to {args.out}")


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "grid": _cmd_grid,
    "compress": _cmd_compress,
    "eval": _cmd_eval,
    "curve": _cmd_curve,
}


def main(argv=None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
