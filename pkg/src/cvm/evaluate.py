"""Accuracy metrics, evaluation-cost accounting, accuracy-vs-cost curves."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass

import numpy as np

from .compress import CostBudget, build_surrogate, lars_select
from .data import Dataset
from .gsv import CompressedModel, GsvConfig, optimize
from .svm import MultiClassModel, SvmModel, predict_label

__all__ = [
    "CurvePoint",
    "accuracy",
    "evaluation_cost",
    "build_curve",
    "curve_to_csv",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("n_sv", "cost", "acc_lars", "acc_cvm", "acc_full")


@dataclass(frozen=True)
class CurvePoint:
    """One budget on the accuracy-vs-cost trade-off curve."""

    n_sv: int
    cost: float
    acc_lars: float
    acc_cvm: float
    acc_full: float


def accuracy(model, ds: Dataset) -> float:
    """Fraction of correctly predicted labels."""
    if ds.n == 0:
        raise ValueError("empty dataset")
    return float(np.mean(predict_label(model, ds.X) == ds.y))


def evaluation_cost(model, budget: CostBudget | None = None) -> float:
    """Total test-time kernel cost n_sv * e (summed over one-vs-one pairs)."""
    e = budget.per_kernel_cost if budget is not None else 1.0
    if isinstance(model, MultiClassModel):
        return float(sum(m.n_sv for m in model.pairs) * e)
    return float(model.n_sv * e)


def build_curve(
    source: SvmModel,
    ds_test: Dataset,
    step: int,
    max_sv: int,
    cfg: GsvConfig = GsvConfig(),
    eig_floor: float = 1e-10,
    per_kernel_cost: float = 1.0,
) -> list[CurvePoint]:
    """LARS-SVM and CVM accuracies for budgets step, 2*step, ..., max_sv.

    The LARS path is computed once at length max_sv and truncated per
    budget; the gradient-SV optimizer runs fresh from each truncation.
    """
    if step < 1:
        raise ValueError("step must be >= 1")
    if max_sv > source.n_sv:
        raise ValueError(f"max_sv={max_sv} exceeds n_sv={source.n_sv}")
    acc_full = accuracy(source, ds_test)
    problem = build_surrogate(source, eig_floor=eig_floor)
    path = lars_select(problem, max_sv)
    points = []
    for m in range(step, max_sv + 1, step):
        if m > len(path):
            log.warning("curve stops at truncated path length %d", len(path))
            break
        idx = path.active_indices[:m]
        coefs = path.coefficients(m)[idx]
        lars_model = CompressedModel(
            support_vectors=source.support_vectors[idx],
            coef=coefs,
            bias=source.bias,
            kernel=source.kernel,
            class_pair=source.class_pair,
        )
        cvm_model = optimize(lars_model.support_vectors, lars_model.coef, source, cfg)
        points.append(
            CurvePoint(
                n_sv=m,
                cost=m * per_kernel_cost,
                acc_lars=accuracy(lars_model, ds_test),
                acc_cvm=accuracy(cvm_model, ds_test),
                acc_full=acc_full,
            )
        )
        log.info(
            "curve m=%d: lars=%.4f cvm=%.4f full=%.4f",
            m, points[-1].acc_lars, points[-1].acc_cvm, acc_full,
        )
    return points


def curve_to_csv(points: list[CurvePoint]) -> str:
    """Render curve points as CSV (fixed column order, '.' decimal point)."""
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for p in points:
        buf.write(f"{p.n_sv},{p.cost!r},{p.acc_lars!r},{p.acc_cvm!r},{p.acc_full!r}\n")
    return buf.getvalue()
