"""Squared-hinge kernel SVM training, prediction, and one-vs-one multi-class.

The binary trainer minimizes, over dual-style coefficients a and bias b,

    C * sum_i w_i * max(1 - y_i (K a + b)_i, 0)^2  +  a' K a

by damped Newton iterations. The objective is piecewise quadratic and
strongly convex, so Newton converges to machine precision once the set of
margin violators stabilizes. The learned model predicts with

    f(x) = sum_j coef_j K(sv_j, x) + b

where coef are the nonzero entries of a (signed: sign(coef_j) = y_j).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .data import Dataset, SplitSpec, split
from .errors import NumericalError
from .kernel import RbfKernel

__all__ = [
    "SvmModel",
    "MultiClassModel",
    "TrainConfig",
    "train",
    "predict_score",
    "predict_label",
    "train_one_vs_one",
    "grid_search",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SvmModel:
    """A trained binary kernel SVM.

    ``coef`` holds signed dual weights; a positive score predicts
    ``class_pair[1]``, otherwise ``class_pair[0]``.
    """

    support_vectors: np.ndarray
    coef: np.ndarray
    bias: float
    kernel: RbfKernel
    c_param: float | None = None
    class_pair: tuple[int, int] = (-1, 1)

    def __post_init__(self):
        sv = np.atleast_2d(np.asarray(self.support_vectors, dtype=np.float64))
        coef = np.asarray(self.coef, dtype=np.float64).ravel()
        if sv.shape[0] != coef.shape[0] or coef.shape[0] < 1:
            raise ValueError("need >= 1 support vector with matching coef")
        if not np.all(np.isfinite(coef)) or np.any(coef == 0.0):
            raise ValueError("coef must be finite and nonzero (pruned)")
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "coef", coef)

    @property
    def n_sv(self) -> int:
        return self.coef.shape[0]

    @property
    def sv_labels(self) -> np.ndarray:
        """Labels of the support vectors in {-1,+1}, recovered from coef signs."""
        return np.sign(self.coef).astype(np.int64)


@dataclass(frozen=True)
class MultiClassModel:
    """One-vs-one ensemble: one binary model per unordered class pair."""

    pairs: list
    classes: np.ndarray

    def __post_init__(self):
        classes = np.asarray(self.classes, dtype=np.int64)
        k = len(classes)
        got = {tuple(sorted(m.class_pair)) for m in self.pairs}
        want = {tuple(sorted(p)) for p in itertools.combinations(classes.tolist(), 2)}
        if got != want:
            raise ValueError("pairs must cover every unordered class pair exactly once")
        object.__setattr__(self, "classes", classes)


@dataclass(frozen=True)
class TrainConfig:
    c_param: float = 1.0
    kernel: RbfKernel = field(default_factory=lambda: RbfKernel(1.0))
    max_newton_iters: int = 200
    grad_tol: float = 1e-6
    alpha_prune_tol: float | None = None  # None -> 1e-8 * max|a|

    def __post_init__(self):
        if self.c_param <= 0:
            raise ValueError("c_param must be positive")
        if self.grad_tol <= 0 or self.max_newton_iters < 1:
            raise ValueError("grad_tol and max_newton_iters must be positive")


def _binary_targets(y: np.ndarray, class_pair: tuple[int, int]) -> np.ndarray:
    """Map the pair's labels to {-1,+1}; smaller label becomes -1."""
    neg, pos = class_pair
    t = np.where(y == pos, 1.0, -1.0)
    return t


def train(ds: Dataset, cfg: TrainConfig, sample_weight=None) -> SvmModel:
    """Fit a binary squared-hinge SVM by damped Newton.

    Raises NumericalError if the gradient norm does not reach
    ``cfg.grad_tol`` within ``cfg.max_newton_iters`` iterations.
    """
    classes = ds.classes
    if len(classes) != 2:
        raise ValueError(f"binary trainer needs exactly 2 classes, got {len(classes)}")
    class_pair = (int(classes[0]), int(classes[1]))
    y = _binary_targets(ds.y, class_pair)
    n = ds.n
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, float)
    C = cfg.c_param
    K = cfg.kernel.matrix(ds.X, ds.X)

    a = np.zeros(n)
    b = 0.0

    def objective(a, b):
        r = 1.0 - y * (K @ a + b)
        rp = np.maximum(r, 0.0)
        return C * (w * rp**2).sum() + a @ K @ a

    def gradient(a, b):
        r = 1.0 - y * (K @ a + b)
        rp = np.maximum(r, 0.0)
        ga = -2.0 * C * (K @ (y * w * rp)) + 2.0 * (K @ a)
        gb = -2.0 * C * (w * y * rp).sum()
        return np.concatenate([ga, [gb]]), r

    obj = objective(a, b)
    reg = 1e-10 * (1.0 + np.trace(K) / n)
    converged = False
    grad_norm = np.inf
    for it in range(cfg.max_newton_iters):
        g, r = gradient(a, b)
        grad_norm = np.linalg.norm(g)
        if grad_norm <= cfg.grad_tol:
            converged = True
            break
        active = r > 0
        KA = K[active]
        wA = w[active]
        H = np.empty((n + 1, n + 1))
        H[:n, :n] = 2.0 * C * (KA.T * wA) @ KA + 2.0 * K
        H[:n, n] = H[n, :n] = 2.0 * C * KA.T @ wA
        H[n, n] = 2.0 * C * wA.sum()
        H[np.diag_indices(n + 1)] += reg
        try:
            step = scipy.linalg.solve(H, -g, assume_a="sym")
        except scipy.linalg.LinAlgError as exc:
            raise NumericalError(f"Newton system solve failed: {exc}") from exc
        # backtracking line search on the exact objective
        t = 1.0
        gdot = g @ step
        for _ in range(60):
            a_new = a + t * step[:n]
            b_new = b + t * step[n]
            obj_new = objective(a_new, b_new)
            if obj_new <= obj + 1e-4 * t * gdot:
                break
            t *= 0.5
        else:
            raise NumericalError(
                f"line search failed at iteration {it}, |grad|={grad_norm:.3e}"
            )
        a, b, obj = a_new, b_new, obj_new
    if not converged:
        raise NumericalError(
            f"Newton did not converge in {cfg.max_newton_iters} iterations, "
            f"|grad|={grad_norm:.3e}"
        )
    a, b, obj = _polish(K, y, w, C, a, b, obj)
    log.debug("trained binary SVM: n=%d, obj=%.6g, |grad|=%.3e", n, obj, grad_norm)

    prune = cfg.alpha_prune_tol
    if prune is None:
        prune = 1e-8 * np.max(np.abs(a))
    keep = np.abs(a) > prune
    if not keep.any():
        raise NumericalError("all coefficients pruned to zero")
    return SvmModel(
        support_vectors=ds.X[keep],
        coef=a[keep],
        bias=float(b),
        kernel=cfg.kernel,
        c_param=C,
        class_pair=class_pair,
    )


def _polish(K, y, w, C, a, b, obj):
    """Snap the Newton iterate onto the exact face optimum.

    At the optimum a_i = C w_i y_i max(r_i, 0), so a is supported on the
    margin violators A. Ill-conditioning of K leaves numerical dust on the
    other coordinates; given the converged active set, the exact optimum
    solves the linear system

        (diag(1/(C w_A)) + K_AA) a_A + b 1 = y_A,    sum(a_A) = 0

    (stationarity in a and b). The polished point is adopted only if it
    does not increase the objective and keeps the same active set.
    """
    n = len(y)
    r = 1.0 - y * (K @ a + b)
    A = np.flatnonzero(r > 0)
    if A.size == 0:
        return a, b, obj
    k = A.size
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = K[np.ix_(A, A)]
    M[np.arange(k), np.arange(k)] += 1.0 / (C * w[A])
    M[:k, k] = M[k, :k] = 1.0
    rhs = np.concatenate([y[A], [0.0]])
    try:
        sol = scipy.linalg.solve(M, rhs, assume_a="sym")
    except scipy.linalg.LinAlgError:
        return a, b, obj
    a_pol = np.zeros(n)
    a_pol[A] = sol[:k]
    b_pol = sol[k]
    r_pol = 1.0 - y * (K @ a_pol + b_pol)
    rp = np.maximum(r_pol, 0.0)
    obj_pol = C * (w * rp**2).sum() + a_pol @ K @ a_pol
    same_face = np.array_equal(np.flatnonzero(r_pol > 0), A)
    if same_face and obj_pol <= obj + 1e-9 * (1.0 + abs(obj)):
        return a_pol, float(b_pol), obj_pol
    return a, b, obj


def predict_score(model, X) -> np.ndarray | float:
    """Decision values f(x) = sum_j coef_j K(sv_j, x) + bias.

    Works on any model exposing support_vectors/coef/bias/kernel
    (full or compressed).
    """
    x = np.asarray(X, dtype=np.float64)
    single = x.ndim == 1
    scores = model.kernel.matrix(np.atleast_2d(x), model.support_vectors) @ model.coef
    scores = scores + model.bias
    return float(scores[0]) if single else scores


def predict_label(model, X) -> np.ndarray | int:
    """Predicted class labels. Binary models map score sign through
    class_pair; one-vs-one ensembles vote (ties go to the smallest label)."""
    if isinstance(model, MultiClassModel):
        return _predict_votes(model, X)
    scores = np.atleast_1d(predict_score(model, X))
    neg, pos = model.class_pair
    out = np.where(scores > 0, pos, neg)
    return int(out[0]) if np.asarray(X).ndim == 1 else out


def _predict_votes(model: MultiClassModel, X) -> np.ndarray | int:
    x = np.asarray(X, dtype=np.float64)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    classes = model.classes
    cls_index = {int(c): i for i, c in enumerate(classes)}
    votes = np.zeros((x2.shape[0], len(classes)), dtype=np.int64)
    for m in model.pairs:
        pred = predict_label(m, x2)
        for lbl in m.class_pair:
            votes[pred == lbl, cls_index[lbl]] += 1
    # argmax on ascending classes: ties resolve to the smallest label
    winners = classes[np.argmax(votes, axis=1)]
    return int(winners[0]) if single else winners


def train_one_vs_one(ds: Dataset, cfg: TrainConfig) -> MultiClassModel:
    """Train one binary model per unordered class pair on that pair's samples."""
    classes = ds.classes
    if len(classes) < 2:
        raise ValueError("need >= 2 classes")
    models = []
    for ci, cj in itertools.combinations(classes.tolist(), 2):
        mask = (ds.y == ci) | (ds.y == cj)
        sub = ds.subset(mask)
        if len(sub.classes) != 2:
            raise ValueError(f"class pair ({ci}, {cj}) is missing a class")
        models.append(train(sub, cfg))
    return MultiClassModel(pairs=models, classes=classes)


def grid_search(
    ds: Dataset,
    c_grid,
    sigma_grid,
    spec: SplitSpec,
    cfg: TrainConfig | None = None,
):
    """Pick (C, sigma) maximizing validation accuracy on a held-out split.

    Returns (best_c, best_sigma, table) where table rows are
    (c, sigma, accuracy-or-None). Ties break toward smaller C, then smaller
    sigma; cells whose training fails are excluded from the argmax.
    """
    if len(c_grid) == 0 or len(sigma_grid) == 0:
        raise ValueError("grids must be nonempty")
    base = cfg or TrainConfig()
    tr, val = split(ds, spec)
    fit = train if len(ds.classes) == 2 else train_one_vs_one
    table = []
    best = None
    for c in sorted(c_grid):
        for sigma in sorted(sigma_grid):
            cell_cfg = replace(base, c_param=c, kernel=RbfKernel(sigma))
            try:
                model = fit(tr, cell_cfg)
            except (NumericalError, ValueError) as exc:
                log.warning("grid cell (C=%g, sigma=%g) failed: %s", c, sigma, exc)
                table.append((c, sigma, None))
                continue
            acc = float(np.mean(predict_label(model, val.X) == val.y))
            table.append((c, sigma, acc))
            if best is None or acc > best[2]:
                best = (c, sigma, acc)
    if best is None:
        raise NumericalError("every grid cell failed to train")
    return best[0], best[1], table
