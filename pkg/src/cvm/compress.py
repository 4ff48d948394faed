"""LARS-based support-vector selection on a least-squares surrogate.

The trained model's squared-hinge objective, restricted to its support
vectors with the bias frozen, differs only by a constant from

    || Omega a + beta ||^2

where Omega'Omega = Khat'Khat + K (Khat is the label-signed kernel matrix
over the support vectors) and Omega'beta = -Khat'(1 - y b). Omega is
obtained from the eigendecomposition of the symmetric PSD matrix
Khat'Khat + K: Omega = sqrt(D) S'. Running least angle regression on this
surrogate for m steps activates m support vectors, giving the compressed
initialization ("LARS-SVM").
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .svm import SvmModel

__all__ = [
    "LarsProblem",
    "LarsPath",
    "CostBudget",
    "build_surrogate",
    "lars_select",
    "select_support_vectors",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LarsProblem:
    """Surrogate least-squares design for support-vector selection."""

    omega: np.ndarray      # (n_sv, n_sv)
    beta: np.ndarray       # (n_sv,)
    eigvecs: np.ndarray    # orthonormal columns, eigvals descending
    eigvals: np.ndarray    # floored, nonincreasing
    fixed_bias: float
    sv_index_map: np.ndarray

    @property
    def n_sv(self) -> int:
        return self.beta.shape[0]


@dataclass(frozen=True)
class LarsPath:
    """Ordered activations with a coefficient snapshot after every step.

    ``steps[t]`` is (activated index, coefficients with t+1 nonzeros).
    ``truncated`` marks an early stop on rank deficiency.
    """

    steps: list
    budget: int
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def active_indices(self) -> np.ndarray:
        return np.array([i for i, _ in self.steps], dtype=np.int64)

    def coefficients(self, m: int | None = None) -> np.ndarray:
        """Coefficient snapshot after step m (default: last)."""
        if m is None:
            m = len(self.steps)
        return self.steps[m - 1][1]


@dataclass(frozen=True)
class CostBudget:
    """Evaluation-cost budget. m = floor(budget / per_kernel_cost) kernels."""

    per_kernel_cost: float = 1.0
    budget: float = 1.0

    def __post_init__(self):
        if self.per_kernel_cost <= 0 or self.budget <= 0:
            raise ValueError("costs must be positive")
        if self.m < 1:
            raise ValueError("budget admits no support vector")

    @property
    def m(self) -> int:
        return int(math.floor(self.budget / self.per_kernel_cost))

    @classmethod
    def from_count(cls, m: int) -> "CostBudget":
        return cls(per_kernel_cost=1.0, budget=float(m))


def build_surrogate(
    model: SvmModel,
    sv_labels: np.ndarray | None = None,
    eig_floor: float = 1e-10,
) -> LarsProblem:
    """Form (Omega, beta) from a trained model's support vectors.

    ``sv_labels`` defaults to the signs of the model coefficients.
    ``eig_floor`` is relative: eigenvalues are floored at
    eig_floor * max(eigval) so sqrt and inverse-sqrt stay finite.
    """
    y = model.sv_labels if sv_labels is None else np.asarray(sv_labels, float)
    b = model.bias
    K = model.kernel.matrix(model.support_vectors, model.support_vectors)
    Khat = y[:, None] * K
    M = Khat.T @ Khat + K
    M = 0.5 * (M + M.T)
    try:
        eigvals, eigvecs = scipy.linalg.eigh(M)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    if eigvals.min() < -1e-6 * np.trace(M):
        raise NumericalError(
            f"surrogate matrix not PSD: min eigenvalue {eigvals.min():.3e}"
        )
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    floor = eig_floor * eigvals[0]
    eigvals = np.maximum(eigvals, floor)
    sqrt_d = np.sqrt(eigvals)
    omega = sqrt_d[:, None] * eigvecs.T
    rhs = -Khat.T @ (1.0 - y * b)
    beta = (eigvecs.T @ rhs) / sqrt_d
    return LarsProblem(
        omega=omega,
        beta=beta,
        eigvecs=eigvecs,
        eigvals=eigvals,
        fixed_bias=b,
        sv_index_map=np.arange(len(y)),
    )


def surrogate_objective(problem: LarsProblem, a: np.ndarray) -> float:
    """||Omega a + beta||^2 for a coefficient vector a."""
    r = problem.omega @ a + problem.beta
    return float(r @ r)


def lars_select(problem: LarsProblem, m: int) -> LarsPath:
    """Run least angle regression for m steps on the surrogate.

    Each step activates the coordinate whose correlation with the residual
    has the largest magnitude (ties to the lowest index), then moves along
    the equiangular direction of the active set until the next coordinate
    would join. The final step of a full-length path lands on the
    least-squares solution. Rank deficiency stops the path early and flags
    it truncated.
    """
    n = problem.n_sv
    if not 1 <= m <= n:
        raise ValueError(f"budget m={m} out of range [1, {n}]")
    X = problem.omega
    target = -problem.beta
    coef = np.zeros(n)
    active: list[int] = []
    inactive = np.ones(n, dtype=bool)
    steps = []
    truncated = False
    gram = X.T @ X

    for step in range(m):
        c = X.T @ (target - X @ coef)
        c_masked = np.where(inactive, np.abs(c), -np.inf)
        j = int(np.argmax(c_masked))  # argmax takes the lowest tied index
        active.append(j)
        inactive[j] = False
        s = np.sign(c[active])
        s[s == 0] = 1.0
        G = gram[np.ix_(active, active)] * np.outer(s, s)
        try:
            cho = scipy.linalg.cho_factor(G)
            w = scipy.linalg.cho_solve(cho, np.ones(len(active)))
        except scipy.linalg.LinAlgError:
            active.pop()
            truncated = True
            log.warning("LARS: rank-deficient active set at step %d, truncating", step)
            break
        wsum = w.sum()
        if wsum <= 0 or not np.isfinite(wsum):
            active.pop()
            truncated = True
            break
        aa = 1.0 / np.sqrt(wsum)
        w = aa * w
        u = (X[:, active] * s) @ w
        corr_u = X.T @ u
        cmax = float(np.abs(c[active[0]]))
        gamma_full = cmax / aa  # step to the active-set least-squares point
        gamma = gamma_full
        if inactive.any():
            cj = c[inactive]
            aj = corr_u[inactive]
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = np.concatenate(
                    [(cmax - cj) / (aa - aj), (cmax + cj) / (aa + aj)]
                )
            cand = cand[(cand > 1e-14) & np.isfinite(cand)]
            if cand.size:
                gamma = min(gamma_full, float(cand.min()))
        coef = coef.copy()
        coef[active] += gamma * w * s
        steps.append((j, coef.copy()))

    return LarsPath(steps=steps, budget=m, truncated=truncated)


def select_support_vectors(
    model: SvmModel,
    budget: CostBudget | int,
    eig_floor: float = 1e-10,
):
    """LARS-SVM: pick m of the model's support vectors with coefficients.

    Returns (selected support vectors, coefficients of length m, path).
    This is the initialization for the gradient-support-vector optimizer.
    """
    m = budget.m if isinstance(budget, CostBudget) else int(budget)
    if m > model.n_sv:
        raise ValueError(f"budget m={m} exceeds n_sv={model.n_sv}")
    problem = build_surrogate(model, eig_floor=eig_floor)
    path = lars_select(problem, m)
    idx = path.active_indices
    coefs = path.coefficients()[idx]
    return model.support_vectors[idx], coefs, path
