"""Gradient support vectors: joint CG refinement of positions and weights.

Starting from the LARS-SVM selection, the m support vectors' coordinates
and coefficients are optimized together to minimize the squared mismatch

    L = || K_m alpha_m - t ||^2,      t = K alpha  (no bias; it is frozen
                                       and identical on both sides)

between the compressed and full decision values at a set of anchor points
(by default the source model's support vectors). The optimizer is
Polak-Ribiere+ nonlinear conjugate gradient with periodic restarts; steps
are chosen by a strong Wolfe line search falling back to Armijo
backtracking, so the loss sequence never increases. Variables are
preconditioned by per-block RMS scaling since coordinates and
coefficients can differ by orders of magnitude.
"""

from __future__ import annotations

import hashlib
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
from scipy.optimize._linesearch import LineSearchWarning

from .errors import NumericalError
from .kernel import RbfKernel
from .svm import SvmModel, predict_score

__all__ = ["CompressedModel", "GsvConfig", "cvm_loss", "cvm_grad", "optimize", "to_model"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompressedModel:
    """m artificial support vectors with coefficients; predicts like SvmModel."""

    support_vectors: np.ndarray
    coef: np.ndarray
    bias: float
    kernel: RbfKernel
    class_pair: tuple[int, int] = (-1, 1)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        sv = np.atleast_2d(np.asarray(self.support_vectors, dtype=np.float64))
        coef = np.asarray(self.coef, dtype=np.float64).ravel()
        if sv.shape[0] != coef.shape[0] or coef.shape[0] < 1:
            raise ValueError("need >= 1 support vector with matching coef")
        if not (np.all(np.isfinite(sv)) and np.all(np.isfinite(coef))):
            raise ValueError("support vectors and coef must be finite")
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "coef", coef)

    @property
    def n_sv(self) -> int:
        return self.coef.shape[0]


@dataclass(frozen=True)
class GsvConfig:
    max_iters: int = 2560
    loss_rel_tol: float = 1e-10
    grad_tol: float | None = None      # None -> 1e-8 * (1 + initial loss)
    cg_restart_period: int | None = None  # None -> 10 * variable count
    armijo_c1: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 40

    def __post_init__(self):
        if not 0.0 < self.armijo_c1 < 1.0:
            raise ValueError("armijo_c1 must be in (0, 1)")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must be in (0, 1)")
        if self.max_iters < 0 or self.loss_rel_tol < 0:
            raise ValueError("max_iters and loss_rel_tol must be nonnegative")


def cvm_loss(svs, alpha_m, anchors, target, p: RbfKernel) -> float:
    """||K_m alpha_m - target||^2 with K_m[i, k] = K(anchor_i, sv_k)."""
    r = _residual(svs, alpha_m, anchors, target, p)[1]
    return float(r @ r)


def _residual(svs, alpha_m, anchors, target, p):
    svs = np.atleast_2d(np.asarray(svs, float))
    alpha_m = np.asarray(alpha_m, float).ravel()
    anchors = np.atleast_2d(np.asarray(anchors, float))
    target = np.asarray(target, float).ravel()
    if svs.shape[0] != alpha_m.shape[0]:
        raise ValueError("one coefficient per support vector required")
    if anchors.shape[0] != target.shape[0]:
        raise ValueError("one target value per anchor required")
    Km = p.matrix(anchors, svs)
    return Km, Km @ alpha_m - target


def cvm_grad(svs, alpha_m, anchors, target, p: RbfKernel):
    """Analytic gradients of cvm_loss w.r.t. SV positions and coefficients.

    grad_alpha = 2 K_m' r;  grad_svs[k] = 2 alpha_k sum_i r_i K_m[i,k]
    (anchor_i - sv_k) / sigma^2, with r = K_m alpha_m - target.
    """
    svs = np.atleast_2d(np.asarray(svs, float))
    anchors = np.atleast_2d(np.asarray(anchors, float))
    alpha_m = np.asarray(alpha_m, float).ravel()
    Km, r = _residual(svs, alpha_m, anchors, target, p)
    grad_alpha = 2.0 * Km.T @ r
    W = Km * r[:, None]                        # (n_anchor, m)
    colsum = W.sum(axis=0)                     # (m,)
    grad_svs = (W.T @ anchors - colsum[:, None] * svs)
    grad_svs *= 2.0 * alpha_m[:, None] / p.sigma**2
    return grad_svs, grad_alpha


def _guess_step(L, L_before, gdot) -> float:
    """Quadratic-interpolation initial step length (clamped to <= 1)."""
    if gdot == 0 or not np.isfinite(L_before):
        return 1.0
    t = 1.01 * 2.0 * (L - L_before) / gdot
    return float(min(1.0, t)) if t > 0 else 1.0


def _wolfe_step(loss, grad, z, direction, g, L, L_before, c1):
    """Strong Wolfe search along ``direction``; (None, None, None) on failure."""
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", LineSearchWarning)
        res = scipy.optimize.line_search(
            loss, grad, z, direction,
            gfk=g, old_fval=L, old_old_fval=L_before,
            c1=c1, c2=0.4, amax=1e10, maxiter=30,
        )
    t = res[0]
    if t is None:
        return None, None, None
    return t, res[3], res[5]


def optimize(
    init_svs,
    init_alpha,
    source: SvmModel,
    cfg: GsvConfig = GsvConfig(),
    anchors: np.ndarray | None = None,
    record_history: bool = False,
) -> CompressedModel:
    """Refine (support vectors, coefficients) by Polak-Ribiere+ CG.

    ``anchors`` defaults to the source model's support vectors; the target
    decision values are computed there once, without bias. Returns a
    CompressedModel whose loss is never above the initialization's;
    ``record_history`` additionally stores the per-iteration loss sequence
    in the provenance.
    """
    p = source.kernel
    if anchors is None:
        anchors = source.support_vectors
    anchors = np.atleast_2d(np.asarray(anchors, float))
    target = p.matrix(anchors, source.support_vectors) @ source.coef

    svs = np.atleast_2d(np.asarray(init_svs, float)).copy()
    alpha = np.asarray(init_alpha, float).ravel().copy()
    m, d = svs.shape
    nvar = m * d + m

    # per-block RMS preconditioning; z holds scaled variables
    sv_scale = max(float(np.sqrt(np.mean(svs**2))), 1e-12)
    al_scale = max(float(np.sqrt(np.mean(alpha**2))), 1e-12)
    scale = np.concatenate([np.full(m * d, sv_scale), np.full(m, al_scale)])

    def unpack(z):
        v = z * scale
        return v[: m * d].reshape(m, d), v[m * d :]

    def loss(z):
        s, a = unpack(z)
        return cvm_loss(s, a, anchors, target, p)

    def grad(z):
        s, a = unpack(z)
        gs, ga = cvm_grad(s, a, anchors, target, p)
        return np.concatenate([gs.ravel(), ga]) * scale

    z = np.concatenate([svs.ravel() / sv_scale, alpha / al_scale])
    L = loss(z)
    L0 = L
    grad_tol = cfg.grad_tol if cfg.grad_tol is not None else 1e-8 * (1.0 + L0)
    restart = cfg.cg_restart_period or 10 * nvar

    g = grad(z)
    direction = -g
    L_before = L + np.linalg.norm(g) / 2.0  # seeds the first step-length guess
    iterations = 0
    flagged = None
    history = [L]
    for it in range(cfg.max_iters):
        gnorm = np.linalg.norm(g)
        if gnorm <= grad_tol:
            break
        if not np.isfinite(L) or not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite loss or gradient at iteration {it}")
        gdot = g @ direction
        if gdot >= 0:  # not a descent direction: restart on steepest descent
            direction = -g
            gdot = g @ direction
        # strong Wolfe line search (its sufficient-decrease clause is the
        # Armijo condition, so accepted steps never increase the loss);
        # plain Armijo backtracking is the fallback when bracketing fails
        t, L_new, g_new = _wolfe_step(
            loss, grad, z, direction, g, L, L_before, cfg.armijo_c1
        )
        if t is None:
            t = _guess_step(L, L_before, gdot)
            accepted = False
            for _ in range(cfg.max_backtracks):
                L_new = loss(z + t * direction)
                if L_new <= L + cfg.armijo_c1 * t * gdot:
                    accepted = True
                    break
                t *= cfg.backtrack_factor
            if not accepted:
                flagged = f"line search failed at iteration {it}"
                log.warning("gsv: %s", flagged)
                break
            g_new = None
        z = z + t * direction
        if g_new is None:
            g_new = grad(z)
        L_before, L = L, L_new
        history.append(L)
        iterations = it + 1
        if (it + 1) % restart == 0:
            beta = 0.0
        else:
            beta = max(0.0, g_new @ (g_new - g) / (g @ g))  # Polak-Ribiere+
        direction = -g_new + beta * direction
        g = g_new
        if abs(L_before - L) <= cfg.loss_rel_tol * max(1.0, abs(L_before)):
            break

    if iterations > 0:  # unpack round-trips through the scaling; skip if untouched
        svs, alpha = unpack(z)
    digest = hashlib.sha256(
        np.ascontiguousarray(source.support_vectors).tobytes()
        + np.ascontiguousarray(source.coef).tobytes()
    ).hexdigest()[:16]
    provenance = {"source_digest": digest, "iterations": iterations,
                  "initial_loss": L0, "final_loss": L}
    if record_history:
        provenance["loss_history"] = history
    if flagged:
        provenance["flag"] = flagged
    log.info("gsv: %d iterations, loss %.6g -> %.6g", iterations, L0, L)
    return CompressedModel(
        support_vectors=svs,
        coef=alpha,
        bias=source.bias,
        kernel=p,
        class_pair=source.class_pair,
        provenance=provenance,
    )


def to_model(cm: CompressedModel) -> SvmModel:
    """View a compressed model as a plain SVM predictor."""
    coef = cm.coef.copy()
    sv = cm.support_vectors
    keep = coef != 0.0
    if not keep.all():  # SvmModel forbids exact-zero coefficients
        sv, coef = sv[keep], coef[keep]
    return SvmModel(
        support_vectors=sv,
        coef=coef,
        bias=cm.bias,
        kernel=cm.kernel,
        class_pair=cm.class_pair,
    )
