"""End-to-end acceptance checks.

Each test prints a single "criterion N (...): PASS/FAIL" line so the suite
output doubles as an acceptance report. Expensive artifacts (trained
models, compression runs, trade-off curves) are built once in module
fixtures and shared.

The two tabular benchmarks are deterministic stand-ins with the public
Pageblocks/MAGIC train-test shapes (see cvm.benchmarks); their full-size
reference models are trained with the libsvm-backed SVC from scikit-learn.
"""

import math
import time

import numpy as np
import pytest
from sklearn.svm import SVC

from cvm.benchmarks import make_benchmark
from cvm.compress import LarsProblem, build_surrogate, lars_select, select_support_vectors, surrogate_objective
from cvm.data import Dataset, SplitSpec, generate_circle_synthetic
from cvm.evaluate import accuracy, build_curve
from cvm.gsv import CompressedModel, GsvConfig, cvm_grad, cvm_loss, optimize
from cvm.kernel import RbfKernel, rbf, rbf_grad_z
from cvm.model_io import read_model, write_model
from cvm.svm import SvmModel, TrainConfig, grid_search, predict_score, train

from test_model_io import FIXTURES


def report(num, name, ok):
    print(f"criterion {num} ({name}): {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {num} ({name}) failed"


def svc_to_model(svc) -> SvmModel:
    """View a fitted two-class SVC as our SvmModel (decision>0 -> classes_[1])."""
    return SvmModel(
        support_vectors=svc.support_vectors_,
        coef=svc.dual_coef_.ravel(),
        bias=float(svc.intercept_[0]),
        kernel=RbfKernel.from_gamma(svc._gamma),
        class_pair=(int(svc.classes_[0]), int(svc.classes_[1])),
    )


@pytest.fixture(scope="module")
def circle_run():
    """Full grid-searched circle pipeline plus its m=8 compression."""
    t0 = time.monotonic()
    ds = generate_circle_synthetic(600, 0)
    c, sigma, _ = grid_search(
        ds, [1.0, 10.0, 100.0], [0.5, 1.0, 2.0], SplitSpec(0.2, 7)
    )
    model = train(ds, TrainConfig(c_param=c, kernel=RbfKernel(sigma)))
    svs, coefs, _ = select_support_vectors(model, 8)
    lars_model = CompressedModel(svs, coefs, model.bias, model.kernel,
                                 model.class_pair)
    cm = optimize(svs, coefs, model,
                  GsvConfig(max_iters=2560, loss_rel_tol=0.0),
                  record_history=True)
    return {"ds": ds, "model": model, "lars": lars_model, "cvm": cm,
            "elapsed": time.monotonic() - t0}


@pytest.fixture(scope="module", params=["blocks", "telescope"])
def benchmark_run(request):
    """Full SVC model on a tabular stand-in, compressed to 10% of its SVs."""
    t0 = time.monotonic()
    ds_train, ds_test = make_benchmark(request.param)
    svc = SVC(C=100.0, gamma=RbfKernel(4.0).gamma, kernel="rbf").fit(
        ds_train.X, ds_train.y
    )
    full = svc_to_model(svc)
    budget = math.ceil(0.10 * full.n_sv)
    svs, coefs, _ = select_support_vectors(full, budget)
    cm = optimize(svs, coefs, full, GsvConfig(max_iters=2560),
                  record_history=True)
    return {"name": request.param, "test": ds_test, "full": full, "cvm": cm,
            "budget": budget, "elapsed": time.monotonic() - t0}


@pytest.fixture(scope="module")
def curves(circle_run):
    out = {}
    model, ds = circle_run["model"], circle_run["ds"]
    out["circle"] = build_curve(model, ds, step=10,
                                max_sv=min(100, model.n_sv))
    ds_train, ds_test = make_benchmark("blocks")
    svc = SVC(C=100.0, gamma=RbfKernel(4.0).gamma, kernel="rbf").fit(
        ds_train.X, ds_train.y
    )
    full = svc_to_model(svc)
    out["blocks"] = build_curve(full, ds_test, step=10,
                                max_sv=min(100, full.n_sv))
    return out


def test_criterion_1_synthetic_end_to_end(circle_run):
    model = circle_run["model"]
    g = np.linspace(-6.0, 6.0, 200)
    g1, g2 = np.meshgrid(g, g)
    grid = np.column_stack([g1.ravel(), g2.ravel()])
    full_sign = np.sign(predict_score(model, grid))
    agree_cvm = float(np.mean(np.sign(predict_score(circle_run["cvm"], grid))
                              == full_sign))
    agree_lars = float(np.mean(np.sign(predict_score(circle_run["lars"], grid))
                               == full_sign))
    ok = (
        40 <= model.n_sv <= 160
        and agree_cvm >= 0.97
        and agree_cvm > agree_lars
        and circle_run["elapsed"] < 120.0
    )
    print(f"  n_sv={model.n_sv} agree_cvm={agree_cvm:.4f} "
          f"agree_lars={agree_lars:.4f} elapsed={circle_run['elapsed']:.1f}s")
    report(1, "synthetic end-to-end, m=8", ok)


def test_criterion_2_ten_percent_accuracy(benchmark_run):
    r = benchmark_run
    acc_full = accuracy(r["full"], r["test"])
    acc_cvm = accuracy(r["cvm"], r["test"])
    ok = acc_cvm >= acc_full - 0.02 and r["elapsed"] < 1800.0
    print(f"  {r['name']}: n_sv={r['full'].n_sv} budget={r['budget']} "
          f"acc_full={acc_full:.4f} acc_cvm={acc_cvm:.4f} "
          f"elapsed={r['elapsed']:.1f}s")
    report(2, f"10% compression retention, {r['name']}", ok)


def test_criterion_3_dominates_lars(curves):
    ok = True
    for name, pts in curves.items():
        wins = sum(p.acc_cvm >= p.acc_lars for p in pts)
        frac = wins / len(pts)
        print(f"  {name}: cvm>=lars at {wins}/{len(pts)} budgets")
        ok = ok and frac >= 0.8
    report(3, "cvm >= lars at >= 80% of curve points", ok)


def test_criterion_4_gradient_oracles():
    t0 = time.monotonic()
    rng = np.random.default_rng(100)
    worst = 0.0
    for _ in range(50):
        n_sv = int(rng.integers(2, 21))
        m = int(rng.integers(1, 6))
        d = int(rng.integers(1, 5))
        p = RbfKernel(float(rng.uniform(0.7, 2.0)))
        anchors = rng.standard_normal((n_sv, d))
        target = p.matrix(anchors, anchors) @ rng.standard_normal(n_sv)
        svs = rng.standard_normal((m, d))
        alpha = rng.standard_normal(m)
        gs, ga = cvm_grad(svs, alpha, anchors, target, p)
        analytic = np.concatenate([gs.ravel(), ga])
        z0 = np.concatenate([svs.ravel(), alpha])
        h = 1e-5
        fd = np.empty_like(z0)
        for j in range(len(z0)):
            zp, zm = z0.copy(), z0.copy()
            zp[j] += h
            zm[j] -= h
            fd[j] = (
                cvm_loss(zp[: m * d].reshape(m, d), zp[m * d:], anchors, target, p)
                - cvm_loss(zm[: m * d].reshape(m, d), zm[m * d:], anchors, target, p)
            ) / (2 * h)
        worst = max(worst, np.abs(analytic - fd).max()
                    / (np.abs(analytic).max() + 1e-12))
        # kernel gradient w.r.t. the second argument
        x, z = rng.standard_normal((2, d))
        gk = rbf_grad_z(x, z, p)
        fdk = np.empty(d)
        for j in range(d):
            zp, zm = z.copy(), z.copy()
            zp[j] += h
            zm[j] -= h
            fdk[j] = (rbf(x, zp, p) - rbf(x, zm, p)) / (2 * h)
        worst = max(worst, np.abs(gk - fdk).max() / (np.abs(gk).max() + 1e-12))
    elapsed = time.monotonic() - t0
    ok = worst < 1e-4 and elapsed < 10.0
    print(f"  worst relative error {worst:.2e} in {elapsed:.1f}s")
    report(4, "gradients match finite differences", ok)


def _random_model(rng, n_sv=6, d=3):
    coef = rng.standard_normal(n_sv)
    coef[coef == 0] = 1.0
    return SvmModel(rng.standard_normal((n_sv, d)), coef,
                    float(rng.standard_normal()), RbfKernel(1.2))


def test_criterion_5_surrogate_equivalence():
    rng = np.random.default_rng(200)
    ok = True
    for _ in range(20):
        m = _random_model(rng)
        p = build_surrogate(m)
        y = m.sv_labels.astype(float)
        K = m.kernel.matrix(m.support_vectors, m.support_vectors)
        Khat = y[:, None] * K
        M = Khat.T @ Khat + K
        one_yb = 1.0 - y * m.bias

        def direct(a):
            return (one_yb @ one_yb - 2.0 * a @ (Khat.T @ one_yb) + a @ M @ a)

        a1, a2 = rng.standard_normal((2, m.n_sv))
        d_surr = surrogate_objective(p, a1) - surrogate_objective(p, a2)
        d_quad = direct(a1) - direct(a2)
        ok = ok and abs(d_surr - d_quad) <= 1e-8 * max(1.0, abs(d_quad))
        ok = ok and np.abs(p.omega.T @ p.omega - M).max() <= 1e-6 * np.abs(M).max()
    report(5, "surrogate objective equivalence", ok)


def test_criterion_6_lars_correctness():
    rng = np.random.default_rng(300)
    ok = True
    for _ in range(5):
        problem = build_surrogate(_random_model(rng, n_sv=10))
        path = lars_select(problem, problem.n_sv)
        for _, coef in path.steps:
            c = problem.omega.T @ (-problem.beta - problem.omega @ coef)
            active = coef != 0
            if not active.all():
                ok = ok and (np.abs(c[~active]).max()
                             <= np.abs(c[active]).min() + 1e-8)
            if active.sum() > 1:
                spread = np.abs(c[active]).max() - np.abs(c[active]).min()
                ok = ok and spread <= 1e-8 * max(1.0, np.abs(c[active]).max())
        a_ls = np.linalg.solve(problem.omega.T @ problem.omega,
                               -problem.omega.T @ problem.beta)
        ok = ok and np.abs(path.coefficients() - a_ls).max() <= 1e-6
    # orthonormal design: activation order is descending |correlation|
    n = 7
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    beta = rng.standard_normal(n)
    problem = LarsProblem(omega=q, beta=beta, eigvecs=np.eye(n),
                          eigvals=np.ones(n), fixed_bias=0.0,
                          sv_index_map=np.arange(n))
    order = lars_select(problem, n).active_indices
    ok = ok and np.array_equal(order, np.argsort(-np.abs(q.T @ (-beta))))
    report(6, "LARS equal-correlation/oracle/ordering", ok)


def test_criterion_7_pruning_invariance():
    rng = np.random.default_rng(400)
    worst = 0.0
    for _ in range(10):
        X = rng.standard_normal((40, 2))
        y = np.where(X[:, 0] + 0.3 * X[:, 1] > 0, 1, -1)
        cfg = TrainConfig(c_param=3.0, kernel=RbfKernel(1.5))
        m = train(Dataset(X, y), cfg)
        sv_labels = np.where(m.coef > 0, m.class_pair[1], m.class_pair[0])
        m2 = train(Dataset(m.support_vectors, sv_labels), cfg)
        probes = rng.standard_normal((100, 2))
        worst = max(worst, np.abs(predict_score(m, probes)
                                  - predict_score(m2, probes)).max())
    ok = worst <= 1e-6
    print(f"  worst prediction change {worst:.2e}")
    report(7, "pruning invariance", ok)


def test_criterion_8_format_interop(circle_run):
    text = (FIXTURES / "reference.model").read_text()
    fixpoint = write_model(read_model(text)) == text
    import json
    ref = json.loads((FIXTURES / "reference_decisions.json").read_text())
    scores = predict_score(read_model(text), np.asarray(ref["probes"]))
    decisions_match = np.abs(scores - np.asarray(ref["decisions"])).max() <= 1e-6
    own = write_model(circle_run["cvm"])
    own_fixpoint = write_model(read_model(own)) == own
    ok = fixpoint and decisions_match and own_fixpoint
    report(8, "model format interop", ok)


def test_criterion_9_monotonic_loss(circle_run, benchmark_run):
    ok = True
    for run in (circle_run["cvm"], benchmark_run["cvm"]):
        hist = run.provenance["loss_history"]
        ok = ok and all(b <= a + 1e-12 * max(1.0, a)
                        for a, b in zip(hist, hist[1:]))
        ok = ok and run.provenance["final_loss"] <= run.provenance["initial_loss"]
    report(9, "monotone nonincreasing gsv loss", ok)
