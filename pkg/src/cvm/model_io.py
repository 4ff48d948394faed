"""LibSVM-compatible model file reading and writing.

The on-disk kernel is exp(-gamma ||x-z||^2); our sigma maps via
gamma = 1/(2 sigma^2). rho stores the negated bias. Compressed models are
written in exactly the same layout as full models (drop-in replacement).

Multi-class files follow the one-vs-one layout: support vectors are pooled
per class (ascending label order), each carrying nr_class-1 coefficient
columns. Our per-pair compressed models have disjoint artificial support
vectors, so coefficients outside an SV's owning pair are written as zero;
this is valid format but inflates total_sv relative to a shared-SV file.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DataFormatError
from .gsv import CompressedModel
from .kernel import RbfKernel
from .svm import MultiClassModel, SvmModel

__all__ = ["write_model", "read_model"]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _sv_line(coefs, x) -> str:
    parts = [_fmt(c) for c in coefs]
    for j in np.nonzero(x)[0]:
        parts.append(f"{j + 1}:{_fmt(x[j])}")
    return " ".join(parts)


def write_model(model) -> str:
    """Serialize a model (full, compressed, or one-vs-one) to LibSVM text."""
    if isinstance(model, MultiClassModel):
        return _write_multiclass(model)
    return _write_binary(model)


def _write_binary(model) -> str:
    neg, pos = model.class_pair
    order = np.argsort(model.coef <= 0, kind="stable")  # positive coefs first
    coef = model.coef[order]
    sv = model.support_vectors[order]
    n_pos = int(np.sum(model.coef > 0))
    lines = [
        "svm_type c_svc",
        "kernel_type rbf",
        f"gamma {_fmt(model.kernel.gamma)}",
        "nr_class 2",
        f"total_sv {len(coef)}",
        f"rho {_fmt(-model.bias)}",
        f"label {pos} {neg}",
        f"nr_sv {n_pos} {len(coef) - n_pos}",
        "SV",
    ]
    for c, x in zip(coef, sv):
        lines.append(_sv_line([c], x))
    return "\n".join(lines) + "\n"


def _write_multiclass(model: MultiClassModel) -> str:
    classes = [int(c) for c in model.classes]
    k = len(classes)
    cls_pos = {c: i for i, c in enumerate(classes)}
    by_pair = {tuple(sorted(m.class_pair)): m for m in model.pairs}

    # pool SVs per class; each row: (feature vector, coef column vector)
    pooled: dict[int, list] = {c: [] for c in classes}
    rhos = {}
    for ci, cj in itertools.combinations(classes, 2):
        m = by_pair[(ci, cj)]
        # orient the decision so positive votes for ci (the earlier label)
        flip = -1.0 if m.class_pair[1] == cj else 1.0
        rhos[(ci, cj)] = -flip * m.bias
        for c, x in zip(m.coef, m.support_vectors):
            owner = m.class_pair[1] if c > 0 else m.class_pair[0]
            other = cj if owner == ci else ci
            col = cls_pos[other] - (1 if cls_pos[other] > cls_pos[owner] else 0)
            cols = np.zeros(k - 1)
            cols[col] = flip * c
            pooled[owner].append((x, cols))

    total = sum(len(v) for v in pooled.values())
    rho_vals = [rhos[(ci, cj)] for ci, cj in itertools.combinations(classes, 2)]
    lines = [
        "svm_type c_svc",
        "kernel_type rbf",
        f"gamma {_fmt(model.pairs[0].kernel.gamma)}",
        f"nr_class {k}",
        f"total_sv {total}",
        "rho " + " ".join(_fmt(r) for r in rho_vals),
        "label " + " ".join(str(c) for c in classes),
        "nr_sv " + " ".join(str(len(pooled[c])) for c in classes),
        "SV",
    ]
    for c in classes:
        for x, cols in pooled[c]:
            lines.append(_sv_line(cols, x))
    return "\n".join(lines) + "\n"


def read_model(text: str):
    """Parse LibSVM model text into SvmModel (binary) or MultiClassModel.

    Only svm_type c_svc with kernel_type rbf is supported.
    """
    header, sv_lines = _split_sections(text)
    if header.get("svm_type") != "c_svc":
        raise DataFormatError(f"unsupported svm_type {header.get('svm_type')!r}")
    if header.get("kernel_type") != "rbf":
        raise DataFormatError(f"unsupported kernel_type {header.get('kernel_type')!r}")
    try:
        gamma = float(header["gamma"])
        k = int(header["nr_class"])
        total_sv = int(header["total_sv"])
        rho = [float(v) for v in header["rho"].split()]
        labels = [int(v) for v in header["label"].split()]
        nr_sv = [int(v) for v in header["nr_sv"].split()]
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"bad model header: {exc}") from exc
    if len(labels) != k or len(nr_sv) != k or len(rho) != k * (k - 1) // 2:
        raise DataFormatError("header field lengths inconsistent with nr_class")
    if sum(nr_sv) != total_sv or len(sv_lines) != total_sv:
        raise DataFormatError(
            f"SV count mismatch: header {total_sv}, lines {len(sv_lines)}"
        )

    coefs = np.zeros((total_sv, k - 1))
    feats = []
    max_idx = 0
    for li, line in enumerate(sv_lines):
        tokens = line.split()
        try:
            coefs[li] = [float(t) for t in tokens[: k - 1]]
            pairs = []
            for tok in tokens[k - 1 :]:
                idx_s, val_s = tok.split(":", 1)
                pairs.append((int(idx_s), float(val_s)))
        except (ValueError, IndexError) as exc:
            raise DataFormatError(f"bad SV line {li + 1}: {exc}") from exc
        if pairs:
            max_idx = max(max_idx, max(i for i, _ in pairs))
        feats.append(pairs)
    X = np.zeros((total_sv, max_idx))
    for i, pairs in enumerate(feats):
        for idx, val in pairs:
            X[i, idx - 1] = val

    kernel = RbfKernel.from_gamma(gamma)
    starts = np.concatenate([[0], np.cumsum(nr_sv)])
    pair_models = []
    rho_iter = iter(rho)
    for i, j in itertools.combinations(range(k), 2):
        r = next(rho_iter)
        idx_i = np.arange(starts[i], starts[i + 1])
        idx_j = np.arange(starts[j], starts[j + 1])
        # for an SV of class i, the coefficient against class j sits in
        # column j-1 (since j > i); for class j against i, in column i
        c = np.concatenate([coefs[idx_i, j - 1], coefs[idx_j, i]])
        sv = np.vstack([X[idx_i], X[idx_j]]) if total_sv else X
        keep = c != 0.0
        if not keep.any():
            raise DataFormatError(
                f"pair ({labels[i]}, {labels[j]}) has no nonzero coefficients"
            )
        # decision = sum coef*K - rho, positive => labels[i]
        pair_models.append(
            SvmModel(
                support_vectors=sv[keep],
                coef=c[keep],
                bias=-r,
                kernel=kernel,
                class_pair=(labels[j], labels[i]),
            )
        )
    if k == 2:
        return pair_models[0]
    return MultiClassModel(pairs=pair_models, classes=np.sort(labels))


def _split_sections(text: str):
    header = {}
    lines = text.splitlines()
    sv_start = None
    for i, line in enumerate(lines):
        line = line.strip()
        if line == "SV":
            sv_start = i + 1
            break
        if not line:
            continue
        key, _, val = line.partition(" ")
        header[key] = val
    if sv_start is None:
        raise DataFormatError("missing SV section")
    sv_lines = [ln.strip() for ln in lines[sv_start:] if ln.strip()]
    return header, sv_lines
