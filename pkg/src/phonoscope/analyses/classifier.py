"""Leave-one-dataset-out nearest-centroid aetiology classifier."""

from __future__ import annotations

import numpy as np

from ..corpus import MAIN_GROUPS
from ..errors import ClassAbsentFromAllTraining, SingleDataset
from ..profiles import CONSONANT5
from ..report import AnalysisReport, Grid
from ..table import ProfileTable


def centroid_classifier_lodo(
    table: ProfileTable,
    *,
    features: tuple[str, ...] = CONSONANT5,
    groups: tuple[str, ...] = MAIN_GROUPS,
    seed: int = 0,
) -> AnalysisReport:
    """Nearest-centroid classification with each dataset held out in turn.

    Rows must be complete on *features*. Per fold, features are z-scored
    with training statistics, class centroids are training means, and
    prediction is the nearest centroid by Euclidean distance with ties
    broken by lexicographic class name. Pooled out-of-fold predictions give
    overall accuracy, balanced accuracy (mean per-class recall) and macro F1.
    """
    rows = [
        r
        for r in table.rows
        if r.meta.aetiology in groups and all(r.get(f) is not None for f in features)
    ]
    classes = sorted({r.meta.aetiology for r in rows})
    dropped = sorted(set(groups) - set(classes))
    report = AnalysisReport(
        analysis_id="centroid_classifier_lodo",
        parameters={"features": list(features), "groups": list(groups)},
        seed=seed,
    )
    if dropped:
        report.findings.append(f"classes with no complete-case rows dropped: {dropped}")
    if len(classes) < 2:
        raise ClassAbsentFromAllTraining(
            f"need >= 2 classes with complete-case rows, have {classes} (absent: {dropped})"
        )
    datasets = sorted({r.meta.dataset for r in rows})
    if len(datasets) < 2:
        raise SingleDataset(f"need >= 2 datasets, got {datasets}")

    X = np.asarray([[r.get(f) for f in features] for r in rows], dtype=float)
    y = np.asarray([classes.index(r.meta.aetiology) for r in rows])
    ds = np.asarray([datasets.index(r.meta.dataset) for r in rows])

    truths: list[int] = []
    preds: list[int] = []
    fold_grid: dict[tuple[str, str], float | None] = {}
    for d_idx, dataset in enumerate(datasets):
        test_mask = ds == d_idx
        train_mask = ~test_mask
        if not test_mask.any() or not train_mask.any():
            report.findings.append(f"fold {dataset}: empty train or test, skipped")
            continue
        X_tr, y_tr = X[train_mask], y[train_mask]
        mu = X_tr.mean(axis=0)
        sd = X_tr.std(axis=0, ddof=1) if len(X_tr) > 1 else np.ones(X.shape[1])
        sd = np.where(sd < 1e-12, 1.0, sd)
        Z_tr = (X_tr - mu) / sd
        Z_te = (X[test_mask] - mu) / sd

        train_classes = sorted(set(y_tr.tolist()))
        centroids = np.stack([Z_tr[y_tr == c].mean(axis=0) for c in train_classes])
        dists = np.linalg.norm(Z_te[:, None, :] - centroids[None, :, :], axis=2)
        fold_pred = [train_classes[j] for j in dists.argmin(axis=1)]
        fold_truth = y[test_mask].tolist()
        truths.extend(fold_truth)
        preds.extend(fold_pred)
        fold_grid[(dataset, "n_test")] = float(len(fold_truth))
        fold_grid[(dataset, "accuracy")] = float(
            np.mean([t == p for t, p in zip(fold_truth, fold_pred)])
        )
        missing_in_train = sorted(set(fold_truth) - set(train_classes))
        if missing_in_train:
            report.findings.append(
                f"fold {dataset}: classes absent from training: "
                f"{[classes[c] for c in missing_in_train]}"
            )
    report.add_table("per_fold", Grid.from_dict(datasets, ["n_test", "accuracy"], fold_grid))

    truths_a = np.asarray(truths)
    preds_a = np.asarray(preds)
    n = len(truths_a)
    confusion = np.zeros((len(classes), len(classes)))
    for t, p in zip(truths_a, preds_a):
        confusion[t, p] += 1

    accuracy = float((truths_a == preds_a).mean()) if n else 0.0
    recalls: list[float] = []
    per_class: dict[tuple[str, str], float | None] = {}
    f1s: list[float] = []
    for c_idx, label in enumerate(classes):
        tp = float(confusion[c_idx, c_idx])
        n_truth = float(confusion[c_idx, :].sum())
        n_pred = float(confusion[:, c_idx].sum())
        precision = tp / n_pred if n_pred else None
        recall = tp / n_truth if n_truth else None
        if recall is not None:
            recalls.append(recall)
        if n_truth == 0 and n_pred == 0:
            f1 = 0.0
            report.findings.append(f"{label}: no truths and no predictions, F1 set to 0")
        elif 2 * tp + (n_pred - tp) + (n_truth - tp) == 0:
            f1 = 0.0
        else:
            f1 = 2 * tp / (2 * tp + (n_pred - tp) + (n_truth - tp))
        f1s.append(f1)
        per_class[(label, "precision")] = precision
        per_class[(label, "recall")] = recall
        per_class[(label, "f1")] = f1
        per_class[(label, "n_truth")] = n_truth
        per_class[(label, "n_pred")] = n_pred
    balanced = float(np.mean(recalls)) if recalls else 0.0
    macro_f1 = float(np.mean(f1s)) if f1s else 0.0

    report.add_table(
        "metrics",
        Grid(
            rows=["accuracy", "balanced_accuracy", "macro_f1", "n"],
            cols=["value"],
            values=[[accuracy], [balanced], [macro_f1], [float(n)]],
        ),
    )
    report.add_table(
        "per_class",
        Grid.from_dict(classes, ["precision", "recall", "f1", "n_truth", "n_pred"], per_class),
    )
    report.add_table(
        "confusion",
        Grid(rows=list(classes), cols=list(classes), values=confusion.tolist()),
    )
    return report
