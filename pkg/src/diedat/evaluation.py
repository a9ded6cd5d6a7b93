"""Confusion matrices, the metric suite, and report rendering.

Balanced accuracy is the unweighted mean of per-class recalls. Argmax ties
break toward the lower class index. Metrics with a zero denominator are
reported as 0 and flagged so reports never fail.
"""

from dataclasses import dataclass

import numpy as np

from diedat.corpus import MaskedSample, POS_NAMES, TARGET_NAMES
from diedat.errors import CapabilityError, ContractError


def confusion(predictions, truths, k: int) -> np.ndarray:
    """k x k count matrix indexed (true class, predicted class)."""
    predictions = np.asarray(predictions, dtype=np.int64)
    truths = np.asarray(truths, dtype=np.int64)
    if predictions.shape != truths.shape:
        raise ContractError(
            f"confusion: {len(predictions)} predictions vs {len(truths)} truths")
    if len(predictions) and (predictions.max() >= k or truths.max() >= k
                             or predictions.min() < 0 or truths.min() < 0):
        raise ContractError(f"confusion: labels outside [0, {k})")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (truths, predictions), 1)
    return cm


@dataclass
class ClassMetrics:
    name: str
    precision: float
    recall: float
    f1: float
    precision_defined: bool = True
    recall_defined: bool = True


@dataclass
class MetricsReport:
    accuracy: float
    balanced_accuracy: float
    per_class: list[ClassMetrics]
    total: int


def metrics(cm: np.ndarray, class_names=None) -> MetricsReport:
    """Accuracy, balanced accuracy and per-class precision/recall/F1."""
    total = int(cm.sum())
    if total == 0:
        raise ContractError("metrics: empty confusion matrix")
    k = cm.shape[0]
    names = list(class_names) if class_names is not None else [str(i) for i in range(k)]
    accuracy = float(np.trace(cm)) / total
    per_class = []
    recalls = []
    for c in range(k):
        tp = float(cm[c, c])
        row = float(cm[c].sum())
        col = float(cm[:, c].sum())
        recall_defined = row > 0
        precision_defined = col > 0
        recall = tp / row if recall_defined else 0.0
        precision = tp / col if precision_defined else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        recalls.append(recall)
        per_class.append(ClassMetrics(names[c], precision, recall, f1,
                                      precision_defined, recall_defined))
    return MetricsReport(accuracy=accuracy,
                         balanced_accuracy=float(np.mean(recalls)),
                         per_class=per_class, total=total)


def predict_labels(model, samples: list[MaskedSample], task: str):
    """Argmax predictions in eval mode; (labels, truths) for the given task."""
    preds = []
    truths = []
    for s in samples:
        if model.is_multitask:
            p_dd, p_pos, _ = model.forward(s.window_tokens)
            p = p_pos if task == "pos" else p_dd
        else:
            p, _ = model.forward(s.window_tokens)
        if task == "pos":
            if s.pos_label is None:
                continue
            truths.append(s.pos_label)
        else:
            truths.append(s.target_label)
        preds.append(int(np.argmax(p)))
    return preds, truths


def evaluate(model, samples: list[MaskedSample], task: str = "diedat") -> dict:
    """MetricsReport per requested task, keyed "diedat" and/or "pos"."""
    if task not in ("diedat", "pos", "both"):
        raise ContractError(f"unknown task {task!r}")
    if task in ("pos", "both") and not model.is_multitask:
        raise CapabilityError("this checkpoint has no POS head; task 'pos' is unavailable")
    out = {}
    if task in ("diedat", "both"):
        preds, truths = predict_labels(model, samples, "diedat")
        out["diedat"] = metrics(confusion(preds, truths, 2), TARGET_NAMES)
    if task in ("pos", "both"):
        preds, truths = predict_labels(model, samples, "pos")
        out["pos"] = metrics(confusion(preds, truths, 3), POS_NAMES)
    return out


def format_report(report: MetricsReport, title: str = "") -> str:
    """Aligned plain-text table, percentages with two decimals."""
    lines = []
    if title:
        lines.append(title)
    lines.append(f"Accuracy           {report.accuracy * 100:.2f}%")
    lines.append(f"Balanced accuracy  {report.balanced_accuracy * 100:.2f}%")
    lines.append(f"{'class':<6} {'precision':>10} {'recall':>10} {'f1':>10}")
    for c in report.per_class:
        note = "" if c.precision_defined and c.recall_defined else "  (undefined -> 0)"
        lines.append(f"{c.name:<6} {c.precision * 100:>9.2f}% {c.recall * 100:>9.2f}% "
                     f"{c.f1 * 100:>9.2f}%{note}")
    return "\n".join(lines)


def report_tsv(report: MetricsReport, task: str) -> str:
    """Machine-readable rows: task<TAB>metric<TAB>class-or-dash<TAB>value."""
    rows = [f"{task}\taccuracy\t-\t{report.accuracy:.6f}",
            f"{task}\tbalanced_accuracy\t-\t{report.balanced_accuracy:.6f}"]
    for c in report.per_class:
        rows.append(f"{task}\tprecision\t{c.name}\t{c.precision:.6f}")
        rows.append(f"{task}\trecall\t{c.name}\t{c.recall:.6f}")
        rows.append(f"{task}\tf1\t{c.name}\t{c.f1:.6f}")
    return "\n".join(rows)
