"""Stratified cross-validation and per-class / macro / micro metrics.

The macro row ("Category Average") is the unweighted mean of the per-class
precision, recall and F1 values, so its F1 is generally *not* the harmonic
mean of its precision and recall. The micro row ("Absolute Average") pools
counts; for single-label predictions all three micro values equal accuracy.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._seeding import derive_seed, keyed_rng
from .errors import StratificationError, StxError

__all__ = [
    "ClassRow",
    "ConfusionCounts",
    "MetricsReport",
    "CVResult",
    "f1_score",
    "confusion_counts",
    "aggregate_rows",
    "score",
    "mean_report",
    "stratified_kfold",
    "cross_validate",
    "grid_search",
    "category_size_curve",
    "CSV_HEADER",
]

CSV_HEADER = ["category", "precision", "recall", "f1", "support"]


def _safe_div(a: float, b: float) -> float:
    return a / b if b else 0.0


def f1_score(precision: float, recall: float) -> float:
    return _safe_div(2.0 * precision * recall, precision + recall)


@dataclass(frozen=True)
class ClassRow:
    category: str
    precision: float
    recall: float
    f1: float
    support: int

    def as_dict(self) -> dict:
        return {"category": self.category, "precision": self.precision,
                "recall": self.recall, "f1": self.f1, "support": self.support}


@dataclass
class ConfusionCounts:
    tp: dict
    fp: dict
    fn: dict
    total_samples: int

    @property
    def classes(self) -> list:
        return sorted(set(self.tp) | set(self.fp) | set(self.fn))


def confusion_counts(predictions: Sequence, truth: Sequence) -> ConfusionCounts:
    if len(predictions) != len(truth):
        raise ValueError(f"{len(predictions)} predictions for {len(truth)} labels")
    tp, fp, fn = Counter(), Counter(), Counter()
    for p, t in zip(predictions, truth):
        if p == t:
            tp[t] += 1
        else:
            fp[p] += 1
            fn[t] += 1
    classes = set(truth) | set(predictions)
    return ConfusionCounts(
        {c: tp[c] for c in classes}, {c: fp[c] for c in classes},
        {c: fn[c] for c in classes}, len(truth),
    )


def aggregate_rows(rows: Sequence[ClassRow]):
    """Macro and micro rows from per-class rows.

    Classes with zero support are left out of the macro mean. Micro
    precision/recall/F1 all equal the support-weighted recall, i.e. pooled
    true positives over total samples.
    """
    present = [r for r in rows if r.support > 0]
    total = sum(r.support for r in present)
    if present:
        macro = {
            "precision": float(np.mean([r.precision for r in present])),
            "recall": float(np.mean([r.recall for r in present])),
            "f1": float(np.mean([r.f1 for r in present])),
            "support": total,
        }
    else:
        macro = {"precision": 0.0, "recall": 0.0, "f1": 0.0, "support": 0}
    pooled = _safe_div(sum(r.recall * r.support for r in present), total)
    micro = {"precision": pooled, "recall": pooled, "f1": pooled, "support": total}
    return macro, micro


@dataclass
class MetricsReport:
    rows: list
    macro: dict
    micro: dict
    config: dict = field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows, config=None) -> "MetricsReport":
        rows = sorted(rows, key=lambda r: r.category)
        macro, micro = aggregate_rows(rows)
        return cls(rows, macro, micro, dict(config or {}))

    def row(self, category) -> ClassRow:
        for r in self.rows:
            if r.category == category:
                return r
        raise KeyError(category)

    def to_json(self) -> dict:
        return {
            "classes": [r.as_dict() for r in self.rows],
            "category_average": self.macro,
            "absolute_average": self.micro,
            "config": self.config,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.category, f"{r.precision:.4f}", f"{r.recall:.4f}", f"{r.f1:.4f}", r.support])
        for name, agg in (("Category Average", self.macro), ("Absolute Average", self.micro)):
            w.writerow([name, f"{agg['precision']:.4f}", f"{agg['recall']:.4f}",
                        f"{agg['f1']:.4f}", agg["support"]])
        return buf.getvalue()


def score(predictions: Sequence, truth: Sequence, config: dict | None = None) -> MetricsReport:
    """Per-class precision/recall/F1 plus macro and micro averages.

    Undefined ratios (zero denominators) are reported as 0. Classes that are
    predicted but absent from ``truth`` get a row with support 0 and do not
    enter the macro mean.
    """
    if not len(truth):
        raise ValueError("truth must be non-empty")
    cc = confusion_counts(predictions, truth)
    rows = []
    for c in cc.classes:
        tp, fp, fn = cc.tp[c], cc.fp[c], cc.fn[c]
        p = _safe_div(tp, tp + fp)
        r = _safe_div(tp, tp + fn)
        rows.append(ClassRow(c, p, r, f1_score(p, r), tp + fn))
    report = MetricsReport.from_rows(rows, config)
    # recompute micro from pooled counts so it does not lean on the recall identity
    tp = sum(cc.tp.values())
    p = _safe_div(tp, tp + sum(cc.fp.values()))
    r = _safe_div(tp, tp + sum(cc.fn.values()))
    report.micro = {"precision": p, "recall": r, "f1": f1_score(p, r), "support": cc.total_samples}
    return report


def mean_report(reports: Sequence[MetricsReport], config: dict | None = None) -> MetricsReport:
    """Average fold reports.

    Per-class values are averaged over the folds where the class has
    support; supports are summed. Macro and micro rows are the means of the
    fold-level macro and micro rows.
    """
    by_class = {}
    for rep in reports:
        for r in rep.rows:
            if r.support > 0:
                by_class.setdefault(r.category, []).append(r)
    rows = [
        ClassRow(c, float(np.mean([r.precision for r in rs])), float(np.mean([r.recall for r in rs])),
                 float(np.mean([r.f1 for r in rs])), sum(r.support for r in rs))
        for c, rs in sorted(by_class.items())
    ]
    total = sum(r.support for r in rows)

    def _mean(key):
        out = {m: float(np.mean([getattr(rep, key)[m] for rep in reports]))
               for m in ("precision", "recall", "f1")}
        out["support"] = total
        return out

    return MetricsReport(rows, _mean("macro"), _mean("micro"), dict(config or {}))


def category_size_curve(report: MetricsReport | None) -> list:
    """``(support, f1)`` pairs sorted by support (then category name)."""
    if report is None:
        return []
    rows = sorted(report.rows, key=lambda r: (r.support, r.category))
    return [(r.support, r.f1) for r in rows]


def stratified_kfold(labels: Sequence, k: int = 5, seed: int = 0) -> list:
    """Split indices into ``k`` stratified folds.

    Each class's indices are shuffled (RNG keyed on seed and class) and
    dealt round-robin; the dealing position carries over from one class to
    the next (classes in sorted order), which keeps fold sizes within one of
    each other as well as per-class counts.

    Raises
    ------
    StratificationError
        Some class has fewer than ``k`` members.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    by_class = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    for lab in sorted(by_class):
        if len(by_class[lab]) < k:
            raise StratificationError(lab, len(by_class[lab]), k)
    folds = [[] for _ in range(k)]
    pos = 0
    for lab in sorted(by_class):
        idx = by_class[lab]
        for j in keyed_rng("kfold", seed, lab).permutation(len(idx)):
            folds[pos % k].append(idx[j])
            pos += 1
    return [sorted(f) for f in folds]


@dataclass
class CVResult:
    folds: list
    mean: MetricsReport
    models: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"mean": self.mean.to_json(), "folds": [f.to_json() for f in self.folds]}


def cross_validate(config, documents: Sequence, k: int = 5, seed: int = 0,
                   hashtag_thesaurus=None, keep_models: bool = False) -> CVResult:
    """Stratified k-fold evaluation of a pipeline configuration.

    Everything learned (vocabulary, idf, feature mask, category thesaurus,
    model) is fit on the training folds only; held-out documents are used
    solely for transform and scoring.
    """
    from .pipeline import fit_pipeline

    documents = list(documents)
    labels = [d.label for d in documents]
    splits = stratified_kfold(labels, k, seed)
    reports, models = [], []
    for fi, test_idx in enumerate(splits):
        test_set = set(test_idx)
        train = [d for i, d in enumerate(documents) if i not in test_set]
        test = [documents[i] for i in test_idx]
        try:
            fitted = fit_pipeline(train, config, hashtag_thesaurus, fold_seed=derive_seed(seed, "fold", fi))
            pred = fitted.predict(test)
        except StxError as exc:
            exc.fold = fi
            exc.args = (f"fold {fi}: {exc}",)
            raise
        reports.append(score(pred, [d.label for d in test], {"fold": fi}))
        if keep_models:
            models.append(fitted)
    cfg = config.to_json() if hasattr(config, "to_json") else dict(config)
    cfg.update({"folds": k, "seed": seed})
    return CVResult(reports, mean_report(reports, cfg), models)


def grid_search(config, documents: Sequence, candidates, k: int = 5, seed: int = 0,
                hashtag_thesaurus=None):
    """Leakage-free grid search over the SVM's C via :func:`cross_validate`."""
    from dataclasses import replace

    from .learners import GridSearchResult, choose_C, dedupe_candidates

    cands = dedupe_candidates(candidates)
    means, per_fold = [], []
    for C in cands:
        res = cross_validate(replace(config, C=C), documents, k, seed, hashtag_thesaurus)
        per_fold.append([f.macro["f1"] for f in res.folds])
        means.append(res.mean.macro["f1"])
    return GridSearchResult(cands, means, choose_C(cands, means), per_fold)
