"""Multinomial naive Bayes and one-vs-rest linear classifiers.

The linear models minimize, per class ``c``::

    0.5 * ||w||^2 + C * sum_i cw(y_i) * loss(s_i * (w . x_i + b))

with ``s_i = +1`` for members of ``c`` and ``-1`` otherwise, hinge loss for
the SVM and log loss for logistic regression. ``cw`` is the class weight of
the sample's true class. The optimizer is plain stochastic subgradient
descent on the equivalent scaled objective ``lambda/2 ||w||^2 + mean(...)``
with ``lambda = 1 / (C n)`` and step ``1 / (lambda (t + t0))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._seeding import derive_seed
from .errors import DegenerateLabels, DivergedError, FormatError
from .features import SparseMatrix

__all__ = [
    "TrainedModel",
    "GridSearchResult",
    "train_nb",
    "train_linear",
    "predict",
    "decision_function",
    "objective",
    "objective_grad",
    "choose_C",
    "grid_search_C",
    "MODEL_MAGIC",
    "save_model",
    "load_model",
]

MODEL_MAGIC = "STXM1"
KINDS = ("nb", "logreg", "svm")
LOG_ZERO = -1e30
MAX_STEP = 0.1
DEFAULT_EPOCHS = 30


@dataclass
class TrainedModel:
    kind: str
    classes: list
    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)
    config: dict = field(default_factory=dict)
    feature_mask: list | None = None
    vocabulary: dict | None = None
    vocabulary_hash: str | None = None

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def to_json(self) -> dict:
        return {
            "magic": MODEL_MAGIC,
            "kind": self.kind,
            "classes": list(self.classes),
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "config": self.config,
            "feature_mask": None if self.feature_mask is None else [int(j) for j in self.feature_mask],
            "vocabulary": self.vocabulary,
            "vocabulary_hash": self.vocabulary_hash,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TrainedModel":
        if obj.get("magic") != MODEL_MAGIC:
            raise FormatError(f"not an {MODEL_MAGIC} model")
        return cls(
            kind=obj["kind"],
            classes=list(obj["classes"]),
            weights=np.asarray(obj["weights"], dtype=np.float64).reshape(len(obj["classes"]), -1),
            bias=np.asarray(obj["bias"], dtype=np.float64),
            config=obj.get("config", {}),
            feature_mask=obj.get("feature_mask"),
            vocabulary=obj.get("vocabulary"),
            vocabulary_hash=obj.get("vocabulary_hash"),
        )


def save_model(path, model: TrainedModel, extra: dict | None = None) -> None:
    obj = model.to_json()
    if extra:
        obj.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True)


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return TrainedModel.from_json(json.load(fh))


def _classes(y) -> list:
    classes = sorted(set(y))
    if len(classes) < 2:
        raise DegenerateLabels(f"need at least two classes, got {classes}")
    return classes


def train_nb(X: SparseMatrix, y: Sequence, alpha: float = 1.0) -> TrainedModel:
    """Multinomial naive Bayes with additive smoothing.

    Feature "counts" are the summed matrix values per class, so the model
    accepts raw counts as well as TF-IDF weights. A zero probability
    (possible only with ``alpha=0``) is stored as a large finite negative.
    """
    if X.shape[0] != len(y):
        raise ValueError("X rows and labels differ in length")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    classes = _classes(y)
    lookup = {c: i for i, c in enumerate(classes)}
    yi = np.array([lookup[c] for c in y])
    k, v = len(classes), X.shape[1]
    counts = np.zeros((k, v))
    np.add.at(counts, (yi[X.row_ids()], X.indices), X.data)
    num = counts + alpha
    den = num.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.log(num / den)
    logp[~np.isfinite(logp)] = LOG_ZERO
    prior = np.log(np.bincount(yi, minlength=k) / len(y))
    return TrainedModel("nb", classes, logp, prior, {"alpha": alpha})


def objective(w, b, X: SparseMatrix, signs, sample_weight, C: float, loss: str) -> float:
    """Primal objective of one binary problem (see module docstring)."""
    margins = signs * (X.dot(w) + b)
    if loss == "svm":
        per = np.maximum(0.0, 1.0 - margins)
    elif loss == "logreg":
        per = np.logaddexp(0.0, -margins)
    else:
        raise ValueError(f"unknown loss {loss!r}")
    return 0.5 * float(w @ w) + C * float(sample_weight @ per)


def objective_grad(w, b, X: SparseMatrix, signs, sample_weight, C: float, loss: str):
    """Gradient (or the hinge subgradient) of :func:`objective` in ``(w, b)``."""
    margins = signs * (X.dot(w) + b)
    if loss == "svm":
        dl = np.where(margins < 1.0, -1.0, 0.0)
    elif loss == "logreg":
        dl = -0.5 * (1.0 - np.tanh(0.5 * margins))  # -sigmoid(-m), overflow-free
    else:
        raise ValueError(f"unknown loss {loss!r}")
    coef = C * sample_weight * dl * signs
    gw = w + _rmatvec(X, coef)
    gb = float(coef.sum())
    return gw, gb


def _rmatvec(X: SparseMatrix, v) -> np.ndarray:
    return np.bincount(X.indices, weights=X.data * v[X.row_ids()], minlength=X.shape[1])


def _dloss(margin: float, loss: str) -> float:
    if loss == "svm":
        return -1.0 if margin < 1.0 else 0.0
    if margin > 0:
        e = math.exp(-margin)
        return -e / (1.0 + e)
    return -1.0 / (1.0 + math.exp(margin))


def _sgd_binary(rows, signs, sw, C, loss, epochs, seed, label):
    """Run SGD for one class; ``rows`` holds per-sample (indices, values) lists.

    ``w`` is kept as ``scale * v`` so the shrink step is O(1). The returned
    weights are the mean of the iterates over the last epoch, tracked lazily
    as ``(S * v - u) / T`` with ``S`` the running sum of scales.
    """
    n = len(rows)
    dim = rows.n_features
    lam = 1.0 / (C * n)
    t0 = MAX_STEP ** -1 / lam  # first step 1 / (lam * t0) = MAX_STEP
    v = [0.0] * dim
    scale = 1.0
    b = 0.0
    t = 0
    rng = np.random.default_rng(seed)
    for epoch in range(epochs):
        u = [0.0] * dim
        S = 0.0
        b_sum = 0.0
        for i in rng.permutation(n).tolist():
            idx, val = rows[i]
            s = signs[i]
            score = 0.0
            for j, x in zip(idx, val):
                score += v[j] * x
            margin = s * (scale * score + b)
            eta = 1.0 / (lam * (t + t0))
            g = _dloss(margin, loss)
            scale *= 1.0 - eta * lam
            if g != 0.0:
                step = eta * sw[i] * g * s
                coef = step / scale
                for j, x in zip(idx, val):
                    v[j] -= coef * x
                    u[j] -= coef * x * S
                b -= step
            if scale < 1e-9:
                v = [scale * a for a in v]
                S /= scale
                scale = 1.0
            S += scale
            b_sum += b
            t += 1
        if not (math.isfinite(b) and math.isfinite(S)) or not all(map(math.isfinite, v)):
            raise DivergedError(label, epoch)
    if epochs == 0:
        return np.zeros(dim), 0.0
    w = (S * np.asarray(v) - np.asarray(u)) / n
    if not np.all(np.isfinite(w)):
        raise DivergedError(label, epochs - 1)
    return w, b_sum / n


class _Rows:
    def __init__(self, X: SparseMatrix):
        ind, dat = X.indices.tolist(), X.data.tolist()
        ptr = X.indptr.tolist()
        self._rows = [(ind[ptr[i]:ptr[i + 1]], dat[ptr[i]:ptr[i + 1]]) for i in range(X.shape[0])]
        self.n_features = X.shape[1]

    def __len__(self):
        return len(self._rows)

    def __getitem__(self, i):
        return self._rows[i]


def train_linear(
    X: SparseMatrix,
    y: Sequence,
    kind: str = "svm",
    C: float = 1.0,
    class_weights: dict | None = None,
    epochs: int = DEFAULT_EPOCHS,
    seed: int = 0,
    classes: Sequence | None = None,
) -> TrainedModel:
    """Train a one-vs-rest linear SVM or logistic regression.

    Parameters
    ----------
    X : SparseMatrix
    y : sequence of class ids
    kind : {"svm", "logreg"}
    C : float
        Inverse regularization strength.
    class_weights : dict, optional
        Loss multiplier per class; missing classes weigh 1.
    epochs : int
        Passes over the data per class.
    seed : int
        Each class shuffles with its own RNG keyed on ``(seed, class)``, so
        the per-class problems can run in any order.
    classes : sequence, optional
        Train only these binary problems (all by default). Used to check
        that per-class training is order independent.
    """
    if kind not in ("svm", "logreg"):
        raise ValueError(f"kind must be 'svm' or 'logreg', got {kind!r}")
    if C <= 0:
        raise ValueError("C must be positive")
    if X.shape[0] != len(y):
        raise ValueError("X rows and labels differ in length")
    class_weights = dict(class_weights or {})
    if any(w <= 0 for w in class_weights.values()):
        raise ValueError("class weights must be positive")
    all_classes = _classes(y)
    todo = all_classes if classes is None else sorted(classes)
    y = list(y)
    sw = [float(class_weights.get(c, 1.0)) for c in y]
    rows = _Rows(X)
    W = np.zeros((len(todo), X.shape[1]))
    B = np.zeros(len(todo))
    for ci, c in enumerate(todo):
        signs = [1.0 if lab == c else -1.0 for lab in y]
        W[ci], B[ci] = _sgd_binary(rows, signs, sw, C, kind, epochs, derive_seed(seed, c), c)
    config = {
        "C": C,
        "class_weights": {k: class_weights[k] for k in sorted(class_weights)},
        "epochs": epochs,
        "seed": seed,
        "schedule": f"inverse-scaling:1/(lambda*(t+t0)),eta0={MAX_STEP},last-epoch-average",
    }
    return TrainedModel(kind, list(todo), W, B, config)


def decision_function(model: TrainedModel, X: SparseMatrix) -> np.ndarray:
    if X.shape[1] != model.n_features:
        raise ValueError(f"model expects {model.n_features} features, matrix has {X.shape[1]}")
    return X.dot(model.weights.T) + model.bias


def predict(model: TrainedModel, X: SparseMatrix) -> list:
    """Argmax of per-class scores; ties go to the earliest class in sorted order."""
    if X.shape[0] == 0:
        if X.shape[1] != model.n_features:
            raise ValueError("dimension mismatch")
        return []
    scores = decision_function(model, X)
    return [model.classes[i] for i in np.argmax(scores, axis=1)]


@dataclass
class GridSearchResult:
    candidates: list
    scores: list
    chosen: float
    fold_scores: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"candidates": self.candidates, "scores": self.scores,
                "chosen": self.chosen, "fold_scores": self.fold_scores}


def choose_C(candidates, scores) -> float:
    """Best mean score; ties resolve to the smallest C."""
    best = max(scores)
    return min(c for c, s in zip(candidates, scores) if s == best)


def dedupe_candidates(candidates) -> list:
    out = sorted({float(c) for c in candidates})
    if not out:
        raise ValueError("no C candidates")
    if out[0] <= 0:
        raise ValueError("C candidates must be positive")
    return out


def grid_search_C(
    X: SparseMatrix,
    y: Sequence,
    candidates,
    folds: int = 5,
    seed: int = 0,
    kind: str = "svm",
    class_weights: dict | None = None,
    epochs: int = DEFAULT_EPOCHS,
) -> GridSearchResult:
    """Stratified k-fold search over C on a precomputed feature matrix.

    For a leakage-free search that refits the vectorizer per fold use
    :func:`stx.evaluation.grid_search`.
    """
    from .evaluation import score, stratified_kfold

    cands = dedupe_candidates(candidates)
    y = list(y)
    splits = stratified_kfold(y, folds, seed)
    all_idx = np.arange(len(y))
    means, per_fold = [], []
    for C in cands:
        f1s = []
        for fi, test in enumerate(splits):
            test = np.sort(np.asarray(test))
            train = np.setdiff1d(all_idx, test)
            model = train_linear(X.take_rows(train), [y[i] for i in train], kind, C,
                                 class_weights, epochs, derive_seed(seed, "fold", fi))
            pred = predict(model, X.take_rows(test))
            f1s.append(score(pred, [y[i] for i in test]).macro["f1"])
        per_fold.append(f1s)
        means.append(float(np.mean(f1s)))
    return GridSearchResult(cands, means, choose_C(cands, means), per_fold)
