"""Vocabulary, CSR TF-IDF matrices and ANOVA-F feature selection.

Term frequency is the length-normalized count ``count_ij / sum_j count_ij``
and inverse document frequency is the unsmoothed ``ln(N / df_j)``, so a
feature present in every training document carries zero weight.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateLabels, EmptyVocabulary, FormatError

__all__ = [
    "SparseMatrix",
    "Vocabulary",
    "FeatureMask",
    "doc_features",
    "build_vocabulary",
    "count_matrix",
    "tfidf",
    "anova_f",
    "select_top",
    "F_SENTINEL",
    "MATRIX_MAGIC",
    "save_matrix",
    "load_matrix",
]

MATRIX_MAGIC = "STXF1"
F_SENTINEL = float(np.finfo(np.float64).max)
# relative floor below which a sum of squares is treated as exactly zero
_SS_RTOL = 1e-12


class SparseMatrix:
    """Compressed sparse row matrix of float64 values.

    Parameters
    ----------
    indptr : array of int, shape (rows + 1,)
    indices : array of int
        Column index of each stored value; strictly increasing within a row.
    data : array of float
        Stored values, never zero.
    shape : (int, int)
    """

    __slots__ = ("indptr", "indices", "data", "shape")

    def __init__(self, indptr, indices, data, shape, check: bool = True):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.float64)
        self.shape = (int(shape[0]), int(shape[1]))
        if check:
            self._check()

    def _check(self):
        n, m = self.shape
        if self.indptr.shape != (n + 1,) or self.indptr[0] != 0:
            raise ValueError("indptr must have rows + 1 entries starting at 0")
        if np.any(np.diff(self.indptr) < 0) or self.indptr[-1] != len(self.indices):
            raise ValueError("indptr must be non-decreasing and end at nnz")
        if len(self.indices) != len(self.data):
            raise ValueError("indices and data lengths differ")
        if len(self.indices):
            if self.indices.min() < 0 or self.indices.max() >= m:
                raise ValueError("column index out of range")
            # strictly increasing within each row
            step = np.diff(self.indices)
            row_start = np.zeros(len(self.indices), dtype=bool)
            row_start[self.indptr[:-1][np.diff(self.indptr) > 0]] = True
            if np.any((step <= 0) & ~row_start[1:]):
                raise ValueError("column indices must be strictly increasing within a row")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("non-finite stored value")
        if np.any(self.data == 0):
            raise ValueError("explicit zeros must not be stored")

    @classmethod
    def from_rows(cls, rows: Sequence[dict], n_cols: int) -> "SparseMatrix":
        """Build from one ``{column: value}`` mapping per row; zeros are dropped."""
        indptr = [0]
        indices, data = [], []
        for row in rows:
            for j in sorted(row):
                v = row[j]
                if v != 0:
                    indices.append(j)
                    data.append(v)
            indptr.append(len(indices))
        return cls(indptr, indices, data, (len(rows), n_cols))

    @classmethod
    def from_dense(cls, dense) -> "SparseMatrix":
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2:
            raise ValueError("expected a 2-d array")
        rows, cols = np.nonzero(dense)
        indptr = np.zeros(dense.shape[0] + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return cls(np.cumsum(indptr), cols, dense[rows, cols], dense.shape)

    @property
    def nnz(self) -> int:
        return len(self.data)

    def row_ids(self) -> np.ndarray:
        return np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))

    def row(self, i: int):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.row_ids(), self.indices] = self.data
        return out

    def dot(self, dense) -> np.ndarray:
        """Right-multiply by a dense vector ``(cols,)`` or matrix ``(cols, k)``."""
        dense = np.asarray(dense, dtype=np.float64)
        if dense.shape[0] != self.shape[1]:
            raise ValueError(f"dimension mismatch: {self.shape} @ {dense.shape}")
        prod = self.data.reshape((-1,) + (1,) * (dense.ndim - 1)) * dense[self.indices]
        out = np.zeros((self.shape[0],) + dense.shape[1:])
        np.add.at(out, self.row_ids(), prod)
        return out

    def take_rows(self, rows) -> "SparseMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        starts, ends = self.indptr[rows], self.indptr[rows + 1]
        lengths = ends - starts
        indptr = np.concatenate([[0], np.cumsum(lengths)])
        if len(rows) and indptr[-1]:
            pos = np.concatenate([np.arange(s, e) for s, e in zip(starts, ends)])
        else:
            pos = np.zeros(0, dtype=np.int64)
        return SparseMatrix(indptr, self.indices[pos], self.data[pos],
                            (len(rows), self.shape[1]), check=False)

    def select_columns(self, columns) -> "SparseMatrix":
        """Keep ``columns`` (sorted ascending) and renumber them densely."""
        columns = np.asarray(columns, dtype=np.int64)
        remap = np.full(self.shape[1], -1, dtype=np.int64)
        remap[columns] = np.arange(len(columns))
        new_idx = remap[self.indices]
        keep = new_idx >= 0
        counts = np.bincount(self.row_ids()[keep], minlength=self.shape[0])
        indptr = np.concatenate([[0], np.cumsum(counts)])
        return SparseMatrix(indptr, new_idx[keep], self.data[keep],
                            (self.shape[0], len(columns)), check=False)

    def scale(self, factor: float) -> "SparseMatrix":
        if factor == 0:
            return SparseMatrix(np.zeros(self.shape[0] + 1), [], [], self.shape)
        return SparseMatrix(self.indptr, self.indices, self.data * factor, self.shape, check=False)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.shape == other.shape
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


@dataclass(frozen=True)
class Vocabulary:
    token_to_col: dict
    ngram_max: int
    doc_freq: np.ndarray
    n_docs: int

    def __len__(self):
        return len(self.token_to_col)

    @property
    def tokens(self) -> list:
        inv = [None] * len(self.token_to_col)
        for t, j in self.token_to_col.items():
            inv[j] = t
        return inv

    @property
    def idf(self) -> np.ndarray:
        return np.log(self.n_docs / self.doc_freq)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.to_json(), sort_keys=True).encode("utf-8"))
        return h.hexdigest()

    def to_json(self) -> dict:
        return {
            "token_to_col": dict(self.token_to_col),
            "ngram_max": self.ngram_max,
            "doc_freq": [int(x) for x in self.doc_freq],
            "n_docs": self.n_docs,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Vocabulary":
        return cls(
            {str(k): int(v) for k, v in obj["token_to_col"].items()},
            int(obj["ngram_max"]),
            np.asarray(obj["doc_freq"], dtype=np.int64),
            int(obj["n_docs"]),
        )


def _tokens_of(doc) -> Sequence[str]:
    if isinstance(doc, str):
        return doc.split()
    if hasattr(doc, "tokens"):
        return doc.tokens
    return doc


def doc_features(tokens: Sequence[str], ngram_max: int = 1) -> list:
    """Unigrams, plus adjacent pairs joined by one space when ``ngram_max == 2``."""
    feats = list(tokens)
    if ngram_max >= 2:
        feats.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return feats


def build_vocabulary(corpus: Iterable, ngram_max: int = 1, min_df: int = 1) -> Vocabulary:
    """Index features that occur in at least ``min_df`` documents.

    Columns follow lexicographic order of the feature strings. ``corpus``
    items may be documents with ``tokens``, token lists, or whitespace
    separated strings.
    """
    if ngram_max not in (1, 2):
        raise ValueError("ngram_max must be 1 or 2")
    df = Counter()
    n_docs = 0
    for doc in corpus:
        n_docs += 1
        df.update(set(doc_features(_tokens_of(doc), ngram_max)))
    if n_docs == 0:
        raise EmptyVocabulary("cannot build a vocabulary from an empty corpus")
    kept = sorted(t for t, c in df.items() if c >= min_df)
    if not kept:
        raise EmptyVocabulary(f"no feature reaches min_df={min_df}")
    return Vocabulary(
        {t: j for j, t in enumerate(kept)},
        ngram_max,
        np.array([df[t] for t in kept], dtype=np.int64),
        n_docs,
    )


def count_matrix(corpus: Iterable, vocab: Vocabulary) -> SparseMatrix:
    """Raw in-document feature counts; out-of-vocabulary features are ignored."""
    rows = []
    t2c = vocab.token_to_col
    for doc in corpus:
        counts = Counter()
        for f in doc_features(_tokens_of(doc), vocab.ngram_max):
            j = t2c.get(f)
            if j is not None:
                counts[j] += 1
        rows.append(counts)
    return SparseMatrix.from_rows(rows, len(vocab))


def tfidf(corpus: Iterable, vocab: Vocabulary, use_idf: bool = True) -> SparseMatrix:
    """TF-IDF weights ``(count / in-vocabulary length) * ln(N / df)``.

    With ``use_idf=False`` the length-normalized term frequencies are
    returned, whose rows sum to one for every non-empty document.
    """
    counts = count_matrix(corpus, vocab)
    lengths = np.diff(counts.indptr)
    totals = np.add.reduceat(counts.data, counts.indptr[:-1][lengths > 0]) if counts.nnz else np.zeros(0)
    row_tot = np.zeros(counts.shape[0])
    row_tot[lengths > 0] = totals
    values = counts.data / row_tot[counts.row_ids()]
    if use_idf:
        values = values * vocab.idf[counts.indices]
    keep = values != 0
    row_counts = np.bincount(counts.row_ids()[keep], minlength=counts.shape[0])
    indptr = np.concatenate([[0], np.cumsum(row_counts)])
    return SparseMatrix(indptr, counts.indices[keep], values[keep], counts.shape)


def _class_index(labels) -> tuple:
    classes = sorted(set(labels))
    lookup = {c: i for i, c in enumerate(classes)}
    return classes, np.array([lookup[c] for c in labels], dtype=np.int64)


def anova_f(matrix: SparseMatrix, labels: Sequence) -> np.ndarray:
    """One-way ANOVA F-value of every column against the class labels.

    Implicit zeros count as observations. Sums of squares are computed in
    two passes around the group means. A column with zero within-class
    spread but non-zero between-class spread scores :data:`F_SENTINEL`; a
    column with neither scores 0.

    Raises
    ------
    DegenerateLabels
        Fewer than two distinct classes.
    """
    n, m = matrix.shape
    if len(labels) != n:
        raise ValueError("one label per row required")
    classes, y = _class_index(labels)
    k = len(classes)
    if k < 2:
        raise DegenerateLabels("ANOVA needs at least two classes")
    n_c = np.bincount(y, minlength=k).astype(np.float64)
    rows = matrix.row_ids()
    cls_of = y[rows]
    flat = cls_of * m + matrix.indices

    sums = np.bincount(flat, weights=matrix.data, minlength=k * m).reshape(k, m)
    nnz = np.bincount(flat, minlength=k * m).reshape(k, m)
    mu_c = sums / n_c[:, None]
    mu = sums.sum(axis=0) / n

    dev = matrix.data - mu_c[cls_of, matrix.indices]
    within = np.bincount(matrix.indices, weights=dev * dev, minlength=m)
    within += ((n_c[:, None] - nnz) * mu_c * mu_c).sum(axis=0)
    between = (n_c[:, None] * (mu_c - mu) ** 2).sum(axis=0)

    scale = np.bincount(matrix.indices, weights=matrix.data ** 2, minlength=m)
    within = np.where(within <= _SS_RTOL * scale, 0.0, within)
    between = np.where(between <= _SS_RTOL * scale, 0.0, between)

    f = np.zeros(m)
    dfw = n - k
    pos = within > 0
    if dfw > 0:
        f[pos] = (between[pos] / (k - 1)) / (within[pos] / dfw)
    f[~pos & (between > 0)] = F_SENTINEL
    return np.minimum(f, F_SENTINEL)


@dataclass(frozen=True)
class FeatureMask:
    kept_columns: np.ndarray
    scores: np.ndarray
    keep_fraction: float

    def __len__(self):
        return len(self.kept_columns)

    def apply(self, matrix: SparseMatrix) -> SparseMatrix:
        return matrix.select_columns(self.kept_columns)


def select_top(scores, keep_fraction: float = 0.25) -> FeatureMask:
    """Keep the ``max(1, floor(f * V))`` highest-scoring columns.

    Ties go to the lower column index; kept columns are returned sorted.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError("keep_fraction must lie in (0, 1]")
    scores = np.asarray(scores, dtype=np.float64)
    v = len(scores)
    k = max(1, int(math.floor(keep_fraction * v + 1e-9)))
    k = min(k, v)
    order = np.lexsort((np.arange(v), -scores))
    return FeatureMask(np.sort(order[:k]), scores, keep_fraction)


def save_matrix(path, matrix: SparseMatrix, vocab: Vocabulary | None = None) -> None:
    obj = {
        "magic": MATRIX_MAGIC,
        "rows": matrix.shape[0],
        "cols": matrix.shape[1],
        "indptr": matrix.indptr.tolist(),
        "indices": matrix.indices.tolist(),
        "data": matrix.data.tolist(),
        "vocabulary": vocab.to_json() if vocab is not None else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)


def load_matrix(path):
    """Inverse of :func:`save_matrix`; returns ``(matrix, vocabulary or None)``."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("magic") != MATRIX_MAGIC:
        raise FormatError(f"{path}: not an {MATRIX_MAGIC} matrix file")
    matrix = SparseMatrix(obj["indptr"], obj["indices"], obj["data"], (obj["rows"], obj["cols"]))
    vocab = Vocabulary.from_json(obj["vocabulary"]) if obj.get("vocabulary") else None
    return matrix, vocab
