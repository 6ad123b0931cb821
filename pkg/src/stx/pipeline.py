"""End-to-end fit/predict: expansion, vectorization, selection, learner."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

from ._seeding import derive_seed
from .expansion import ExpansionConfig, Thesaurus, build_category_thesaurus, expand_corpus
from .features import FeatureMask, Vocabulary, anova_f, build_vocabulary, count_matrix, select_top, tfidf
from .learners import DEFAULT_EPOCHS, TrainedModel, predict, train_linear, train_nb

__all__ = ["PipelineConfig", "FittedPipeline", "fit_pipeline", "majority_class"]

LEARNERS = ("nb", "logreg", "svm")
EXPANSIONS = (None, "hashtag", "category")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything that shapes a fitted pipeline.

    ``majority_weight`` sets the class weight of the largest training class
    (ties go to the lexicographically first), on top of ``class_weights``.
    """

    ngram_max: int = 1
    min_df: int = 1
    keep_fraction: float = 0.25
    learner: str = "svm"
    C: float = 5.0
    class_weights: dict = field(default_factory=dict)
    majority_weight: Optional[float] = None
    epochs: int = DEFAULT_EPOCHS
    alpha: float = 1.0
    nb_counts: bool = False
    expansion: Optional[str] = None
    expansion_side: str = "both"
    expansion_n: int = 2
    category_weighting: str = "tfidf"
    thesaurus_depth: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.learner not in LEARNERS:
            raise ValueError(f"learner must be one of {LEARNERS}")
        if self.expansion not in EXPANSIONS:
            raise ValueError(f"expansion must be one of {EXPANSIONS}")
        if self.ngram_max not in (1, 2):
            raise ValueError("ngram_max must be 1 or 2")
        if not 0 < self.keep_fraction <= 1:
            raise ValueError("keep_fraction must lie in (0, 1]")

    def to_json(self) -> dict:
        out = asdict(self)
        out["class_weights"] = {k: self.class_weights[k] for k in sorted(self.class_weights)}
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PipelineConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(obj) - names
        if unknown:
            raise ValueError(f"unknown pipeline keys: {sorted(unknown)}")
        return cls(**obj)


def majority_class(labels: Sequence) -> str:
    counts = Counter(labels)
    top = max(counts.values())
    return min(c for c, n in counts.items() if n == top)


@dataclass
class FittedPipeline:
    config: PipelineConfig
    vocabulary: Vocabulary
    mask: FeatureMask
    model: TrainedModel
    seed: int
    hashtag_thesaurus: Optional[Thesaurus] = None
    category_thesaurus: Optional[Thesaurus] = None

    def _expansion(self) -> ExpansionConfig:
        c = self.config
        return ExpansionConfig(c.expansion_n, derive_seed(self.seed, "expansion"), c.expansion_side)

    def prepare_test(self, documents) -> list:
        """Apply query-side expansion when configured."""
        documents = list(documents)
        if self.config.expansion == "hashtag" and self.hashtag_thesaurus is not None:
            documents, _ = expand_corpus(documents, self.hashtag_thesaurus, self._expansion(), "test")
        return documents

    def vectorize(self, documents):
        if self.config.learner == "nb" and self.config.nb_counts:
            X = count_matrix(documents, self.vocabulary)
        else:
            X = tfidf(documents, self.vocabulary)
        return self.mask.apply(X)

    def transform(self, documents):
        return self.vectorize(self.prepare_test(documents))

    def predict(self, documents) -> list:
        return predict(self.model, self.transform(documents))

    def model_snapshot(self) -> TrainedModel:
        """The trained model with vocabulary and feature mask attached."""
        m = self.model
        m.feature_mask = [int(j) for j in self.mask.kept_columns]
        m.vocabulary = self.vocabulary.to_json()
        m.vocabulary_hash = self.vocabulary.fingerprint()
        m.config = dict(m.config, pipeline=self.config.to_json())
        return m


def fit_pipeline(documents, config: PipelineConfig, hashtag_thesaurus: Thesaurus | None = None,
                 fold_seed: int | None = None) -> FittedPipeline:
    """Fit on labeled training documents only."""
    seed = config.seed if fold_seed is None else fold_seed
    docs = list(documents)
    labels = [d.label for d in docs]
    pipe = FittedPipeline(config, None, None, None, seed, hashtag_thesaurus)
    exp = pipe._expansion()
    if config.expansion == "hashtag":
        if hashtag_thesaurus is None:
            raise ValueError("hashtag expansion needs a hashtag thesaurus")
        docs, _ = expand_corpus(docs, hashtag_thesaurus, exp, "train")
    elif config.expansion == "category":
        cat = build_category_thesaurus(docs, config.category_weighting, config.thesaurus_depth)
        pipe.category_thesaurus = cat
        docs, _ = expand_corpus(docs, cat, exp, "train")

    vocab = build_vocabulary(docs, config.ngram_max, config.min_df)
    X_full = tfidf(docs, vocab)
    mask = select_top(anova_f(X_full, labels), config.keep_fraction)
    pipe.vocabulary, pipe.mask = vocab, mask
    if config.learner == "nb":
        X = mask.apply(count_matrix(docs, vocab) if config.nb_counts else X_full)
        model = train_nb(X, labels, config.alpha)
    else:
        weights = dict(config.class_weights)
        if config.majority_weight is not None:
            weights[majority_class(labels)] = config.majority_weight
        model = train_linear(mask.apply(X_full), labels, config.learner, config.C,
                             weights, config.epochs, seed)
    pipe.model = model
    return pipe
