"""Hashtag and category thesauri, and document/query expansion.

A thesaurus maps a key (a hashtag such as ``"#mystery"`` or a root
category) to a ranked word list. Expanding a document appends ``n`` words
drawn without replacement from the top ``2n`` words of every applicable key.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable

from ._seeding import keyed_rng
from .errors import FormatError
from .textprep import Document, StopLists

logger = logging.getLogger(__name__)

__all__ = [
    "Thesaurus",
    "ExpansionConfig",
    "ExpansionStats",
    "HashtagCounts",
    "build_hashtag_thesaurus",
    "build_category_thesaurus",
    "expand",
    "expand_corpus",
    "THESAURUS_MAGIC",
    "save_thesaurus",
    "load_thesaurus",
]

THESAURUS_MAGIC = "STXT1"
SIDES = ("document", "query", "both")


def _rank(scores: dict, depth: int) -> list:
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(w, float(s)) for w, s in ranked[:depth]]


@dataclass(frozen=True)
class Thesaurus:
    kind: str
    weighting: str
    max_depth: int
    entries: dict
    built_from: dict = field(default_factory=dict)

    def words(self, key) -> list:
        return [w for w, _ in self.entries.get(key, ())]

    def __contains__(self, key) -> bool:
        return key in self.entries

    def __len__(self):
        return len(self.entries)

    def to_json(self) -> dict:
        return {
            "magic": THESAURUS_MAGIC,
            "kind": self.kind,
            "weighting": self.weighting,
            "max_depth": self.max_depth,
            "entries": {k: [[w, s] for w, s in v] for k, v in sorted(self.entries.items())},
            "built_from": self.built_from,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Thesaurus":
        if obj.get("magic") != THESAURUS_MAGIC:
            raise FormatError(f"not an {THESAURUS_MAGIC} thesaurus")
        return cls(
            obj["kind"], obj["weighting"], int(obj["max_depth"]),
            {k: [(w, float(s)) for w, s in v] for k, v in obj["entries"].items()},
            obj.get("built_from", {}),
        )


def save_thesaurus(path, thesaurus: Thesaurus) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(thesaurus.to_json(), fh, sort_keys=True, ensure_ascii=False)


def load_thesaurus(path) -> Thesaurus:
    with open(path, encoding="utf-8") as fh:
        return Thesaurus.from_json(json.load(fh))


def _candidate(tok: str, stops: StopLists) -> bool:
    return not tok.startswith("#") and tok not in stops and any(ch.isalpha() for ch in tok)


class HashtagCounts:
    """Mergeable co-occurrence counts, one shard of a hashtag thesaurus build.

    Counts are exact integers, so merging shards in any grouping gives the
    same totals as one pass over the concatenated stream.
    """

    def __init__(self, stops: StopLists | None = None):
        self.stops = stops if stops is not None else StopLists()
        self.cooc = {}
        self.support = Counter()
        self.n_docs = 0

    def update(self, doc) -> None:
        self.n_docs += 1
        tokens = doc.tokens
        for tag in sorted(doc.hashtags):
            word = tag[1:]
            self.support[tag] += 1
            counts = self.cooc.setdefault(tag, Counter())
            counts.update(t for t in tokens if t != word and _candidate(t, self.stops))

    def merge(self, other: "HashtagCounts") -> "HashtagCounts":
        out = HashtagCounts(self.stops)
        out.n_docs = self.n_docs + other.n_docs
        out.support = self.support + other.support
        for src in (self.cooc, other.cooc):
            for tag, counts in src.items():
                out.cooc.setdefault(tag, Counter()).update(counts)
        return out

    def finalize(self, max_depth: int = 20, min_support: int = 2) -> Thesaurus:
        entries = {}
        for tag in sorted(self.cooc):
            if self.support[tag] < min_support:
                continue
            ranked = _rank(self.cooc[tag], max_depth)
            if ranked:
                entries[tag] = ranked
        built = {"documents": self.n_docs, "min_support": min_support,
                 "stop_lists": dict(self.stops.hashes)}
        return Thesaurus("hashtag", "frequency", max_depth, entries, built)


def build_hashtag_thesaurus(corpus: Iterable, stops: StopLists | None = None,
                            max_depth: int = 20, min_support: int = 2) -> Thesaurus:
    """Rank the words co-occurring with each hashtag by count, in one pass.

    Counted words exclude stop words, other hashtags, tokens without any
    letter, and the hashtag's own bare word. Hashtags found in fewer than
    ``min_support`` documents are omitted.
    """
    counts = HashtagCounts(stops)
    for doc in corpus:
        counts.update(doc)
    return counts.finalize(max_depth, min_support)


def build_category_thesaurus(corpus: Iterable, weighting: str = "tfidf", max_depth: int = 20,
                             stops: StopLists | None = None) -> Thesaurus:
    """Top words per labeled category.

    With ``"tfidf"`` each category's concatenated text is a pseudo-document
    and words score ``tf * ln(k / df)`` over the ``k`` pseudo-documents;
    with ``"frequency"`` words score by raw in-category count. Pass the
    training split only: nothing here may see held-out documents.
    """
    if weighting not in ("tfidf", "frequency"):
        raise ValueError(f"unknown weighting {weighting!r}")
    stops = stops if stops is not None else StopLists()
    per_cat = {}
    n_docs = 0
    for doc in corpus:
        if doc.label is None:
            raise ValueError(f"document {doc.id!r} has no label")
        n_docs += 1
        per_cat.setdefault(doc.label, Counter()).update(t for t in doc.tokens if _candidate(t, stops))
    for cat in sorted(c for c, cnt in per_cat.items() if not cnt):
        warnings.warn(f"category {cat!r} has no usable tokens; omitted")
    per_cat = {c: cnt for c, cnt in per_cat.items() if cnt}
    entries = {}
    if weighting == "frequency":
        for cat in sorted(per_cat):
            entries[cat] = _rank(per_cat[cat], max_depth)
    else:
        k = len(per_cat)
        if k == 1:
            warnings.warn("single category: every idf is ln(1) = 0, ranking falls back to word order")
        df = Counter()
        for cnt in per_cat.values():
            df.update(cnt.keys())
        for cat in sorted(per_cat):
            cnt = per_cat[cat]
            total = sum(cnt.values())
            entries[cat] = _rank({w: (c / total) * math.log(k / df[w]) for w, c in cnt.items()}, max_depth)
    built = {"documents": n_docs, "stop_lists": dict(stops.hashes)}
    return Thesaurus("category", weighting, max_depth, entries, built)


@dataclass(frozen=True)
class ExpansionConfig:
    n: int = 2
    seed: int = 0
    side: str = "both"

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")

    def applies_to(self, split: str) -> bool:
        if split == "train":
            return self.side in ("document", "both")
        if split == "test":
            return self.side in ("query", "both")
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")


def _keys(doc, thesaurus: Thesaurus) -> list:
    if thesaurus.kind == "hashtag":
        return sorted(doc.hashtags)
    return [doc.label] if doc.label is not None else []


def expansion_words(doc, key, thesaurus: Thesaurus, config: ExpansionConfig) -> list:
    """Words that :func:`expand` would append to ``doc`` for one key."""
    top = thesaurus.words(key)[: 2 * config.n]
    m = min(config.n, len(top))
    if m == 0:
        return []
    picks = keyed_rng("expand", config.seed, doc.id, key).choice(len(top), size=m, replace=False)
    return [top[i] for i in picks]


def expand(doc: Document, thesaurus: Thesaurus, config: ExpansionConfig) -> Document:
    """Append thesaurus words for every key of ``doc``.

    Keys are the document's hashtags (hashtag thesaurus) or its label
    (category thesaurus). Draws are keyed on ``(seed, doc.id, key)``. Added
    words go to ``tokens`` only, never to ``hashtags``.
    """
    if 2 * config.n > thesaurus.max_depth:
        raise ValueError(f"2n = {2 * config.n} exceeds thesaurus depth {thesaurus.max_depth}")
    if config.n == 0:
        return doc
    added = []
    for key in _keys(doc, thesaurus):
        added.extend(expansion_words(doc, key, thesaurus, config))
    if not added:
        return doc
    return replace(doc, tokens=tuple(doc.tokens) + tuple(added))


@dataclass
class ExpansionStats:
    documents_touched: int = 0
    words_added: int = 0

    def to_json(self) -> dict:
        return {"documents_touched": self.documents_touched, "words_added": self.words_added}


def expand_corpus(documents: Iterable, thesaurus: Thesaurus, config: ExpansionConfig,
                  split: str = "train"):
    """Expand a split if ``config.side`` covers it; returns ``(docs, stats)``.

    ``split`` is ``"train"`` (document expansion) or ``"test"`` (query
    expansion). Category thesauri are only ever applied to training data;
    asking for them on the test split is a no-op.
    """
    documents = list(documents)
    stats = ExpansionStats()
    if not config.applies_to(split) or (thesaurus.kind == "category" and split != "train"):
        return documents, stats
    out = []
    for doc in documents:
        new = expand(doc, thesaurus, config)
        if new is not doc:
            stats.documents_touched += 1
            stats.words_added += len(new.tokens) - len(doc.tokens)
        out.append(new)
    return out, stats
