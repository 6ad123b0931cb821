"""JSON-Lines ingestion, retweet removal, rare-class pruning and splitting."""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Optional

from ._seeding import keyed_rng
from .errors import EmptyCorpus, FormatError, StratificationError

logger = logging.getLogger(__name__)

SOURCES = ("twitter", "amazon")
MALFORMED_LIMIT = 0.5

__all__ = [
    "RawRecord",
    "LabeledCorpus",
    "IngestSummary",
    "ingest",
    "read_records",
    "filter_corpus",
    "train_test_split",
    "write_jsonl",
    "read_documents",
]


@dataclass(frozen=True)
class RawRecord:
    id: str
    text: str
    retweet_of: Optional[str] = None
    label_node: Optional[str] = None
    source: str = "twitter"
    label: Optional[str] = None

    def to_json(self) -> dict:
        out = {"id": self.id, "text": self.text}
        if self.retweet_of is not None:
            out["retweet_of"] = self.retweet_of
        if self.label_node is not None:
            out["label_node"] = self.label_node
        if self.label is not None:
            out["root_category"] = self.label
        return out


@dataclass
class IngestSummary:
    read: int = 0
    skipped: int = 0
    duplicates: int = 0

    @property
    def lines(self) -> int:
        return self.read + self.skipped


@dataclass(frozen=True)
class LabeledCorpus:
    """Labeled documents (records or normalized documents) plus class counts."""

    documents: tuple
    class_counts: dict
    min_class_size: int = 1

    @classmethod
    def from_documents(cls, documents: Iterable, min_class_size: int = 1) -> "LabeledCorpus":
        documents = tuple(documents)
        counts = Counter(d.label for d in documents)
        return cls(documents, dict(sorted(counts.items())), min_class_size)

    @property
    def labels(self) -> list:
        return [d.label for d in self.documents]

    @property
    def ids(self) -> list:
        return [d.id for d in self.documents]

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


def _parse_line(line: str, source: str) -> Optional[RawRecord]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(obj, dict):
        return None
    rid, text = obj.get("id"), obj.get("text")
    if not isinstance(rid, str) or not rid or not isinstance(text, str):
        return None
    if not text.strip():
        return None
    rt, node = obj.get("retweet_of"), obj.get("label_node")
    if rt is not None and not isinstance(rt, str):
        return None
    if node is not None and not isinstance(node, str):
        return None
    return RawRecord(rid, text, rt, node, source, obj.get("root_category"))


class ingest:
    """Stream :class:`RawRecord` objects from a JSON-Lines file.

    Malformed lines (bad JSON, missing/mistyped ``id`` or ``text``, blank
    text) are skipped and counted; duplicate ids are rejected the same way.
    Once the stream is exhausted ``summary`` holds the counts. If more than
    half of the lines were malformed a :class:`FormatError` is raised at the
    end of the stream, since that almost always means the wrong file.

    Examples
    --------
    >>> stream = ingest("tweets.jsonl")          # doctest: +SKIP
    >>> records = list(stream)                   # doctest: +SKIP
    >>> stream.summary.skipped                   # doctest: +SKIP
    0
    """

    def __init__(self, path, source: str = "twitter"):
        if source not in SOURCES:
            raise ValueError(f"unknown source {source!r}")
        self.path = path
        self.source = source
        self.summary = IngestSummary()
        # open eagerly so an unreadable file fails at the call site
        self._fh = open(path, encoding="utf-8")

    def __iter__(self) -> Iterator[RawRecord]:
        seen = set()
        summary = self.summary
        with self._fh as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = _parse_line(line, self.source)
                if rec is None:
                    summary.skipped += 1
                    continue
                if rec.id in seen:
                    summary.skipped += 1
                    summary.duplicates += 1
                    continue
                seen.add(rec.id)
                summary.read += 1
                yield rec
        logger.info(
            "ingested %s: %d read, %d skipped (%d duplicate ids)",
            self.path, summary.read, summary.skipped, summary.duplicates,
        )
        if summary.lines and summary.skipped / summary.lines > MALFORMED_LIMIT:
            raise FormatError(
                f"{self.path}: {summary.skipped} of {summary.lines} lines malformed"
            )


def read_records(path, source: str = "twitter") -> list:
    return list(ingest(path, source))


def filter_corpus(records: Iterable[RawRecord], labels: dict, min_class_size: int = 5) -> LabeledCorpus:
    """Drop retweets, then drop classes smaller than ``min_class_size``.

    The two passes run once each, in that order; pruning does not cascade.
    Records without an entry in ``labels`` are not part of the labeled
    corpus and are dropped.
    """
    if min_class_size < 1:
        raise ValueError("min_class_size must be >= 1")
    originals = [
        replace(r, label=labels[r.id])
        for r in records
        if r.retweet_of is None and r.id in labels
    ]
    counts = Counter(r.label for r in originals)
    kept = [r for r in originals if counts[r.label] >= min_class_size]
    if not kept:
        raise EmptyCorpus("no documents survive retweet removal and class pruning")
    dropped = sorted(c for c, n in counts.items() if n < min_class_size)
    if dropped:
        logger.info("pruned %d rare classes: %s", len(dropped), ", ".join(dropped))
    return LabeledCorpus.from_documents(kept, min_class_size)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def train_test_split(corpus: LabeledCorpus, test_fraction: float = 0.25, seed: int = 0):
    """Stratified split: ``max(1, round(f * n_c))`` documents per class go to test.

    Within each class the documents are shuffled by an RNG keyed on
    ``(seed, class)``; both halves keep the input order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    by_class = {}
    for i, doc in enumerate(corpus.documents):
        by_class.setdefault(doc.label, []).append(i)
    test_idx = set()
    for label in sorted(by_class):
        idx = by_class[label]
        if len(idx) < 2:
            raise StratificationError(label, len(idx), 2)
        n_test = max(1, _round_half_up(test_fraction * len(idx)))
        perm = keyed_rng("split", seed, label).permutation(len(idx))
        test_idx.update(idx[j] for j in perm[:n_test])
    docs = corpus.documents
    train = [d for i, d in enumerate(docs) if i not in test_idx]
    test = [d for i, d in enumerate(docs) if i in test_idx]
    return LabeledCorpus.from_documents(train), LabeledCorpus.from_documents(test)


def write_jsonl(path, items: Iterable) -> int:
    """Write objects (anything with ``to_json`` or plain dicts) one per line."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            obj = item.to_json() if hasattr(item, "to_json") else item
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            n += 1
    return n


def read_documents(path, stops=None, stemmer: str = "suffix") -> list:
    """Load documents from JSON Lines.

    Lines that already carry ``tokens`` are taken as normalized; otherwise
    ``text`` is normalized on the fly.
    """
    from .textprep import Document, normalize

    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "tokens" in obj:
                docs.append(Document.from_json(obj))
            else:
                tokens, tags = normalize(obj["text"], stops, stemmer)
                docs.append(Document(str(obj["id"]), tokens, tags, obj.get("root_category"),
                                     obj.get("source", "twitter")))
    return docs
