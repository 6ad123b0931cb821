"""Tweet normalization: case folding, URL removal, punctuation stripping,
stop-word filtering and light stemming.

The pipeline order is fixed::

    lowercase -> drop URLs -> split on whitespace -> strip punctuation
    (keep one leading '#') -> drop empties and stop words -> stem

Hashtags are matched against the stop lists by their bare word and are
never stemmed.
"""

from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional

__all__ = [
    "Document",
    "StopLists",
    "load_stop_lists",
    "read_stop_file",
    "normalize",
    "normalize_record",
    "suffix_stem",
    "vocabulary_reduction_report",
    "URL_PATTERN",
]

URL_PATTERN = re.compile(
    r"(?:https?://|www\.)\S*"
    r"|[a-z0-9][a-z0-9-]*(?:\.[a-z0-9-]+)+/\S*"
)

STEMMERS = ("none", "suffix")


@dataclass(frozen=True)
class Document:
    """One normalized tweet or review."""

    id: str
    tokens: tuple
    hashtags: frozenset = frozenset()
    label: Optional[str] = None
    source: str = "twitter"

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "tokens": list(self.tokens),
            "hashtags": sorted(self.hashtags),
            "source": self.source,
        }
        if self.label is not None:
            out["root_category"] = self.label
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Document":
        tokens = tuple(obj["tokens"])
        tags = obj.get("hashtags")
        if tags is None:
            tags = [t for t in tokens if t.startswith("#")]
        return cls(
            id=str(obj["id"]),
            tokens=tokens,
            hashtags=frozenset(tags),
            label=obj.get("root_category"),
            source=obj.get("source", "twitter"),
        )


@dataclass(frozen=True)
class StopLists:
    general: frozenset = frozenset()
    platform: frozenset = frozenset()
    hashes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("general", "platform"):
            words = frozenset(w.lower() for w in getattr(self, name) if w)
            object.__setattr__(self, name, words)

    def __contains__(self, word) -> bool:
        return word in self.general or word in self.platform

    @property
    def words(self) -> frozenset:
        return self.general | self.platform


def read_stop_file(text: str) -> frozenset:
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return frozenset(words)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_stop_lists(general_path=None, platform_path=None) -> StopLists:
    """Load stop lists from files, falling back to the bundled defaults."""
    texts = {}
    for name, path, default in (
        ("general", general_path, "stop_general.txt"),
        ("platform", platform_path, "stop_twitter.txt"),
    ):
        if path is None:
            texts[name] = resources.files("stx.data").joinpath(default).read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                texts[name] = fh.read()
    return StopLists(
        general=read_stop_file(texts["general"]),
        platform=read_stop_file(texts["platform"]),
        hashes={k: _sha256(v) for k, v in texts.items()},
    )


def _strip_one(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith("ing") and len(word) > 5:
        return word[:-3]
    if word.endswith("ed") and len(word) > 4:
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us", "is")) and len(word) > 3:
        return word[:-1]
    return word


def suffix_stem(word: str) -> str:
    """Strip plural, ``-ing`` and ``-ed`` endings until nothing changes.

    Iterating to a fixed point makes the stemmer idempotent.
    """
    while True:
        stripped = _strip_one(word)
        if stripped == word:
            return word
        word = stripped


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "PS"


def _strip_punctuation(token: str) -> str:
    hashed = token.startswith("#")
    body = "".join(ch for ch in token if not _is_punct(ch))
    if hashed and body:
        return "#" + body
    return body


def normalize(text: str, stops: StopLists | None = None, stemmer: str = "suffix"):
    """Normalize raw text into ``(tokens, hashtags)``.

    Parameters
    ----------
    text : str
        Raw tweet or review text.
    stops : StopLists, optional
        Words to drop. ``None`` drops nothing.
    stemmer : {"none", "suffix"}
        Stemmer applied to non-hashtag tokens.

    Returns
    -------
    tokens : tuple of str
    hashtags : frozenset of str
        Hashtag tokens (with leading ``#``); each also appears in ``tokens``.
    """
    if stemmer not in STEMMERS:
        raise ValueError(f"unknown stemmer {stemmer!r}; expected one of {STEMMERS}")
    stops = stops if stops is not None else StopLists()
    text = URL_PATTERN.sub(" ", text.lower())
    tokens = []
    for raw in text.split():
        tok = _strip_punctuation(raw)
        if not tok or tok == "#":
            continue
        if tok.startswith("#"):
            if tok[1:] in stops:
                continue
        else:
            if tok in stops:
                continue
            if stemmer == "suffix":
                tok = suffix_stem(tok)
                # stemming can land on a stop word ("others" -> "other")
                if tok in stops:
                    continue
        tokens.append(tok)
    hashtags = frozenset(t for t in tokens if t.startswith("#"))
    return tuple(tokens), hashtags


def normalize_record(record, stops: StopLists | None = None, stemmer: str = "suffix") -> Document:
    """Normalize a :class:`stx.corpus.RawRecord` into a :class:`Document`."""
    tokens, tags = normalize(record.text, stops, stemmer)
    return Document(
        id=record.id,
        tokens=tokens,
        hashtags=tags,
        label=getattr(record, "label", None),
        source=getattr(record, "source", "twitter"),
    )


def _token_set(corpus: Iterable) -> set:
    seen = set()
    for item in corpus:
        if isinstance(item, str):
            seen.update(item.split())
        elif hasattr(item, "tokens"):
            seen.update(item.tokens)
        elif hasattr(item, "text"):
            seen.update(item.text.split())
        else:
            seen.update(item)
    return seen


def vocabulary_reduction_report(before: Iterable, after: Iterable) -> tuple[int, int]:
    """Count distinct tokens before and after normalization.

    Items may be raw strings (split on whitespace), records with ``text``,
    documents with ``tokens``, or plain token sequences.
    """
    return len(_token_set(before)), len(_token_set(after))
