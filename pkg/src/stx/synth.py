"""Synthetic tweet corpora standing in for the proprietary datasets.

Each class owns a disjoint vocabulary and a few hashtags; a shared pool of
noise words is mixed into every document. Texts get capitalization,
punctuation and shortened URLs so the normalizer has something to do.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._seeding import keyed_rng
from .textprep import load_stop_lists

__all__ = ["SynthWorld", "make_world", "CATEGORY_NAMES"]

CATEGORY_NAMES = [
    "Books", "Home & Kitchen", "Clothing, Shoes & Jewelry", "Movies & TV",
    "Electronics", "Health & Personal Care", "Sports & Outdoors", "Digital Music",
    "Video Games", "Toys & Games", "Beauty", "Pet Supplies",
]

_CONS = "bdfgklmnprtvz"
_VOWELS = "aeiou"


def _slug(name: str) -> str:
    out = "".join(ch if ch.isalnum() else "_" for ch in name.lower())
    while "__" in out:
        out = out.replace("__", "_")
    return out.strip("_")


def _pseudo_words(rng, count: int, taken: set) -> list:
    # consonant-vowel syllables ending in a vowel: never touched by the suffix stemmer
    words = []
    while len(words) < count:
        n_syl = int(rng.integers(2, 4))
        w = "".join(_CONS[rng.integers(len(_CONS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(n_syl))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


@dataclass
class SynthWorld:
    classes: list
    names: dict
    vocab: dict
    hashtags: dict
    noise_words: list
    noise: float
    hashtag_rate: float
    seed: int

    def _text(self, rng, cls: str) -> str:
        vocab = self.vocab[cls]
        # Zipf-like preference inside the class vocabulary
        ranks = np.arange(1, len(vocab) + 1)
        p = 1.0 / ranks
        p /= p.sum()
        length = int(rng.integers(6, 13))
        words = []
        for _ in range(length):
            if rng.random() < self.noise:
                words.append(self.noise_words[rng.integers(len(self.noise_words))])
            else:
                words.append(vocab[rng.choice(len(vocab), p=p)])
        if rng.random() < self.hashtag_rate:
            tags = self.hashtags[cls]
            words.insert(int(rng.integers(len(words) + 1)), "#" + tags[rng.integers(len(tags))])
        if rng.random() < 0.3:
            words[0] = words[0].capitalize()
        if rng.random() < 0.2:
            words.append("http://t.co/" + "".join(_CONS[i] for i in rng.integers(len(_CONS), size=6)))
        if rng.random() < 0.2:
            words[-1] += "!!"
        return " ".join(words)

    def taxonomy_lines(self) -> list:
        """Roots, two mid-level nodes per root, three leaves (one with two parents)."""
        lines = []
        for c in self.classes:
            lines.append({"node_id": c, "parent_ids": [], "name": self.names[c]})
            lines.append({"node_id": f"{c}/a", "parent_ids": [c], "name": f"{self.names[c]} A"})
            lines.append({"node_id": f"{c}/b", "parent_ids": [c], "name": f"{self.names[c]} B"})
            lines.append({"node_id": f"{c}/a/1", "parent_ids": [f"{c}/a"], "name": "leaf 1"})
            lines.append({"node_id": f"{c}/b/2", "parent_ids": [f"{c}/b"], "name": "leaf 2"})
            lines.append({"node_id": f"{c}/x/3", "parent_ids": [f"{c}/a", f"{c}/b"], "name": "leaf 3"})
        return lines

    def labeled_records(self, docs_per_class: int, retweet_rate: float = 0.0) -> list:
        """Raw JSON-Lines objects with ``label_node`` set to a leaf node."""
        rng = keyed_rng("labeled", self.seed)
        leaves = ("a/1", "b/2", "x/3")
        out = []
        for c in self.classes:
            for i in range(docs_per_class):
                rid = f"{c}-{i:05d}"
                rec = {"id": rid, "text": self._text(rng, c),
                       "label_node": f"{c}/{leaves[rng.integers(3)]}"}
                out.append(rec)
                if rng.random() < retweet_rate:
                    out.append({"id": f"rt-{rid}", "text": "RT " + rec["text"],
                                "retweet_of": rid, "label_node": rec["label_node"]})
        order = rng.permutation(len(out))
        return [out[i] for i in order]

    def unlabeled_records(self, n_docs: int) -> list:
        rng = keyed_rng("unlabeled", self.seed)
        return [{"id": f"u-{i:06d}", "text": self._text(rng, self.classes[rng.integers(len(self.classes))])}
                for i in range(n_docs)]


def make_world(n_classes: int = 6, vocab_size: int = 30, noise: float = 0.2,
               noise_vocab: int = 60, hashtags_per_class: int = 3,
               hashtag_rate: float = 0.5, seed: int = 42) -> SynthWorld:
    """Draw class vocabularies, hashtags and the shared noise pool."""
    if n_classes < 2:
        raise ValueError("need at least two classes")
    rng = keyed_rng("world", seed)
    names = [CATEGORY_NAMES[i] if i < len(CATEGORY_NAMES) else f"Category {i}" for i in range(n_classes)]
    classes = [_slug(n) for n in names]
    taken = set(load_stop_lists().words)
    vocab = {c: _pseudo_words(rng, vocab_size, taken) for c in classes}
    tags = {c: _pseudo_words(rng, hashtags_per_class, taken) for c in classes}
    noise_words = _pseudo_words(rng, noise_vocab, taken)
    return SynthWorld(classes, dict(zip(classes, names)), vocab, tags, noise_words,
                      noise, hashtag_rate, seed)
