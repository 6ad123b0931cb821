import json

import pytest

from stx.corpus import RawRecord
from stx.textprep import Document


def write_lines(path, lines):
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line if isinstance(line, str) else json.dumps(line))
            fh.write("\n")
    return path


def doc(id_, text, label=None):
    tokens = tuple(text.split())
    return Document(id_, tokens, frozenset(t for t in tokens if t.startswith("#")), label)


@pytest.fixture
def records_7():
    """catA x5 originals + 1 retweet, catB x1."""
    recs = [RawRecord(f"a{i}", f"text {i}") for i in range(5)]
    recs.append(RawRecord("a-rt", "text 0", retweet_of="a0"))
    recs.append(RawRecord("b0", "other"))
    labels = {r.id: ("catA" if r.id.startswith("a") else "catB") for r in recs}
    return recs, labels
