import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stx.corpus import (LabeledCorpus, RawRecord, filter_corpus, ingest, read_documents,
                        train_test_split, write_jsonl)
from stx.errors import EmptyCorpus, FormatError, StratificationError

from conftest import doc, write_lines


class TestIngest:
    def test_three_valid_lines(self, tmp_path):
        path = write_lines(tmp_path / "c.jsonl", [{"id": str(i), "text": "hi"} for i in range(3)])
        stream = ingest(path)
        recs = list(stream)
        assert [r.id for r in recs] == ["0", "1", "2"]
        assert (stream.summary.read, stream.summary.skipped) == (3, 0)

    def test_truncated_line_skipped(self, tmp_path):
        path = write_lines(tmp_path / "c.jsonl", [{"id": "1", "text": "a"}, {"id": "2", "text": "b"},
                                                  '{"id": "3", "te'])
        stream = ingest(path)
        assert len(list(stream)) == 2
        assert stream.summary.skipped == 1

    def test_majority_malformed_is_fatal(self, tmp_path):
        path = write_lines(tmp_path / "c.jsonl", [{"id": "1", "text": "a"}, "not json", "{"])
        with pytest.raises(FormatError):
            list(ingest(path))

    def test_fields_and_unknown_keys(self, tmp_path):
        path = write_lines(tmp_path / "c.jsonl", [
            {"id": "1", "text": "a", "retweet_of": "0", "label_node": "n1", "lang": "en"}])
        (rec,) = list(ingest(path, "amazon"))
        assert rec == RawRecord("1", "a", "0", "n1", "amazon")

    def test_invalid_records_counted(self, tmp_path):
        path = write_lines(tmp_path / "c.jsonl", [
            {"id": "1", "text": "a"}, {"id": "1", "text": "dup"}, {"id": "2", "text": "  "},
            {"id": "3", "text": "ok"}, {"id": "4", "text": "ok"}, {"id": 5, "text": "x"}, ""])
        stream = ingest(path)
        assert [r.id for r in stream] == ["1", "3", "4"]
        assert stream.summary.skipped == 3
        assert stream.summary.duplicates == 1

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(OSError):
            ingest(tmp_path / "missing.jsonl")


class TestFilter:
    def test_seven_record_example(self, records_7):
        recs, labels = records_7
        corpus = filter_corpus(recs, labels, 5)
        assert [d.id for d in corpus] == [f"a{i}" for i in range(5)]
        assert corpus.class_counts == {"catA": 5}

    def test_retweet_removal_can_push_class_below_threshold(self, records_7):
        recs, labels = records_7
        # catA: 5 originals + 1 retweet. With min 6 it only passes if retweets counted.
        with pytest.raises(EmptyCorpus):
            filter_corpus(recs, labels, 6)

    def test_all_retweets(self):
        recs = [RawRecord(str(i), "t", retweet_of="x") for i in range(3)]
        with pytest.raises(EmptyCorpus):
            filter_corpus(recs, {r.id: "A" for r in recs}, 1)

    def test_no_cascade(self):
        recs = [RawRecord(f"a{i}", "t") for i in range(3)] + [RawRecord("b", "t")]
        corpus = filter_corpus(recs, {"a0": "A", "a1": "A", "a2": "A", "b": "B"}, 2)
        assert corpus.class_counts == {"A": 3}

    def test_unlabeled_records_dropped(self):
        recs = [RawRecord("1", "t"), RawRecord("2", "t")]
        assert filter_corpus(recs, {"1": "A"}, 1).ids == ["1"]

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.sampled_from("ABCD"), st.booleans()), min_size=1, max_size=40),
           st.integers(1, 4))
    def test_invariants(self, layout, m):
        recs = [RawRecord(str(i), "t", retweet_of="x" if rt else None) for i, (_, rt) in enumerate(layout)]
        labels = {str(i): c for i, (c, _) in enumerate(layout)}
        try:
            corpus = filter_corpus(recs, labels, m)
        except EmptyCorpus:
            return
        assert all(d.retweet_of is None for d in corpus)
        assert min(corpus.class_counts.values()) >= m
        assert set(corpus.labels) == set(corpus.class_counts)


def _corpus(counts):
    docs = [doc(f"{c}{i}", "x", c) for c, n in counts.items() for i in range(n)]
    return LabeledCorpus.from_documents(docs)


class TestSplit:
    def test_split_rounding_example(self):
        train, test = train_test_split(_corpus({"A": 8, "B": 4}), 0.25, seed=7)
        assert test.class_counts == {"A": 2, "B": 1}
        assert train.class_counts == {"A": 6, "B": 3}

    def test_deterministic(self):
        c = _corpus({"A": 8, "B": 4})
        assert train_test_split(c, 0.25, 7) == train_test_split(c, 0.25, 7)

    def test_singleton_class(self):
        with pytest.raises(StratificationError) as err:
            train_test_split(_corpus({"A": 5, "B": 1}), 0.25, 0)
        assert err.value.label == "B"

    @settings(max_examples=100, deadline=None)
    @given(st.dictionaries(st.sampled_from("ABCDE"), st.integers(2, 30), min_size=1),
           st.floats(0.05, 0.95), st.integers(0, 10**6))
    def test_partition_and_rounding(self, counts, frac, seed):
        import math
        corpus = _corpus(counts)
        train, test = train_test_split(corpus, frac, seed)
        assert set(train.ids) | set(test.ids) == set(corpus.ids)
        assert not set(train.ids) & set(test.ids)
        for c, n in counts.items():
            assert test.class_counts[c] == max(1, math.floor(frac * n + 0.5))


def test_jsonl_roundtrip(tmp_path):
    docs = [doc("1", "a #b", "X"), doc("2", "c")]
    write_jsonl(tmp_path / "d.jsonl", docs)
    assert read_documents(tmp_path / "d.jsonl") == docs
    line = json.loads((tmp_path / "d.jsonl").read_text().splitlines()[0])
    assert line["root_category"] == "X"


def test_read_documents_normalizes_raw_text(tmp_path):
    write_lines(tmp_path / "r.jsonl", [{"id": "1", "text": "Hello #World", "root_category": "A"}])
    (d,) = read_documents(tmp_path / "r.jsonl")
    assert d.tokens == ("hello", "#world") and d.label == "A"
