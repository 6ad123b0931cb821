import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stx.textprep import (URL_PATTERN, Document, StopLists, load_stop_lists, normalize,
                          read_stop_file, suffix_stem, vocabulary_reduction_report)

DEFAULT_STOPS = load_stop_lists()


def test_url_hashtag_and_stops():
    stops = StopLists(general={"out", "now"})
    tokens, tags = normalize("Check out http://t.co/xyz #Fiction NOW!!!", stops, "none")
    assert tokens == ("check", "#fiction")
    assert tags == {"#fiction"}


def test_empty_text():
    assert normalize("", DEFAULT_STOPS) == ((), frozenset())


def test_case_folding_and_stemming():
    tokens, _ = normalize("Cats cats CATS", StopLists(), "suffix")
    assert tokens == ("cat", "cat", "cat")


@pytest.mark.parametrize("text", [
    "see https://example.com/a?b=1 now",
    "see www.example.org now",
    "see bit.ly/3xYz now",
    "see t.co/AbC123 now",
])
def test_urls_removed(text):
    tokens, _ = normalize(text, StopLists(), "none")
    assert tokens == ("see", "now")


def test_hashtag_rules():
    stops = StopLists(general={"the"})
    tokens, tags = normalize("#the ##double a#b #!!! #Mystery's", stops, "suffix")
    # "#the" is dropped because "the" is a stop word; only a leading '#' survives
    assert tokens == ("#double", "ab", "#mysterys")
    assert tags == {"#double", "#mysterys"}


def test_hashtags_never_stemmed():
    tokens, _ = normalize("#books books", StopLists(), "suffix")
    assert tokens == ("#books", "book")


def test_unicode_punctuation_and_symbols_stripped():
    tokens, _ = normalize("café… «great» €5 deal™", StopLists(), "none")
    assert tokens == ("café", "great", "5", "deal")


def test_stem_that_lands_on_stop_word_is_dropped():
    stops = StopLists(general={"other"})
    assert normalize("others agree", stops, "suffix")[0] == ("agree",)


def test_unknown_stemmer():
    with pytest.raises(ValueError):
        normalize("x", StopLists(), "porter")


@pytest.mark.parametrize("word,stem", [
    ("cats", "cat"), ("classes", "class"), ("stories", "story"), ("reading", "read"),
    ("walked", "walk"), ("bus", "bus"), ("glass", "glass"), ("walkings", "walk"), ("sing", "sing"),
])
def test_suffix_stem(word, stem):
    assert suffix_stem(word) == stem


def test_stop_file_parsing():
    words = read_stop_file("# comment\nThe\n\n rt  # inline\n")
    assert words == {"the", "rt"}


def test_default_stop_lists_loaded_with_hashes():
    assert "the" in DEFAULT_STOPS and "rt" in DEFAULT_STOPS
    assert set(DEFAULT_STOPS.hashes) == {"general", "platform"}
    assert "" not in DEFAULT_STOPS.words
    assert all(w == w.lower() for w in DEFAULT_STOPS.words)


def test_custom_stop_files(tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("apple\n")
    p = tmp_path / "p.txt"
    p.write_text("pear\n")
    stops = load_stop_lists(g, p)
    assert normalize("apple pear plum", stops, "none")[0] == ("plum",)


def test_vocabulary_reduction_report():
    assert vocabulary_reduction_report({"A", "a"}, {"a"}) == (2, 1)
    docs = [Document("1", ("a", "b")), Document("2", ("b",))]
    assert vocabulary_reduction_report(docs, docs) == (2, 2)


text_strategy = st.lists(
    st.sampled_from(list("abcsXYZ #!.,/:'é-_") + ["http://", "t.co/", "www.", " the ", " RT ", "ing", "ies"]),
    max_size=30,
).map("".join)


@settings(max_examples=300, deadline=None)
@given(text_strategy, st.sampled_from(["none", "suffix"]))
def test_normalize_properties(text, stemmer):
    tokens, tags = normalize(text, DEFAULT_STOPS, stemmer)
    # idempotent on its own output
    assert normalize(" ".join(tokens), DEFAULT_STOPS, stemmer) == (tokens, tags)
    for t in tokens:
        assert t == t.lower()
        assert not URL_PATTERN.search(t)
        assert t not in DEFAULT_STOPS
        assert t and t != "#"
    assert tags <= set(tokens)


@settings(max_examples=200, deadline=None)
@given(st.from_regex(r"[a-z]{1,10}", fullmatch=True))
def test_hashtag_preserved_when_word_survives(word):
    tokens, tags = normalize(f"x #{word} y", DEFAULT_STOPS, "suffix")
    if word not in DEFAULT_STOPS:
        assert f"#{word}" in tags
    else:
        assert f"#{word}" not in tokens


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=30))
def test_normalize_never_raises_on_arbitrary_unicode(text):
    tokens, tags = normalize(text, DEFAULT_STOPS)
    assert normalize(" ".join(tokens), DEFAULT_STOPS) == (tokens, tags)
