"""Mining a hashtag thesaurus and expanding short tweets with it.

A synthetic unlabeled stream stands in for a large tweet collection. Each
hashtag's thesaurus entry ranks the words that co-occur with it; expansion
then appends ``n`` words drawn from the top ``2n``.
Run with ``python demos/02_hashtag_expansion.py``.
"""

# %% Build the thesaurus from an unlabeled stream
from stx.expansion import ExpansionConfig, build_hashtag_thesaurus, expand, expand_corpus
from stx.synth import make_world
from stx.textprep import Document, load_stop_lists, normalize

stops = load_stop_lists()
world = make_world(n_classes=4, seed=3)


def to_docs(records):
    out = []
    for r in records:
        tokens, hashtags = normalize(r["text"], stops)
        out.append(Document(r["id"], tokens, hashtags, r.get("label_node")))
    return out


stream = to_docs(world.unlabeled_records(2000))
thesaurus = build_hashtag_thesaurus(stream, stops, max_depth=10)
print(f"{len(thesaurus)} hashtags with entries, built from {thesaurus.built_from['documents']} documents")
for key in sorted(thesaurus.entries)[:3]:
    print(f"  {key:12} {thesaurus.words(key)[:6]}")

# %% Expand a few labeled tweets
labeled = [d for d in to_docs(world.labeled_records(5)) if d.hashtags][:3]
config = ExpansionConfig(n=2, seed=0)
for d in labeled:
    grown = expand(d, thesaurus, config)
    print(f"\n{d.id}: {' '.join(d.tokens)}")
    print(f"  + {list(grown.tokens[len(d.tokens):])}")

# %% Corpus-level statistics, per side
train = to_docs(world.labeled_records(50))
for side in ("document", "query", "both"):
    cfg = ExpansionConfig(n=2, seed=0, side=side)
    _, tr = expand_corpus(train, thesaurus, cfg, "train")
    _, te = expand_corpus(train, thesaurus, cfg, "test")
    print(f"side={side:8} train touched {tr.documents_touched:3}  test touched {te.documents_touched:3}")
