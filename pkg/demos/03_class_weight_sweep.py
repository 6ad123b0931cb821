"""How down-weighting a dominant class trades precision for recall.

Builds an imbalanced synthetic corpus (one class ten times larger than the
rest, with overlapping noise) and cross-validates a linear SVM while the
weight on the largest class varies, then sweeps the fraction of features
kept. Both sweeps print the macro scores that would feed a plot.
Run with ``python demos/03_class_weight_sweep.py``.
"""

# %% An imbalanced corpus
from collections import Counter
from dataclasses import replace

from stx.evaluation import category_size_curve, cross_validate
from stx.pipeline import PipelineConfig
from stx.synth import make_world
from stx.textprep import Document, load_stop_lists, normalize

stops = load_stop_lists()
world = make_world(n_classes=5, noise=0.6, vocab_size=20, seed=11)
records = world.labeled_records(20)
big = world.classes[0]
# same seed, so the first 20 documents of every class repeat; duplicates are skipped below
records += [r for r in world.labeled_records(200) if r["label_node"].startswith(big + "/")]
docs = []
seen = set()
for r in records:
    if r["id"] in seen:
        continue
    seen.add(r["id"])
    tokens, hashtags = normalize(r["text"], stops)
    docs.append(Document(r["id"], tokens, hashtags, r["label_node"].split("/")[0]))
print("class sizes:", dict(Counter(d.label for d in docs)))

# %% Majority-class weight
base = PipelineConfig(keep_fraction=0.25, C=5.0, epochs=10)
print("\nweight  macro-P  macro-R  macro-F1")
for w in (0.05, 0.1, 0.5, 1.0):
    res = cross_validate(replace(base, majority_weight=w), docs, k=5, seed=0)
    m = res.mean.macro
    print(f"{w:6}  {m['precision']:.3f}    {m['recall']:.3f}    {m['f1']:.3f}")

# %% Feature fraction
print("\nkeep   macro-F1")
for f in (0.05, 0.1, 0.25, 0.5, 1.0):
    res = cross_validate(replace(base, keep_fraction=f, majority_weight=0.1), docs, k=5, seed=0)
    print(f"{f:4}   {res.mean.macro['f1']:.3f}")

# %% Category size against F1
print("\n(support, F1):", [(s, round(f, 3)) for s, f in category_size_curve(res.mean)])
